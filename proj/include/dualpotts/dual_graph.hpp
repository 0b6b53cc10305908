#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualpotts/model.hpp"

namespace dualpotts {

// Single-argument dual bond factor:
//   gamma(0) = e^J + q - 1,   gamma(t != 0) = e^J - 1.
double dual_edge_factor(int q, double coupling, Symbol t);
/// ln gamma(t); -inf when J = 0 and t != 0. Stable for tiny and huge J.
double log_dual_edge_factor(int q, double coupling, Symbol t);

// Dual site factor (1D DFT of e^{H [x = 0]}):
//   lambda(0) = (e^H + q - 1) / q,   lambda(t != 0) = (e^H - 1) / q.
double dual_field_factor(int q, double field, Symbol t);
double log_dual_field_factor(int q, double field, Symbol t);

enum class PartitionStrategy { max_coupling, comb };
enum class Side { A, B };

/// Spanning tree (side B) / co-tree (side A) split of the torus bonds plus the
/// sign convention used by the mod-q site constraints.
///
/// The constraint at site v reads
///   sum_{b out of v} o_b x_b - sum_{b into v} o_b x_b + y_v = 0 (mod q),
/// where o_b = +1 for the canonical orientation and -1 for a flipped bond.
class DualPartition {
 public:
  struct CompletionStep {
    SiteId site;
    BondId parent_bond;
    SiteId parent;
  };

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t num_sites() const { return std::size_t(width_) * std::size_t(height_); }
  std::size_t num_bonds() const { return bonds_.size(); }
  SiteId root() const { return root_; }

  const std::vector<BondId>& tree_bonds() const { return tree_; }
  const std::vector<BondId>& cotree_bonds() const { return cotree_; }
  const std::vector<BondId>& side_bonds(Side side) const {
    return side == Side::A ? cotree_ : tree_;
  }
  bool in_tree(BondId b) const { return in_tree_.at(b) != 0; }

  /// Non-root sites, children strictly before their parents.
  const std::vector<CompletionStep>& completion_order() const { return order_; }

  int orientation(BondId b) const { return orientation_.at(b); }
  /// Sign with which bond b enters the constraint of site v (v must be an endpoint).
  int sign_at(BondId b, SiteId v) const {
    return bonds_[b].tail == v ? orientation_[b] : -orientation_[b];
  }
  const Bond& bond(BondId b) const { return bonds_.at(b); }

  /// Same tree, bond b's orientation reversed.
  DualPartition with_flipped_orientation(BondId b) const;

  bool operator==(const DualPartition& other) const;

 private:
  friend DualPartition partition_from_tree(int, int, std::vector<BondId>, SiteId);
  DualPartition() = default;

  int width_ = 0;
  int height_ = 0;
  SiteId root_ = 0;
  std::vector<Bond> bonds_;
  std::vector<BondId> tree_;
  std::vector<BondId> cotree_;
  std::vector<std::uint8_t> in_tree_;
  std::vector<CompletionStep> order_;
  std::vector<int> orientation_;
};

/// Validates an explicit tree (N-1 distinct bonds, acyclic, spanning) and
/// derives co-tree and completion order by breadth-first search from root.
DualPartition partition_from_tree(int width, int height, std::vector<BondId> tree_bonds,
                                  SiteId root = 0);

/// max_coupling: maximum-weight spanning tree (Kruskal over descending J, ties
/// by bond id). comb: every non-wrapping vertical bond of column 0 plus every
/// non-wrapping horizontal bond.
DualPartition build_partition(const PottsModel& model, PartitionStrategy strategy);

/// Throws InvalidArgument unless partition and model have the same grid.
void check_compatible(const PottsModel& model, const DualPartition& partition);

// {"width", "height", "root", "tree_bonds": [...], "flipped": [...]}
std::string partition_to_json(const DualPartition& partition);
DualPartition partition_from_json(std::string_view text);

struct DualConfiguration {
  std::vector<Symbol> bond_values;  // indexed by BondId
  std::vector<Symbol> site_values;  // empty unless the model has a field
};

/// Fills the tree bonds (and y at the last site, when a field is present)
/// so every site constraint holds. `cotree_values` follows cotree_bonds() and
/// gives the flow along each bond's canonical direction (tail -> head); the
/// stored value is that flow times the bond's orientation, so the weights do
/// not depend on orientation. `site_values` covers sites 0..N-2 and must be
/// empty without a field.
DualConfiguration complete_configuration(const DualPartition& partition,
                                         const PottsModel& model,
                                         std::span<const Symbol> cotree_values,
                                         std::span<const Symbol> site_values = {});

/// Allocation-free variant for sampling loops. `residual` is scratch space.
void complete_into(const DualPartition& partition, int q,
                   std::span<const Symbol> cotree_values,
                   std::span<const Symbol> site_values, DualConfiguration& out,
                   std::vector<std::int64_t>& residual);

/// Per-site constraint residuals (all zero iff the configuration is valid).
std::vector<Symbol> constraint_residuals(const DualPartition& partition, int q,
                                         const DualConfiguration& config);
bool is_valid(const DualPartition& partition, int q, const DualConfiguration& config);

/// ln Gamma_A / ln Gamma_B, or with a field ln Psi (co-tree gammas and
/// lambda_1..lambda_{N-1}) / ln Lambda (tree gammas and lambda_N).
double log_gamma_product(const PottsModel& model, const DualPartition& partition,
                         const DualConfiguration& config, Side side);

/// ln(Z_d / Z) = N ln q.
double duality_scale(const PottsModel& model);

/// Copy of `model` whose couplings on one side of the partition come from
/// `spec` (listed in side_bonds order). Uniform draws use the couplings
/// sub-stream with index 1 (side A) or 2 (side B).
PottsModel with_side_couplings(const PottsModel& model, const DualPartition& partition,
                               Side side, const ValueSpec& spec);

/// Sparse linear map from free dual variables to the values they move.
///
/// Free variable i < |B_A| is co-tree bond i; with a field, variable
/// |B_A| + m is y_m for m in [0, N-2]. Raising free variable i by d changes
/// bond e by sign * d for every entry of bond_terms(i), and site s by
/// sign * d for every entry of site_terms(i).
class CycleBasis {
 public:
  struct Term {
    std::uint32_t index;
    std::int8_t sign;
  };

  CycleBasis(const DualPartition& partition, bool with_field);

  std::size_t num_free() const { return bond_offsets_.size() - 1; }
  std::span<const Term> bond_terms(std::size_t i) const {
    return {bond_terms_.data() + bond_offsets_[i], bond_offsets_[i + 1] - bond_offsets_[i]};
  }
  std::span<const Term> site_terms(std::size_t i) const {
    return {site_terms_.data() + site_offsets_[i], site_offsets_[i + 1] - site_offsets_[i]};
  }

 private:
  std::vector<Term> bond_terms_;
  std::vector<std::size_t> bond_offsets_;
  std::vector<Term> site_terms_;
  std::vector<std::size_t> site_offsets_;
};

/// x <- x + sign * delta (mod q), with delta in [0, q).
inline Symbol shift_symbol(Symbol x, std::int8_t sign, Symbol delta, Symbol q) {
  const Symbol d = sign > 0 ? delta : (q - delta) % q;
  const Symbol s = x + d;
  return s >= q ? s - q : s;
}

}  // namespace dualpotts
