#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dualpotts {

using SiteId = std::uint32_t;
using BondId = std::uint32_t;
using Symbol = std::uint32_t;

enum class BondAxis : std::uint8_t { horizontal, vertical };

/// A torus bond oriented tail -> head (left->right, top->bottom).
struct Bond {
  SiteId tail;
  SiteId head;
  BondAxis axis;
};

// Value specs shared by couplings (per bond) and fields (per site).
struct ConstantValues {
  double value = 0.0;
};
struct ExplicitValues {
  std::vector<double> values;
};
struct UniformValues {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t seed = 0;
};
using ValueSpec = std::variant<ConstantValues, ExplicitValues, UniformValues>;

/// Ferromagnetic q-state Potts model on a width x height torus, T = 1.
///
/// Sites are numbered row-major, s = row * width + col. Bond 2s is the
/// rightward bond of site s and bond 2s+1 its downward bond, so every site
/// has degree four and there are exactly 2N bonds. Immutable once built.
class PottsModel {
 public:
  PottsModel(int width, int height, int q, std::vector<double> couplings,
             std::vector<double> fields);

  int width() const { return width_; }
  int height() const { return height_; }
  int q() const { return q_; }
  std::size_t num_sites() const { return fields_.size(); }
  std::size_t num_bonds() const { return couplings_.size(); }

  const std::vector<Bond>& bonds() const { return bonds_; }
  const Bond& bond(BondId b) const { return bonds_.at(b); }
  std::span<const double> couplings() const { return couplings_; }
  std::span<const double> fields() const { return fields_; }
  double coupling(BondId b) const { return couplings_.at(b); }
  double field(SiteId s) const { return fields_.at(s); }

  /// True iff some site carries H > 0.
  bool has_field() const { return has_field_; }

  /// Bonds incident to a site: rightward, downward, then the two incoming ones.
  std::span<const BondId, 4> incident_bonds(SiteId s) const {
    return std::span<const BondId, 4>(incident_.data() + 4 * std::size_t{s}, 4);
  }

  PottsModel with_couplings(std::vector<double> couplings) const;
  PottsModel with_fields(std::vector<double> fields) const;

  bool operator==(const PottsModel& other) const;

 private:
  int width_;
  int height_;
  int q_;
  std::vector<double> couplings_;
  std::vector<double> fields_;
  std::vector<Bond> bonds_;
  std::vector<BondId> incident_;
  bool has_field_ = false;
};

using PrimalConfiguration = std::vector<Symbol>;

/// Canonical bond list of a width x height torus.
std::vector<Bond> torus_bonds(int width, int height);

/// Resolves a ValueSpec to `count` concrete values. Random draws use the
/// sub-stream (spec.seed, tag) so couplings and fields never share a stream.
std::vector<double> resolve_values(const ValueSpec& spec, std::size_t count,
                                   bool per_bond);

PottsModel build_torus_model(int width, int height, int q, const ValueSpec& couplings,
                             const ValueSpec& fields = ConstantValues{0.0});

/// -sum J [x_k = x_l] - sum H [x_m = 0]
double hamiltonian(const PottsModel& model, std::span<const Symbol> x);

/// ln f(x) = -H(x), accumulated directly in the log domain.
double log_weight(const PottsModel& model, std::span<const Symbol> x);

// JSON model files: {"width", "height", "q", "couplings", "fields"} where
// couplings/fields are {"constant": v} | {"per_bond": [...]} (or "per_site")
// | {"uniform": [lo, hi], "seed": s}. Export always writes explicit values.
PottsModel model_from_json(std::string_view text);
std::string model_to_json(const PottsModel& model);

/// 64-bit FNV-1a of the canonical JSON export; used for provenance records.
std::uint64_t model_fingerprint(const PottsModel& model);

}  // namespace dualpotts
