#include "dualpotts/dual_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "dualpotts/errors.hpp"
#include "dualpotts/rng.hpp"
#include "json.hpp"

namespace dualpotts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_factor_args(int q, double value, Symbol t, const char* what) {
  if (q < 2) throw InvalidArgument("alphabet size q must be >= 2");
  if (!(value >= 0.0)) throw InvalidArgument(std::string(what) + " must be >= 0");
  if (t >= Symbol(q)) throw InvalidArgument("dual symbol out of alphabet");
}

// ln(e^J - 1) without cancellation: expm1 for small J, J + log1p(-e^-J) otherwise.
double log_expm1(double j) {
  if (j == 0.0) return kNegInf;
  return j < 1.0 ? std::log(std::expm1(j)) : j + std::log1p(-std::exp(-j));
}

// ln(e^J + q - 1)
double log_exp_plus(double j, int q) { return j + std::log1p((q - 1) * std::exp(-j)); }

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

double dual_edge_factor(int q, double coupling, Symbol t) {
  check_factor_args(q, coupling, t, "coupling");
  return t == 0 ? std::exp(coupling) + (q - 1) : std::expm1(coupling);
}

double log_dual_edge_factor(int q, double coupling, Symbol t) {
  check_factor_args(q, coupling, t, "coupling");
  return t == 0 ? log_exp_plus(coupling, q) : log_expm1(coupling);
}

double dual_field_factor(int q, double field, Symbol t) {
  check_factor_args(q, field, t, "field");
  return (t == 0 ? std::exp(field) + (q - 1) : std::expm1(field)) / q;
}

double log_dual_field_factor(int q, double field, Symbol t) {
  check_factor_args(q, field, t, "field");
  return (t == 0 ? log_exp_plus(field, q) : log_expm1(field)) - std::log(double(q));
}

DualPartition partition_from_tree(int width, int height, std::vector<BondId> tree_bonds,
                                  SiteId root) {
  if (width < 3 || height < 3) {
    throw InvalidArgument("torus width and height must both be >= 3");
  }
  DualPartition p;
  p.width_ = width;
  p.height_ = height;
  p.bonds_ = torus_bonds(width, height);
  const std::size_t n = p.num_sites();
  if (root >= n) throw InvalidArgument("root site out of range");
  if (tree_bonds.size() != n - 1) {
    throw InvalidArgument("spanning tree needs " + std::to_string(n - 1) + " bonds, got " +
                          std::to_string(tree_bonds.size()));
  }
  p.root_ = root;
  p.in_tree_.assign(p.bonds_.size(), 0);
  DisjointSets sets(n);
  for (BondId b : tree_bonds) {
    if (b >= p.bonds_.size()) throw InvalidArgument("tree bond id out of range");
    if (p.in_tree_[b]) throw InvalidArgument("tree bond " + std::to_string(b) + " listed twice");
    p.in_tree_[b] = 1;
    if (!sets.unite(p.bonds_[b].tail, p.bonds_[b].head)) {
      throw InvalidArgument("tree bonds contain a cycle (bond " + std::to_string(b) + ")");
    }
  }
  // N-1 acyclic edges on N vertices always span; no separate connectivity check.
  p.tree_ = std::move(tree_bonds);
  for (BondId b = 0; b < p.bonds_.size(); ++b) {
    if (!p.in_tree_[b]) p.cotree_.push_back(b);
  }
  p.orientation_.assign(p.bonds_.size(), 1);

  std::vector<std::vector<BondId>> adjacency(n);
  for (BondId b = 0; b < p.bonds_.size(); ++b) {
    if (!p.in_tree_[b]) continue;
    adjacency[p.bonds_[b].tail].push_back(b);
    adjacency[p.bonds_[b].head].push_back(b);
  }
  std::vector<DualPartition::CompletionStep> visit;
  visit.reserve(n - 1);
  std::vector<std::uint8_t> seen(n, 0);
  std::queue<SiteId> frontier;
  frontier.push(root);
  seen[root] = 1;
  while (!frontier.empty()) {
    const SiteId v = frontier.front();
    frontier.pop();
    for (BondId b : adjacency[v]) {
      const SiteId u = p.bonds_[b].tail == v ? p.bonds_[b].head : p.bonds_[b].tail;
      if (seen[u]) continue;
      seen[u] = 1;
      visit.push_back({u, b, v});
      frontier.push(u);
    }
  }
  if (visit.size() != n - 1) throw InternalError("tree traversal missed sites");
  p.order_.assign(visit.rbegin(), visit.rend());
  return p;
}

DualPartition build_partition(const PottsModel& model, PartitionStrategy strategy) {
  const int w = model.width();
  const int h = model.height();
  std::vector<BondId> tree;
  if (strategy == PartitionStrategy::max_coupling) {
    std::vector<BondId> order(model.num_bonds());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](BondId a, BondId b) {
      return model.coupling(a) > model.coupling(b);
    });
    DisjointSets sets(model.num_sites());
    for (BondId b : order) {
      if (sets.unite(model.bond(b).tail, model.bond(b).head)) tree.push_back(b);
    }
    std::sort(tree.begin(), tree.end());
  } else {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const auto s = static_cast<BondId>(r * w + c);
        if (c < w - 1) tree.push_back(2 * s);
        if (c == 0 && r < h - 1) tree.push_back(2 * s + 1);
      }
    }
  }
  return partition_from_tree(w, h, std::move(tree), 0);
}

DualPartition DualPartition::with_flipped_orientation(BondId b) const {
  if (b >= bonds_.size()) throw InvalidArgument("bond id out of range");
  DualPartition p = *this;
  p.orientation_[b] = -p.orientation_[b];
  return p;
}

bool DualPartition::operator==(const DualPartition& other) const {
  return width_ == other.width_ && height_ == other.height_ && root_ == other.root_ &&
         tree_ == other.tree_ && orientation_ == other.orientation_;
}

void check_compatible(const PottsModel& model, const DualPartition& partition) {
  if (model.width() != partition.width() || model.height() != partition.height()) {
    throw InvalidArgument("partition grid " + std::to_string(partition.width()) + "x" +
                          std::to_string(partition.height()) + " does not match model grid " +
                          std::to_string(model.width()) + "x" +
                          std::to_string(model.height()));
  }
}

std::string partition_to_json(const DualPartition& partition) {
  nlohmann::json j;
  j["width"] = partition.width();
  j["height"] = partition.height();
  j["root"] = partition.root();
  j["tree_bonds"] = partition.tree_bonds();
  std::vector<BondId> flipped;
  for (BondId b = 0; b < partition.num_bonds(); ++b) {
    if (partition.orientation(b) < 0) flipped.push_back(b);
  }
  j["flipped"] = flipped;
  return j.dump();
}

DualPartition partition_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DualPartition p = partition_from_tree(j.at("width").get<int>(), j.at("height").get<int>(),
                                          j.at("tree_bonds").get<std::vector<BondId>>(),
                                          j.value("root", SiteId{0}));
    if (j.contains("flipped")) {
      for (BondId b : j.at("flipped").get<std::vector<BondId>>()) {
        p = p.with_flipped_orientation(b);
      }
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("partition JSON: ") + e.what());
  }
}

void complete_into(const DualPartition& partition, int q, std::span<const Symbol> cotree_values,
                   std::span<const Symbol> site_values, DualConfiguration& out,
                   std::vector<std::int64_t>& residual) {
  const std::size_t n = partition.num_sites();
  const auto qs = static_cast<Symbol>(q);
  const auto& cotree = partition.cotree_bonds();
  if (cotree_values.size() != cotree.size()) {
    throw InvalidArgument("expected " + std::to_string(cotree.size()) + " co-tree values");
  }
  const bool field = !site_values.empty();
  if (field && site_values.size() != n - 1) {
    throw InvalidArgument("expected " + std::to_string(n - 1) + " site values");
  }
  out.bond_values.assign(partition.num_bonds(), 0);
  residual.assign(n, 0);
  if (field) {
    out.site_values.resize(n);
    Symbol total = 0;
    for (std::size_t m = 0; m + 1 < n; ++m) {
      if (site_values[m] >= qs) throw InvalidArgument("site value out of alphabet");
      out.site_values[m] = site_values[m];
      residual[m] = site_values[m];
      total = (total + site_values[m]) % qs;
    }
    // The site constraints sum to zero over the torus, so y must as well.
    out.site_values[n - 1] = (qs - total) % qs;
    residual[n - 1] = out.site_values[n - 1];
  } else {
    out.site_values.clear();
  }
  for (std::size_t i = 0; i < cotree.size(); ++i) {
    const Symbol x = cotree_values[i];
    if (x >= qs) throw InvalidArgument("co-tree value out of alphabet");
    const BondId b = cotree[i];
    // x is the flow tail -> head; the stored value carries the orientation.
    out.bond_values[b] = partition.orientation(b) > 0 ? x : (qs - x) % qs;
    const Bond& bond = partition.bond(b);
    residual[bond.tail] = (residual[bond.tail] + x) % q;
    residual[bond.head] = (residual[bond.head] - x + q) % q;
  }
  for (const auto& step : partition.completion_order()) {
    const std::int64_t r = residual[step.site];
    const int s = partition.sign_at(step.parent_bond, step.site);
    out.bond_values[step.parent_bond] = static_cast<Symbol>(s > 0 ? (q - r) % q : r);
    residual[step.parent] = (residual[step.parent] + r) % q;
  }
  if (residual[partition.root()] != 0) {
    throw InternalError("root constraint violated after completion");
  }
}

DualConfiguration complete_configuration(const DualPartition& partition,
                                         const PottsModel& model,
                                         std::span<const Symbol> cotree_values,
                                         std::span<const Symbol> site_values) {
  check_compatible(model, partition);
  if (model.has_field() && site_values.empty()) {
    throw InvalidArgument("model has a field; site values y_1..y_{N-1} are required");
  }
  if (!model.has_field() && !site_values.empty()) {
    throw InvalidArgument("site values given for a model without field");
  }
  DualConfiguration out;
  std::vector<std::int64_t> residual;
  complete_into(partition, model.q(), cotree_values, site_values, out, residual);
  return out;
}

std::vector<Symbol> constraint_residuals(const DualPartition& partition, int q,
                                         const DualConfiguration& config) {
  const std::size_t n = partition.num_sites();
  if (config.bond_values.size() != partition.num_bonds()) {
    throw InvalidArgument("configuration bond count mismatch");
  }
  std::vector<std::int64_t> acc(n, 0);
  for (BondId b = 0; b < partition.num_bonds(); ++b) {
    const Bond& bond = partition.bond(b);
    const std::int64_t x = config.bond_values[b];
    acc[bond.tail] += partition.sign_at(b, bond.tail) * x;
    acc[bond.head] += partition.sign_at(b, bond.head) * x;
  }
  if (!config.site_values.empty()) {
    for (std::size_t s = 0; s < n; ++s) acc[s] += config.site_values[s];
  }
  std::vector<Symbol> out(n);
  for (std::size_t s = 0; s < n; ++s) out[s] = static_cast<Symbol>(((acc[s] % q) + q) % q);
  return out;
}

bool is_valid(const DualPartition& partition, int q, const DualConfiguration& config) {
  const auto r = constraint_residuals(partition, q, config);
  return std::all_of(r.begin(), r.end(), [](Symbol v) { return v == 0; });
}

double log_gamma_product(const PottsModel& model, const DualPartition& partition,
                         const DualConfiguration& config, Side side) {
  check_compatible(model, partition);
  const int q = model.q();
  double acc = 0.0;
  for (BondId b : partition.side_bonds(side)) {
    acc += log_dual_edge_factor(q, model.coupling(b), config.bond_values.at(b));
  }
  if (model.has_field()) {
    if (config.site_values.size() != model.num_sites()) {
      throw InvalidArgument("field model requires site values on every site");
    }
    const std::size_t n = model.num_sites();
    if (side == Side::A) {
      for (std::size_t m = 0; m + 1 < n; ++m) {
        acc += log_dual_field_factor(q, model.field(m), config.site_values[m]);
      }
    } else {
      acc += log_dual_field_factor(q, model.field(n - 1), config.site_values[n - 1]);
    }
  }
  return acc;
}

double duality_scale(const PottsModel& model) {
  return double(model.num_sites()) * std::log(double(model.q()));
}

PottsModel with_side_couplings(const PottsModel& model, const DualPartition& partition,
                               Side side, const ValueSpec& spec) {
  check_compatible(model, partition);
  const auto& bonds = partition.side_bonds(side);
  std::vector<double> values;
  if (const auto* u = std::get_if<UniformValues>(&spec)) {
    if (!(u->lo >= 0.0) || !(u->hi >= u->lo) || !std::isfinite(u->hi)) {
      throw InvalidArgument("uniform couplings range must satisfy 0 <= lo <= hi");
    }
    Rng rng = make_stream(u->seed, StreamTag::couplings, side == Side::A ? 1 : 2);
    values.resize(bonds.size());
    for (auto& v : values) v = u->lo + (u->hi - u->lo) * uniform01(rng);
  } else {
    values = resolve_values(spec, bonds.size(), true);
  }
  std::vector<double> couplings(model.couplings().begin(), model.couplings().end());
  for (std::size_t i = 0; i < bonds.size(); ++i) couplings[bonds[i]] = values[i];
  return model.with_couplings(std::move(couplings));
}

CycleBasis::CycleBasis(const DualPartition& partition, bool with_field) {
  const std::size_t n = partition.num_sites();
  const std::size_t num_free = partition.cotree_bonds().size() + (with_field ? n - 1 : 0);
  bond_offsets_.reserve(num_free + 1);
  site_offsets_.reserve(num_free + 1);
  bond_offsets_.push_back(0);
  site_offsets_.push_back(0);

  // Integer (not mod q) completion of a unit source: tree flows on a spanning
  // tree are unimodular, so every coefficient is -1, 0 or +1.
  std::vector<std::int64_t> residual(n);
  std::vector<std::int64_t> flow(partition.num_bonds());
  auto emit = [&](std::size_t site_a, std::int64_t amount_a, std::size_t site_b,
                  std::int64_t amount_b) {
    std::fill(residual.begin(), residual.end(), 0);
    residual[site_a] += amount_a;
    residual[site_b] += amount_b;
    for (const auto& step : partition.completion_order()) {
      const std::int64_t r = residual[step.site];
      flow[step.parent_bond] = -partition.sign_at(step.parent_bond, step.site) * r;
      residual[step.parent] += r;
    }
    if (residual[partition.root()] != 0) throw InternalError("cycle basis root imbalance");
    for (const auto& step : partition.completion_order()) {
      const std::int64_t f = flow[step.parent_bond];
      if (f != 0) {
        if (f != 1 && f != -1) throw InternalError("non-unit tree flow");
        bond_terms_.push_back({step.parent_bond, static_cast<std::int8_t>(f)});
      }
    }
  };

  for (BondId b : partition.cotree_bonds()) {
    bond_terms_.push_back({b, static_cast<std::int8_t>(partition.orientation(b))});
    const Bond& bond = partition.bond(b);
    emit(bond.tail, 1, bond.head, -1);
    bond_offsets_.push_back(bond_terms_.size());
    site_offsets_.push_back(site_terms_.size());
  }
  if (with_field) {
    for (std::size_t m = 0; m + 1 < n; ++m) {
      emit(m, 1, n - 1, -1);
      bond_offsets_.push_back(bond_terms_.size());
      site_terms_.push_back({static_cast<std::uint32_t>(m), 1});
      site_terms_.push_back({static_cast<std::uint32_t>(n - 1), -1});
      site_offsets_.push_back(site_terms_.size());
    }
  }
}

}  // namespace dualpotts
