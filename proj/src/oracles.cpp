#include "dualpotts/oracles.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dualpotts/errors.hpp"

namespace dualpotts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Incremental log-weights are recomputed from scratch this often to bound drift.
constexpr std::uint64_t kResyncPeriod = 4096;

void check_budget(std::size_t digits, int q, std::uint64_t limit, const char* what) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < digits; ++i) {
    if (total > limit / std::uint64_t(q)) {
      throw GuardExceeded(std::string(what) + ": " + std::to_string(q) + "^" +
                          std::to_string(digits) + " terms exceed the enumeration limit of " +
                          std::to_string(limit));
    }
    total *= std::uint64_t(q);
  }
}

/// Visits every word of `digits` base-q digits in reflected Gray order, so
/// consecutive words differ in one digit by +-1. `step(j, delta)` is called
/// with delta in {1, q-1} (i.e. +1 or -1 mod q) before each visit after the first.
template <class Step, class Visit>
void gray_enumerate(std::size_t digits, int q, Step&& step, Visit&& visit) {
  std::vector<int> value(digits, 0);
  std::vector<int> direction(digits, 1);
  visit();
  for (;;) {
    std::size_t j = 0;
    while (j < digits) {
      const int next = value[j] + direction[j];
      if (next >= 0 && next < q) break;
      direction[j] = -direction[j];
      ++j;
    }
    if (j == digits) return;
    value[j] += direction[j];
    step(j, direction[j] > 0 ? Symbol(1) : Symbol(q - 1));
    visit();
  }
}

/// Sum of exp(x - shift) over many terms, each <= ~1. Short blocks in double,
/// block totals in long double.
class BlockSum {
 public:
  void add(double x) {
    block_ += x;
    if (++in_block_ == 1024) flush();
  }
  long double total() {
    flush();
    return total_;
  }

 private:
  void flush() {
    total_ += block_;
    block_ = 0.0;
    in_block_ = 0;
  }
  double block_ = 0.0;
  int in_block_ = 0;
  long double total_ = 0.0L;
};

double log_of(long double sum, double shift) {
  return sum > 0.0L ? shift + double(std::log(sum)) : kNegInf;
}

/// Walks every valid dual configuration of a model, tracking ln Gamma_A (ln Psi)
/// and ln Gamma_B (ln Lambda) incrementally.
class DualWalker {
 public:
  DualWalker(const PottsModel& model, const DualPartition& partition)
      : model_(model), partition_(partition), q_(model.q()), field_(model.has_field()),
        basis_(partition, field_) {
    const std::size_t n = model.num_sites();
    bond_side_b_.resize(model.num_bonds());
    for (BondId b = 0; b < model.num_bonds(); ++b) {
      bond_zero_.push_back(log_dual_edge_factor(q_, model.coupling(b), 0));
      bond_nonzero_.push_back(log_dual_edge_factor(q_, model.coupling(b), 1));
      bond_side_b_[b] = partition.in_tree(b);
    }
    if (field_) {
      for (std::size_t s = 0; s < n; ++s) {
        site_zero_.push_back(log_dual_field_factor(q_, model.field(s), 0));
        site_nonzero_.push_back(log_dual_field_factor(q_, model.field(s), 1));
      }
    }
    bonds_.assign(model.num_bonds(), 0);
    sites_.assign(field_ ? n : 0, 0);
    resync();
    zero_a_ = a_.value();
    zero_b_ = b_.value();
  }

  std::size_t num_free() const { return basis_.num_free(); }
  double log_a() const { return a_.value(); }
  double log_b() const { return b_.value(); }
  double zero_log_a() const { return zero_a_; }
  double zero_log_b() const { return zero_b_; }

  void shift(std::size_t i, Symbol delta) {
    const auto q = Symbol(q_);
    for (const auto& t : basis_.bond_terms(i)) {
      const Symbol old = bonds_[t.index];
      const Symbol now = shift_symbol(old, t.sign, delta, q);
      bonds_[t.index] = now;
      if ((old == 0) != (now == 0)) {
        Side& side = bond_side_b_[t.index] ? b_ : a_;
        side.remove(old == 0 ? bond_zero_[t.index] : bond_nonzero_[t.index]);
        side.add(now == 0 ? bond_zero_[t.index] : bond_nonzero_[t.index]);
      }
    }
    const std::size_t last = sites_.size() - (field_ ? 1 : 0);
    for (const auto& t : basis_.site_terms(i)) {
      const Symbol old = sites_[t.index];
      const Symbol now = shift_symbol(old, t.sign, delta, q);
      sites_[t.index] = now;
      if ((old == 0) != (now == 0)) {
        Side& side = t.index == last ? b_ : a_;
        side.remove(old == 0 ? site_zero_[t.index] : site_nonzero_[t.index]);
        side.add(now == 0 ? site_zero_[t.index] : site_nonzero_[t.index]);
      }
    }
    if (++steps_ % kResyncPeriod == 0) resync();
  }

 private:
  // Running log-product that counts zero factors instead of adding -inf.
  struct Side {
    double log = 0.0;
    int zeros = 0;
    void add(double v) { v == kNegInf ? void(++zeros) : void(log += v); }
    void remove(double v) { v == kNegInf ? void(--zeros) : void(log -= v); }
    double value() const { return zeros > 0 ? kNegInf : log; }
  };

  void resync() {
    a_ = Side{};
    b_ = Side{};
    for (BondId b = 0; b < bonds_.size(); ++b) {
      (bond_side_b_[b] ? b_ : a_).add(bonds_[b] == 0 ? bond_zero_[b] : bond_nonzero_[b]);
    }
    for (std::size_t s = 0; s < sites_.size(); ++s) {
      (s + 1 == sites_.size() ? b_ : a_).add(sites_[s] == 0 ? site_zero_[s] : site_nonzero_[s]);
    }
  }

  const PottsModel& model_;
  const DualPartition& partition_;
  int q_;
  bool field_;
  CycleBasis basis_;
  std::vector<double> bond_zero_, bond_nonzero_, site_zero_, site_nonzero_;
  std::vector<bool> bond_side_b_;
  std::vector<Symbol> bonds_, sites_;
  Side a_, b_;
  double zero_a_ = 0.0, zero_b_ = 0.0;
  std::uint64_t steps_ = 0;
};

}  // namespace

void Chain1D::validate() const {
  if (q < 2) throw InvalidArgument("chain alphabet size q must be >= 2");
  if (couplings.size() < 3) throw InvalidArgument("chain length N must be >= 3");
  for (double j : couplings) {
    if (!std::isfinite(j) || j < 0.0) throw InvalidArgument("chain couplings must be finite and >= 0");
  }
}

double brute_force_log_z(const PottsModel& model, std::uint64_t limit) {
  const std::size_t n = model.num_sites();
  const int q = model.q();
  check_budget(n, q, limit, "primal enumeration");

  std::vector<Symbol> x(n, 0);
  // The all-zero configuration has the largest weight: every bond agrees and
  // every field is active.
  double shift = 0.0;
  for (double j : model.couplings()) shift += j;
  for (double h : model.fields()) shift += h;

  double lw = shift;
  std::uint64_t steps = 0;
  BlockSum sum;
  gray_enumerate(
      n, q,
      [&](std::size_t v, Symbol delta) {
        const Symbol old = x[v];
        const Symbol now = (old + delta) % Symbol(q);
        for (BondId b : model.incident_bonds(SiteId(v))) {
          const Bond& bond = model.bond(b);
          const Symbol other = x[bond.tail == v ? bond.head : bond.tail];
          lw += model.coupling(b) * (double(now == other) - double(old == other));
        }
        lw += model.field(v) * (double(now == 0) - double(old == 0));
        x[v] = now;
        if (++steps % kResyncPeriod == 0) lw = log_weight(model, x);
      },
      [&] { sum.add(std::exp(lw - shift)); });
  return log_of(sum.total(), shift);
}

double brute_force_log_zd(const PottsModel& model, const DualPartition& partition,
                          std::uint64_t limit) {
  check_compatible(model, partition);
  DualWalker walker(model, partition);
  check_budget(walker.num_free(), model.q(), limit, "dual enumeration");
  const double shift = walker.zero_log_a() + walker.zero_log_b();
  BlockSum sum;
  gray_enumerate(
      walker.num_free(), model.q(), [&](std::size_t i, Symbol d) { walker.shift(i, d); },
      [&] { sum.add(std::exp(walker.log_a() + walker.log_b() - shift)); });
  return log_of(sum.total(), shift);
}

double exact_chi_squared(const PottsModel& model, const DualPartition& partition,
                         Method proposal, std::uint64_t limit) {
  check_compatible(model, partition);
  if (model.has_field()) throw Unsupported("exact chi-squared is implemented for field-free models");
  if (proposal == Method::annealed) {
    throw InvalidArgument("exact chi-squared proposal must be importance or uniform");
  }
  DualWalker walker(model, partition);
  check_budget(walker.num_free(), model.q(), limit, "dual enumeration");
  const bool importance = proposal == Method::importance;
  const double za = walker.zero_log_a();
  const double zb = walker.zero_log_b();
  const double shift_z = za + zb;
  // importance: sum Gamma_A Gamma_B^2; uniform: sum (Gamma_A Gamma_B)^2.
  const double shift_m = importance ? za + 2.0 * zb : 2.0 * (za + zb);
  BlockSum z, m;
  gray_enumerate(
      walker.num_free(), model.q(), [&](std::size_t i, Symbol d) { walker.shift(i, d); },
      [&] {
        const double a = walker.log_a();
        const double b = walker.log_b();
        z.add(std::exp(a + b - shift_z));
        m.add(std::exp((importance ? a + 2.0 * b : 2.0 * (a + b)) - shift_m));
      });
  const double log_zd = log_of(z.total(), shift_z);
  const double log_moment = log_of(m.total(), shift_m);
  const double log_norm = importance
                              ? log_z_qd(model, partition)
                              : double(walker.num_free()) * std::log(double(model.q()));
  // sum p^2 / proposal = norm * moment / Z_d^2
  return std::max(0.0, std::expm1(log_norm + log_moment - 2.0 * log_zd));
}

double chain_log_z(const Chain1D& chain) {
  chain.validate();
  const int q = chain.q;
  double log_all = 0.0;
  double log_cycle = 0.0;
  for (double j : chain.couplings) {
    log_all += log_dual_edge_factor(q, j, 0);
    log_cycle += log_dual_edge_factor(q, j, 1);
  }
  // Z = prod(e^J + q - 1) + (q - 1) prod(e^J - 1): the zero sequence plus the
  // q - 1 constant nonzero sequences of the dual chain.
  return log_all + std::log1p((q - 1) * std::exp(log_cycle - log_all));
}

double chain_brute_force_log_z(const Chain1D& chain, std::uint64_t limit) {
  chain.validate();
  const std::size_t n = chain.size();
  const int q = chain.q;
  check_budget(n, q, limit, "chain enumeration");
  double shift = 0.0;
  for (double j : chain.couplings) shift += j;
  std::vector<int> x(n, 0);
  BlockSum sum;
  for (;;) {
    double lw = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (x[k] == x[(k + 1) % n]) lw += chain.couplings[k];
    }
    sum.add(std::exp(lw - shift));
    std::size_t k = 0;
    while (k < n && ++x[k] == q) x[k++] = 0;
    if (k == n) break;
  }
  return log_of(sum.total(), shift);
}

}  // namespace dualpotts
