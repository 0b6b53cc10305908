// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Tolerances, sizes and time budgets are fixed; do not tune them to a run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dualpotts/diagnostics.hpp"
#include "dualpotts/dual_graph.hpp"
#include "dualpotts/estimators.hpp"
#include "dualpotts/model.hpp"
#include "dualpotts/oracles.hpp"
#include "dualpotts/rng.hpp"
#include "support/reference.hpp"

using namespace dualpotts;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

struct Mixed {
  PottsModel model;
  DualPartition partition;
};

// Co-tree bonds get `cotree`, tree bonds get `tree`. The tree is chosen on a
// constant-coupling model so it is independent of the drawn values.
Mixed mixed(int w, int h, int q, const ValueSpec& cotree, const ValueSpec& tree) {
  const auto shape = build_torus_model(w, h, q, ConstantValues{1.0});
  auto p = build_partition(shape, PartitionStrategy::max_coupling);
  const auto a = with_side_couplings(shape, p, Side::A, cotree);
  return {with_side_couplings(a, p, Side::B, tree), p};
}

double median_rel_error(const PottsModel& m, const DualPartition& p, Method method,
                        std::uint64_t samples, int reps, double exact) {
  std::vector<double> errs;
  for (int r = 0; r < reps; ++r) {
    SamplerSpec s;
    s.method = method;
    s.samples = samples;
    s.seed = std::uint64_t(r);
    errs.push_back(relative_error(estimate(m, p, s).log_z_hat, exact));
  }
  return median(errs);
}

Outcome c1_duality() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = build_torus_model(3, 3, 3, UniformValues{0.0, 3.0, seed});
    const auto p = build_partition(m, PartitionStrategy::max_coupling);
    const double gap = brute_force_log_zd(m, p) - brute_force_log_z(m);
    worst = std::max(worst, std::abs(gap - 9 * std::log(3.0)));
  }
  return {worst <= 1e-9, "20 models, max |lnZd - lnZ - 9 ln3| = " + fmt("%.2e", worst)};
}

Outcome c2_chain() {
  Rng rng = make_stream(2024, StreamTag::couplings, 0);
  double worst = 0.0;
  for (int q : {2, 3, 4}) {
    for (std::size_t n = 3; n <= 8; ++n) {
      Chain1D c{q, std::vector<double>(n)};
      for (auto& j : c.couplings) j = 3.0 * uniform01(rng);
      const double exact = chain_brute_force_log_z(c);
      worst = std::max(worst, std::abs(chain_log_z(c) - exact) / std::abs(exact));
    }
  }
  const double small = chain_log_z(Chain1D{3, {1.0, 1.0, 1.0}});
  const double gap = std::abs(small - std::log(115.186));
  return {worst <= 1e-10 && gap <= 1e-3,
          "max rel gap " + fmt("%.2e", worst) + ", |lnZ(N=3,J=1,q=3) - ln 115.186| = " +
              fmt("%.2e", gap)};
}

Outcome c3_zero_coupling() {
  bool ok = true;
  std::ostringstream detail;
  int grids = 0;
  for (int w : {3, 4}) {
    for (int h : {3, 4}) {
      for (int q : {2, 3, 4}) {
        const auto m = build_torus_model(w, h, q, ConstantValues{0.0});
        const auto p = build_partition(m, PartitionStrategy::max_coupling);
        const double n = double(m.num_sites());
        // Per-sample weights drawn through the proposal.
        Rng rng = make_stream(5, StreamTag::sampling, 0);
        const auto first = log_gamma_product(
            m, p, complete_configuration(p, m, draw_cotree_values(m, p, rng)), Side::B);
        for (int i = 0; i < 2000; ++i) {
          const auto c = complete_configuration(p, m, draw_cotree_values(m, p, rng));
          if (log_gamma_product(m, p, c, Side::B) != first) ok = false;
        }
        const double expected = 2 * n * std::log(double(q));
        if (std::abs(log_z_qd(m, p) + first - expected) > 1e-12 * expected) ok = false;
        SamplerSpec s;
        s.samples = 5000;
        s.seed = 1;
        const auto r = estimate_importance(m, p, s);
        if (r.chi2_hat != 0.0 || r.ess != double(s.samples)) ok = false;
        if (std::abs(r.log_zd_hat - expected) > 1e-12 * expected) ok = false;
        ++grids;
      }
    }
  }
  detail << grids << " grid/q cases: equal weights, chi2 = 0, ess = L, Z_IS = q^{2N}";
  return {ok, detail.str()};
}

Outcome c4_constant_sweep() {
  const std::vector<double> js{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> med;
  for (double j : js) {
    const auto m = build_torus_model(3, 3, 3, ConstantValues{j});
    const auto p = build_partition(m, PartitionStrategy::max_coupling);
    med.push_back(median_rel_error(m, p, Method::importance, 100000, 10, brute_force_log_z(m)));
  }
  bool ok = true;
  std::string detail = "IS medians:";
  for (std::size_t i = 0; i < js.size(); ++i) {
    detail += fmt(" %.2e", med[i]);
    if (i > 0 && med[i] > med[i - 1]) ok = false;
    if (js[i] >= 1.5 && med[i] >= 1e-3) ok = false;
  }
  return {ok, detail};
}

Outcome c5_mixed_sweep() {
  std::string detail;
  bool ok = true;
  for (double ja : {0.5, 1.0, 1.5}) {
    const auto x = mixed(3, 3, 3, ConstantValues{ja}, ConstantValues{2.0});
    const double exact = brute_force_log_z(x.model);
    const double is = median_rel_error(x.model, x.partition, Method::importance, 100000, 10, exact);
    const double un = median_rel_error(x.model, x.partition, Method::uniform, 100000, 10, exact);
    detail += fmt(detail.empty() ? "J_A=%.1f:" : " J_A=%.1f:", ja) + fmt(" IS %.2e", is) + fmt(" unif %.2e;", un);
    if (ja == 0.5) {
      ok = is * 10.0 <= un;
      detail += fmt(" ratio %.1f;", un / is);
    }
  }
  return {ok, detail};
}

Outcome c6_variance_law() {
  std::vector<double> chi;
  bool ok = true;
  std::string detail = "exact chi2:";
  for (double jb : {1.0, 2.0, 3.0, 4.0}) {
    const auto x = mixed(3, 3, 3, ConstantValues{1.0}, ConstantValues{jb});
    chi.push_back(exact_chi_squared(x.model, x.partition, Method::importance));
    detail += fmt(" %.4g", chi.back());
    if (chi.size() > 1 && !(chi.back() < chi[chi.size() - 2])) ok = false;
  }
  const auto x = mixed(3, 3, 3, ConstantValues{1.0}, ConstantValues{2.0});
  SamplerSpec s;
  s.samples = 1000000;
  s.seed = 6;
  const double emp = estimate_importance(x.model, x.partition, s).chi2_hat;
  const double gap = std::abs(emp - chi[1]) / chi[1];
  ok = ok && gap <= 0.05;
  detail += fmt("; empirical at J_B=2 %.4g", emp) + fmt(" (rel gap %.3f)", gap);
  return {ok, detail};
}

Outcome c7_field() {
  const auto m = build_torus_model(3, 3, 3, ConstantValues{2.0}, ConstantValues{0.1});
  const auto p = build_partition(m, PartitionStrategy::max_coupling);
  const double exact = brute_force_log_z(m);
  SamplerSpec s;
  s.samples = 1000000;
  s.seed = 7;
  const double err = relative_error(estimate_importance(m, p, s).log_z_hat, exact);

  // Sign of the last site value: the completed configuration must satisfy
  // every constraint, and the opposite sign must be caught as invalid.
  Rng rng = make_stream(77, StreamTag::sampling, 0);
  const std::uint32_t q = 3;
  const std::size_t n = m.num_sites();
  int correct_valid = 0, wrong_caught = 0, wrong_cases = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto xa = draw_cotree_values(m, p, rng);
    const auto y = draw_site_values(m, rng);
    auto c = complete_configuration(p, m, xa, y);
    if (is_valid(p, 3, c)) ++correct_valid;
    std::uint32_t sum = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) sum = (sum + c.site_values[k]) % q;
    if (c.site_values[n - 1] != (q - sum) % q) continue;
    if (sum == (q - sum) % q) continue;
    ++wrong_cases;
    c.site_values[n - 1] = sum;
    if (!is_valid(p, 3, c)) ++wrong_caught;
  }
  // The dual sum over valid configurations must reproduce q^N Z.
  const double gap = std::abs(brute_force_log_zd(m, p) - exact - 9 * std::log(3.0));
  const bool ok = err <= 0.01 && correct_valid == 10000 && wrong_cases > 0 &&
                  wrong_caught == wrong_cases && gap <= 1e-9;
  return {ok, fmt("rel error %.2e", err) + fmt("; valid %.0f/10000", correct_valid) +
                  fmt("; wrong sign caught %.0f", wrong_caught) +
                  fmt("/%.0f", wrong_cases) + fmt("; |lnZd - lnZ - 9 ln3| = %.1e", gap)};
}

Outcome c8_annealed() {
  const auto x = mixed(3, 3, 3, ConstantValues{0.5}, ConstantValues{1.3});
  const double exact = brute_force_log_z(x.model);
  SamplerSpec s;
  s.method = Method::annealed;
  s.samples = 10000;
  s.seed = 8;
  s.schedule = AnnealSchedule::geometric(AnnealSchedule::alpha_reaching(1.3, 4.0), 10, 5);
  const double err = relative_error(estimate_annealed(x.model, x.partition, s).log_z_hat, exact);

  // V = 0 against plain IS on disjoint seeds.
  std::vector<double> a, b;
  for (int r = 0; r < 50; ++r) {
    SamplerSpec v0;
    v0.method = Method::annealed;
    v0.samples = 10000;
    v0.seed = 1000 + std::uint64_t(r);
    v0.schedule = AnnealSchedule{};
    a.push_back(estimate_annealed(x.model, x.partition, v0).log_z_hat);
    SamplerSpec is;
    is.samples = 10000;
    is.seed = 2000 + std::uint64_t(r);
    b.push_back(estimate_importance(x.model, x.partition, is).log_z_hat);
  }
  auto mean_var = [](const std::vector<double>& v) {
    double mu = 0.0;
    for (double t : v) mu += t;
    mu /= double(v.size());
    double var = 0.0;
    for (double t : v) var += (t - mu) * (t - mu);
    return std::pair{mu, var / double(v.size() - 1)};
  };
  const auto [ma, va] = mean_var(a);
  const auto [mb, vb] = mean_var(b);
  const double se = std::sqrt(va / 50 + vb / 50);
  const double z = std::abs(ma - mb) / se;
  return {err <= 0.01 && z <= 3.0, fmt("AIS rel error %.2e", err) +
                                       fmt("; V=0 vs IS mean gap %.2f SE", z)};
}

Outcome large_grid(double tree_lo, double tree_hi, double target) {
  const auto x = mixed(30, 30, 4, UniformValues{0.75, 2.25, 0}, UniformValues{tree_lo, tree_hi, 0});
  SamplerSpec s;
  s.samples = 10000;
  s.seed = 0;
  s.trace_stride = 100;
  const auto r = estimate_importance(x.model, x.partition, s);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& t : r.trace) {
    if (2 * t.samples < s.samples) continue;
    lo = std::min(lo, t.log_z_per_site);
    hi = std::max(hi, t.log_z_per_site);
  }
  double sum_j = 0.0;
  for (double j : x.model.couplings()) sum_j += j;
  const double spread = hi - lo;
  const bool ok = spread < 0.005 && std::abs(r.log_z_per_site - target) <= 0.05;
  return {ok, fmt("J_B~U[%.2f,", tree_lo) + fmt("%.2f]: ", tree_hi) +
                  fmt("lnZ/N %.4f", r.log_z_per_site) + fmt(" (target %.2f", target) +
                  fmt(" +- 0.05, sum J / N = %.4f)", sum_j / 900.0) +
                  fmt(", last-half spread %.1e", spread)};
}

Outcome c10_determinism() {
  const auto x = mixed(3, 3, 3, UniformValues{0.2, 1.5, 10}, UniformValues{1.5, 3.0, 10});
  bool ok = true;
  int runs = 0;
  for (Method method : {Method::importance, Method::uniform, Method::annealed}) {
    for (unsigned workers : {1u, 3u}) {
      SamplerSpec s;
      s.method = method;
      s.samples = method == Method::annealed ? 2000 : 20000;
      s.seed = 42;
      s.workers = workers;
      s.trace_stride = 1000;
      if (method == Method::annealed) s.schedule = AnnealSchedule::geometric(2.0, 4, 2);
      const auto base = estimate(x.model, x.partition, s);
      ok = ok && base == estimate(x.model, x.partition, s);
      for (BondId b = 0; b < x.model.num_bonds(); ++b) {
        ok = ok && base == estimate(x.model, x.partition.with_flipped_orientation(b), s);
        ++runs;
      }
    }
  }
  return {ok, std::to_string(runs) + " flipped runs over 3 methods x {1,3} workers, repeat runs identical"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"C1", "duality identity", 30, c1_duality},
      {"C2", "1D closed form", 5, c2_chain},
      {"C3", "zero coupling, zero variance", 1, c3_zero_coupling},
      {"C4", "constant-J sweep", 120, c4_constant_sweep},
      {"C5", "importance vs uniform", 120, c5_mixed_sweep},
      {"C6", "variance law", 180, c6_variance_law},
      {"C7", "external field", 60, c7_field},
      {"C8", "annealed importance sampling", 180, c8_annealed},
      {"C9a", "large grid, J_B~U[3.25,4.25]", 120, [] { return large_grid(3.25, 4.25, 5.22); }},
      {"C9b", "large grid, J_B~U[2.25,3.25]", 120, [] { return large_grid(2.25, 3.25, 4.22); }},
      {"C10", "determinism and orientation invariance", 60, c10_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("[%s] %s %s: %s [%.1f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures ? 1 : 0;
}
