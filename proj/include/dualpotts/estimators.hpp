#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualpotts/dual_graph.hpp"
#include "dualpotts/model.hpp"
#include "dualpotts/rng.hpp"

namespace dualpotts {

enum class Method { importance, uniform, annealed };

std::string to_string(Method m);
Method method_from_string(std::string_view s);

/// Exponents 1 = alpha_0 < alpha_1 < ... < alpha_V applied to the tree-bond
/// couplings, J_k -> J_k^alpha. Level V is sampled directly; the kernels walk
/// back down to the target at level 0.
struct AnnealSchedule {
  std::vector<double> alphas{1.0};
  int sweeps_per_level = 5;

  /// alpha_v = alpha_max^(v / levels), v = 0..levels.
  static AnnealSchedule geometric(double alpha_max, int levels, int sweeps_per_level = 5);
  /// Smallest alpha_max with min_tree_coupling^alpha_max >= target_coupling.
  static double alpha_reaching(double min_tree_coupling, double target_coupling);
  void validate() const;
  std::size_t levels() const { return alphas.size() - 1; }
};

struct SamplerSpec {
  Method method = Method::importance;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::optional<AnnealSchedule> schedule;
  /// Record a running estimate every `trace_stride` samples (0 disables).
  std::uint64_t trace_stride = 0;
};

struct TracePoint {
  std::uint64_t samples;
  double log_z_per_site;
  double ess;

  bool operator==(const TracePoint&) const = default;
};

struct EstimateResult {
  Method method = Method::importance;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double log_zd_hat = 0.0;
  double log_z_hat = 0.0;
  double log_z_per_site = 0.0;
  /// ln of the proposal normalizer: ln Z_qd, or |B_A| ln q for uniform.
  double log_proposal_norm = 0.0;
  /// ln mean and ln mean-square of the unnormalized per-sample weights.
  double log_weight_mean = 0.0;
  double log_weight_second_moment = 0.0;
  double ess = 0.0;
  double chi2_hat = 0.0;
  std::vector<TracePoint> trace;

  bool operator==(const EstimateResult&) const = default;
};

/// ln Z_qd = sum over co-tree bonds of ln(q e^J), plus sum_{m<N} H_m with a
/// field (each site factor sums to e^H over the alphabet).
double log_z_qd(const PottsModel& model, const DualPartition& partition);

/// Independent draws per co-tree bond: 0 with probability (1 + (q-1) e^-J)/q,
/// otherwise uniform over 1..q-1. Values follow cotree_bonds() order.
std::vector<Symbol> draw_cotree_values(const PottsModel& model, const DualPartition& partition,
                                       Rng& rng);

/// Same rule with H_m in place of J for sites 0..N-2. Requires a field.
std::vector<Symbol> draw_site_values(const PottsModel& model, Rng& rng);

EstimateResult estimate_importance(const PottsModel& model, const DualPartition& partition,
                                   const SamplerSpec& spec);
EstimateResult estimate_uniform(const PottsModel& model, const DualPartition& partition,
                                const SamplerSpec& spec);
EstimateResult estimate_annealed(const PottsModel& model, const DualPartition& partition,
                                 const SamplerSpec& spec);

/// Dispatches on spec.method.
EstimateResult estimate(const PottsModel& model, const DualPartition& partition,
                        const SamplerSpec& spec);

}  // namespace dualpotts
