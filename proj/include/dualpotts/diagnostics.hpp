#pragma once

#include <cstdint>
#include <limits>

#include "dualpotts/dual_graph.hpp"
#include "dualpotts/model.hpp"

namespace dualpotts {

/// Streaming statistics of log-weights w_l.
///
/// Keeps sum exp(w - m) and sum exp(2 (w - m)) relative to the running
/// maximum m, so nothing overflows however large the weights get. Weights of
/// -inf count as samples with zero weight.
class WeightAccumulator {
 public:
  void add(double log_w);
  void merge(const WeightAccumulator& other);

  std::uint64_t count() const { return count_; }
  double max_log_weight() const { return max_; }

  /// ln( (1/n) sum w )
  double log_mean() const;
  /// ln( (1/n) sum w^2 )
  double log_second_moment() const;
  /// ln( sum w )
  double log_sum() const;

 private:
  friend double ess(const WeightAccumulator&);
  friend double empirical_chi2(const WeightAccumulator&);

  std::uint64_t count_ = 0;
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;     // sum exp(w - max)
  double sum_sq_ = 0.0;  // sum exp(2 (w - max))
};

/// (sum w)^2 / sum w^2, in [1, count]; 0 when every weight is zero.
double ess(const WeightAccumulator& acc);

/// n sum w^2 / (sum w)^2 - 1: empirical chi-squared divergence between target
/// and proposal, i.e. the L-scaled relative variance of the estimator.
double empirical_chi2(const WeightAccumulator& acc);

/// |ref - estimate| / ref for a positive reference ln Z.
double relative_error(double log_z_hat, double log_z_ref);

/// Dual weight of a configuration split as ln S + sum over nonzero bonds of
/// ln((e^J - 1)/(e^J + q - 1)), with S = prod_k (e^{J_k} + q - 1). Field-free
/// models only. Equals ln Gamma_A + ln Gamma_B.
struct NormalizedDualWeight {
  double log_scale;
  double log_normalized;
  double total() const { return log_scale + log_normalized; }
};
NormalizedDualWeight normalized_dual_weight(const PottsModel& model,
                                            const DualConfiguration& config);

}  // namespace dualpotts
