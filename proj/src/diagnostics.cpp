#include "dualpotts/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "dualpotts/errors.hpp"

namespace dualpotts {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void WeightAccumulator::add(double log_w) {
  if (std::isnan(log_w) || log_w == std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("log-weight must be finite or -inf");
  }
  ++count_;
  if (log_w == kNegInf) return;
  if (log_w > max_) {
    const double scale = std::exp(max_ - log_w);  // 0 when max_ is -inf
    sum_ *= scale;
    sum_sq_ *= scale * scale;
    max_ = log_w;
  }
  const double r = std::exp(log_w - max_);
  sum_ += r;
  sum_sq_ += r * r;
}

void WeightAccumulator::merge(const WeightAccumulator& other) {
  count_ += other.count_;
  if (other.max_ == kNegInf) return;
  if (max_ == kNegInf) {
    max_ = other.max_;
    sum_ = other.sum_;
    sum_sq_ = other.sum_sq_;
    return;
  }
  const double m = std::max(max_, other.max_);
  const double a = std::exp(max_ - m);
  const double b = std::exp(other.max_ - m);
  sum_ = sum_ * a + other.sum_ * b;
  sum_sq_ = sum_sq_ * a * a + other.sum_sq_ * b * b;
  max_ = m;
}

double WeightAccumulator::log_sum() const {
  if (count_ == 0) throw InvalidArgument("empty accumulator");
  if (max_ == kNegInf) return kNegInf;
  return max_ + std::log(sum_);
}

double WeightAccumulator::log_mean() const {
  return log_sum() - std::log(double(count_));
}

double WeightAccumulator::log_second_moment() const {
  if (count_ == 0) throw InvalidArgument("empty accumulator");
  if (max_ == kNegInf) return kNegInf;
  return 2.0 * max_ + std::log(sum_sq_) - std::log(double(count_));
}

double ess(const WeightAccumulator& acc) {
  if (acc.count_ == 0) throw InvalidArgument("ess of an empty accumulator");
  if (acc.max_ == kNegInf) return 0.0;
  const double e = acc.sum_ * acc.sum_ / acc.sum_sq_;
  return std::clamp(e, 1.0, double(acc.count_));
}

double empirical_chi2(const WeightAccumulator& acc) {
  if (acc.count_ < 2) throw InvalidArgument("empirical chi2 needs at least two samples");
  if (acc.max_ == kNegInf) throw InvalidArgument("empirical chi2 undefined: all weights zero");
  const double c = double(acc.count_) * acc.sum_sq_ / (acc.sum_ * acc.sum_) - 1.0;
  return std::max(c, 0.0);
}

double relative_error(double log_z_hat, double log_z_ref) {
  if (!(log_z_ref > 0.0)) throw InvalidArgument("reference ln Z must be positive");
  return std::abs(log_z_ref - log_z_hat) / log_z_ref;
}

NormalizedDualWeight normalized_dual_weight(const PottsModel& model,
                                            const DualConfiguration& config) {
  if (model.has_field()) throw Unsupported("normalized dual weight is field-free only");
  if (config.bond_values.size() != model.num_bonds()) {
    throw InvalidArgument("configuration bond count mismatch");
  }
  const int q = model.q();
  NormalizedDualWeight w{0.0, 0.0};
  for (BondId b = 0; b < model.num_bonds(); ++b) {
    const double l0 = log_dual_edge_factor(q, model.coupling(b), 0);
    w.log_scale += l0;
    if (config.bond_values[b] != 0) {
      w.log_normalized += log_dual_edge_factor(q, model.coupling(b), 1) - l0;
    }
  }
  return w;
}

}  // namespace dualpotts
