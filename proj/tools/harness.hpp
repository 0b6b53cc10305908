#pragma once

// Experiment driver on top of the C API: model/partition setup, estimate and
// exact runs, coupling sweeps against the brute-force oracle, CSV/JSON output.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualpotts/dualpotts.h"

namespace harness {

class Error : public std::runtime_error {
 public:
  Error(dp_status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  dp_status status() const { return status_; }

 private:
  dp_status status_;
};

/// Throws Error carrying dp_last_error() unless status is DP_OK.
void check(dp_status status);

struct ModelDeleter {
  void operator()(dp_model* m) const { dp_model_destroy(m); }
};
struct PartitionDeleter {
  void operator()(dp_partition* p) const { dp_partition_destroy(p); }
};
using Model = std::unique_ptr<dp_model, ModelDeleter>;
using Partition = std::unique_ptr<dp_partition, PartitionDeleter>;

/// Parsed value spec. Explicit values live in `values`; call c_spec() to view
/// it through the C struct (valid while this object lives).
struct ValuesSpec {
  dp_values_kind kind = DP_VALUES_CONSTANT;
  double value = 0.0;
  std::vector<double> values;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t seed = 0;

  dp_values_spec c_spec() const;
  std::string to_string() const;
};

/// "1.5", "const:1.5", "uniform:lo,hi[:seed]" or "list:a,b,c". A uniform spec
/// without its own seed takes `default_seed`.
ValuesSpec parse_values(const std::string& text, std::uint64_t default_seed = 0);

enum class PartitionSource { max_coupling, comb, file };
PartitionSource parse_partition_source(const std::string& text);

struct ModelSource {
  int width = 3;
  int height = 3;
  int q = 3;
  std::string coupling = "const:1";
  /// Couplings for the spanning-tree side. When set (and no model file is
  /// given), `coupling` applies to the co-tree side only and the partition is
  /// chosen on a constant-coupling model, independent of the drawn values.
  std::optional<std::string> tree_coupling;
  std::string field = "const:0";
  /// Seed for uniform value specs without an explicit seed.
  std::uint64_t model_seed = 0;
  std::optional<std::string> model_file;
  PartitionSource partition = PartitionSource::max_coupling;
  std::optional<std::string> partition_file;
};

struct Setup {
  Model model;
  Partition partition;
};

/// Builds the model and the partition, then applies any per-side couplings.
Setup build_setup(const ModelSource& source);

struct SamplerOptions {
  dp_method method = DP_METHOD_IMPORTANCE;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Explicit exponents "1,1.5,2", or "geometric:V" (alpha_max chosen so the
  /// weakest tree coupling reaches `alpha_target`), or "geometric:amax:V".
  std::string alphas = "geometric:10";
  double alpha_target = 4.0;
  int sweeps_per_level = 5;
  std::uint64_t stride = 0;
};

/// Resolves SamplerOptions::alphas for a concrete model and partition.
std::vector<double> resolve_alphas(const SamplerOptions& options, const dp_model* model,
                                   const dp_partition* partition);

struct EstimateRun {
  dp_estimate estimate{};
  std::vector<dp_trace_point> trace;
  std::vector<double> alphas;
  double wall_seconds = 0.0;
};

EstimateRun run_estimator(const dp_model* model, const dp_partition* partition,
                          const SamplerOptions& options);

/// JSON document with every estimate field plus provenance (model fingerprint,
/// partition, library version, wall time).
std::string estimate_json(const dp_model* model, const dp_partition* partition,
                          const SamplerOptions& options, const EstimateRun& run);

/// "# dualpotts-trace v1" header comment, then samples,log_z_per_site,ess rows.
std::string trace_csv(const std::vector<dp_trace_point>& trace);

/// Exact references for a small model: ln Z, ln Z_d, and the exact chi-squared
/// of both proposals when defined. Entries beyond the guard are reported as
/// skipped with the reason.
std::string exact_json(const dp_model* model, const dp_partition* partition,
                       std::uint64_t limit = 0);

enum class SweepAxis {
  constant,  // every bond J = axis value
  mixed,     // co-tree J = axis value, tree J = fixed_tree_coupling
  field      // as mixed, plus H = field_value on every site
};
SweepAxis parse_sweep_axis(const std::string& text);
const char* to_string(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::constant;
  std::vector<double> values;
  int width = 3;
  int height = 3;
  int q = 3;
  double fixed_tree_coupling = 2.0;
  double field_value = 0.1;
  std::vector<dp_method> methods{DP_METHOD_IMPORTANCE, DP_METHOD_UNIFORM};
  std::uint64_t samples = 100000;
  int repetitions = 10;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct SweepRow {
  double axis_value;
  dp_method method;
  int repetitions;
  std::uint64_t samples;
  double log_z_exact;
  double median_rel_error;
  double q1_rel_error;
  double q3_rel_error;
  double mean_rel_error;
  double median_ess;
  double median_chi2;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> notes;
};

/// For each axis value and method, R repetitions (repetition r uses seed + r)
/// scored by relative error against the brute-force ln Z.
SweepResult run_sweep(const SweepSpec& spec);

/// Versioned header comment, notes as comments, then one row per SweepRow.
std::string sweep_csv(const SweepSpec& spec, const SweepResult& result);

/// Chain closed form, plus brute force when within the guard.
std::string chain_json(int q, const std::vector<double>& couplings, std::uint64_t limit = 0);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace harness
