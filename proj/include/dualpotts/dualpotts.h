#ifndef DUALPOTTS_H
#define DUALPOTTS_H

#include <stddef.h>
#include <stdint.h>

#if defined(DUALPOTTS_BUILDING)
#define DP_API __attribute__((visibility("default")))
#else
#define DP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Dual-domain Monte Carlo estimation of 2D Potts partition functions.
 *
 * Every fallible call returns a dp_status. On failure, dp_last_error() holds a
 * message for the calling thread until its next failing call. Strings handed
 * out through char** parameters are owned by the caller and released with
 * dp_string_free(). Handles are immutable and may be shared across threads.
 */

typedef enum dp_status {
  DP_OK = 0,
  DP_ERR_INVALID_ARGUMENT = 1,
  DP_ERR_GUARD_EXCEEDED = 2,
  DP_ERR_UNSUPPORTED = 3,
  DP_ERR_IO = 4,
  DP_ERR_PARSE = 5,
  DP_ERR_INTERNAL = 6
} dp_status;

typedef struct dp_model dp_model;
typedef struct dp_partition dp_partition;

DP_API const char* dp_last_error(void);
DP_API const char* dp_status_name(dp_status status);
/* git describe of the build, e.g. "v0.1-3-gabc1234". */
DP_API const char* dp_version(void);
DP_API void dp_string_free(char* s);

/* ---- model ------------------------------------------------------------ */

typedef enum dp_values_kind {
  DP_VALUES_CONSTANT = 0,
  DP_VALUES_EXPLICIT = 1,
  DP_VALUES_UNIFORM = 2
} dp_values_kind;

/* Couplings per bond or fields per site. CONSTANT uses `value`; EXPLICIT
 * uses `values`/`count`; UNIFORM draws from [lo, hi] on a sub-stream of `seed`. */
typedef struct dp_values_spec {
  dp_values_kind kind;
  double value;
  const double* values;
  size_t count;
  double lo;
  double hi;
  uint64_t seed;
} dp_values_spec;

typedef struct dp_model_info {
  int width;
  int height;
  int q;
  size_t num_sites;
  size_t num_bonds;
  int has_field;
  uint64_t fingerprint;
} dp_model_info;

/* `fields` may be NULL for a field-free model. */
DP_API dp_status dp_model_create(int width, int height, int q, const dp_values_spec* couplings,
                                 const dp_values_spec* fields, dp_model** out);
DP_API dp_status dp_model_from_json(const char* text, dp_model** out);
DP_API dp_status dp_model_to_json(const dp_model* model, char** out);
DP_API void dp_model_destroy(dp_model* model);
DP_API dp_status dp_model_info_get(const dp_model* model, dp_model_info* out);
/* Copies min(capacity, num_bonds) couplings in canonical bond order. */
DP_API dp_status dp_model_couplings(const dp_model* model, double* out, size_t capacity);
DP_API dp_status dp_model_hamiltonian(const dp_model* model, const uint32_t* x, size_t n,
                                      double* out);
DP_API dp_status dp_model_log_weight(const dp_model* model, const uint32_t* x, size_t n,
                                     double* out);

/* ---- dual graph ------------------------------------------------------- */

typedef enum dp_partition_strategy {
  DP_PARTITION_MAX_COUPLING = 0,
  DP_PARTITION_COMB = 1
} dp_partition_strategy;

typedef enum dp_side { DP_SIDE_A = 0, DP_SIDE_B = 1 } dp_side;

DP_API dp_status dp_partition_build(const dp_model* model, dp_partition_strategy strategy,
                                    dp_partition** out);
DP_API dp_status dp_partition_from_tree(int width, int height, const uint32_t* tree_bonds,
                                        size_t count, uint32_t root, dp_partition** out);
DP_API dp_status dp_partition_from_json(const char* text, dp_partition** out);
DP_API dp_status dp_partition_to_json(const dp_partition* partition, char** out);
DP_API void dp_partition_destroy(dp_partition* partition);
/* New partition with bond `bond`'s orientation reversed. */
DP_API dp_status dp_partition_flip(const dp_partition* partition, uint32_t bond,
                                   dp_partition** out);
/* Writes up to `capacity` ids; `count` receives the full size. */
DP_API dp_status dp_partition_tree_bonds(const dp_partition* partition, uint32_t* out,
                                         size_t capacity, size_t* count);
DP_API dp_status dp_partition_cotree_bonds(const dp_partition* partition, uint32_t* out,
                                           size_t capacity, size_t* count);

/* Copy of `model` whose couplings on one side of `partition` follow `spec`
 * (EXPLICIT values are listed in side order). */
DP_API dp_status dp_model_with_side_couplings(const dp_model* model,
                                              const dp_partition* partition, dp_side side,
                                              const dp_values_spec* spec, dp_model** out);

DP_API dp_status dp_dual_edge_factor(int q, double coupling, uint32_t t, double* out);
DP_API dp_status dp_log_dual_edge_factor(int q, double coupling, uint32_t t, double* out);
DP_API dp_status dp_dual_field_factor(int q, double field, uint32_t t, double* out);
DP_API dp_status dp_log_dual_field_factor(int q, double field, uint32_t t, double* out);
DP_API dp_status dp_duality_scale(const dp_model* model, double* out);
DP_API dp_status dp_log_z_qd(const dp_model* model, const dp_partition* partition, double* out);

/* ---- estimators ------------------------------------------------------- */

typedef enum dp_method {
  DP_METHOD_IMPORTANCE = 0,
  DP_METHOD_UNIFORM = 1,
  DP_METHOD_ANNEALED = 2
} dp_method;

DP_API dp_status dp_method_parse(const char* name, dp_method* out);
DP_API const char* dp_method_name(dp_method method);

/* `alphas` is required for ANNEALED and must be NULL otherwise. */
typedef struct dp_sampler_spec {
  dp_method method;
  uint64_t samples;
  uint64_t seed;
  unsigned workers;
  const double* alphas;
  size_t num_alphas;
  int sweeps_per_level;
  uint64_t trace_stride;
} dp_sampler_spec;

/* importance, 100000 samples, seed 0, one worker, 5 sweeps per level. */
DP_API void dp_sampler_spec_init(dp_sampler_spec* spec);

/* alpha_v = alpha_max^(v / levels); writes levels + 1 values. */
DP_API dp_status dp_anneal_geometric(double alpha_max, int levels, double* alphas_out);
/* Smallest alpha with min_tree_coupling^alpha >= target. */
DP_API dp_status dp_anneal_alpha_reaching(double min_tree_coupling, double target, double* out);

typedef struct dp_estimate {
  dp_method method;
  uint64_t samples;
  uint64_t seed;
  unsigned workers;
  double log_zd_hat;
  double log_z_hat;
  double log_z_per_site;
  double log_proposal_norm;
  double log_weight_mean;
  double log_weight_second_moment;
  double ess;
  double chi2_hat;
  size_t trace_length;
} dp_estimate;

typedef struct dp_trace_point {
  uint64_t samples;
  double log_z_per_site;
  double ess;
} dp_trace_point;

typedef void (*dp_trace_fn)(const dp_trace_point* point, void* user);

/* Runs the estimator. Trace points, if any, are delivered in order to
 * `on_trace` (may be NULL) after sampling completes. */
DP_API dp_status dp_estimate_run(const dp_model* model, const dp_partition* partition,
                                 const dp_sampler_spec* spec, dp_estimate* out,
                                 dp_trace_fn on_trace, void* user);

/* ---- oracles and diagnostics ------------------------------------------ */

/* `limit` caps the number of enumerated terms; 0 selects the default 2^29. */
DP_API dp_status dp_brute_force_log_z(const dp_model* model, uint64_t limit, double* out);
DP_API dp_status dp_brute_force_log_zd(const dp_model* model, const dp_partition* partition,
                                       uint64_t limit, double* out);
DP_API dp_status dp_exact_chi_squared(const dp_model* model, const dp_partition* partition,
                                      dp_method proposal, uint64_t limit, double* out);
DP_API dp_status dp_chain_log_z(int q, const double* couplings, size_t n, double* out);
DP_API dp_status dp_chain_brute_force_log_z(int q, const double* couplings, size_t n,
                                            uint64_t limit, double* out);
DP_API dp_status dp_relative_error(double log_z_hat, double log_z_ref, double* out);

#ifdef __cplusplus
}
#endif

#endif
