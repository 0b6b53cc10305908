#include "dualpotts/dualpotts.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "dualpotts/diagnostics.hpp"
#include "dualpotts/dual_graph.hpp"
#include "dualpotts/errors.hpp"
#include "dualpotts/estimators.hpp"
#include "dualpotts/model.hpp"
#include "dualpotts/oracles.hpp"

#ifndef DUALPOTTS_GIT_DESCRIBE
#define DUALPOTTS_GIT_DESCRIBE "unknown"
#endif

using namespace dualpotts;

struct dp_model {
  PottsModel model;
};

struct dp_partition {
  DualPartition partition;
};

namespace {

thread_local std::string last_error;

dp_status fail(dp_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
dp_status guarded(F&& body) {
  try {
    body();
    return DP_OK;
  } catch (const ParseError& e) {
    return fail(DP_ERR_PARSE, e.what());
  } catch (const InvalidArgument& e) {
    return fail(DP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const GuardExceeded& e) {
    return fail(DP_ERR_GUARD_EXCEEDED, e.what());
  } catch (const Unsupported& e) {
    return fail(DP_ERR_UNSUPPORTED, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DP_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw InvalidArgument(std::string(name) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ValueSpec to_spec(const dp_values_spec& s) {
  switch (s.kind) {
    case DP_VALUES_CONSTANT: return ConstantValues{s.value};
    case DP_VALUES_EXPLICIT:
      if (s.values == nullptr && s.count > 0) throw InvalidArgument("explicit values pointer is null");
      return ExplicitValues{std::vector<double>(s.values, s.values + s.count)};
    case DP_VALUES_UNIFORM: return UniformValues{s.lo, s.hi, s.seed};
  }
  throw InvalidArgument("unknown value spec kind");
}

Method to_method(dp_method m) {
  switch (m) {
    case DP_METHOD_IMPORTANCE: return Method::importance;
    case DP_METHOD_UNIFORM: return Method::uniform;
    case DP_METHOD_ANNEALED: return Method::annealed;
  }
  throw InvalidArgument("unknown method");
}

dp_method from_method(Method m) {
  switch (m) {
    case Method::importance: return DP_METHOD_IMPORTANCE;
    case Method::uniform: return DP_METHOD_UNIFORM;
    case Method::annealed: return DP_METHOD_ANNEALED;
  }
  return DP_METHOD_IMPORTANCE;
}

std::uint64_t effective_limit(std::uint64_t limit) {
  return limit == 0 ? kEnumerationLimit : limit;
}

void copy_ids(const std::vector<BondId>& ids, uint32_t* out, size_t capacity, size_t* count) {
  if (count != nullptr) *count = ids.size();
  if (out == nullptr) return;
  const size_t n = std::min(capacity, ids.size());
  std::copy(ids.begin(), ids.begin() + std::ptrdiff_t(n), out);
}

Chain1D make_chain(int q, const double* couplings, size_t n) {
  if (couplings == nullptr && n > 0) throw InvalidArgument("couplings must not be null");
  return Chain1D{q, std::vector<double>(couplings, couplings + n)};
}

}  // namespace

extern "C" {

const char* dp_last_error(void) { return last_error.c_str(); }

const char* dp_status_name(dp_status status) {
  switch (status) {
    case DP_OK: return "ok";
    case DP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DP_ERR_GUARD_EXCEEDED: return "enumeration guard exceeded";
    case DP_ERR_UNSUPPORTED: return "unsupported";
    case DP_ERR_IO: return "i/o error";
    case DP_ERR_PARSE: return "parse error";
    case DP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* dp_version(void) { return DUALPOTTS_GIT_DESCRIBE; }

void dp_string_free(char* s) { std::free(s); }

dp_status dp_model_create(int width, int height, int q, const dp_values_spec* couplings,
                          const dp_values_spec* fields, dp_model** out) {
  return guarded([&] {
    require(couplings, "couplings");
    require(out, "out");
    const ValueSpec f = fields ? to_spec(*fields) : ValueSpec{ConstantValues{0.0}};
    *out = new dp_model{build_torus_model(width, height, q, to_spec(*couplings), f)};
  });
}

dp_status dp_model_from_json(const char* text, dp_model** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new dp_model{model_from_json(text)};
  });
}

dp_status dp_model_to_json(const dp_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = copy_string(model_to_json(model->model));
  });
}

void dp_model_destroy(dp_model* model) { delete model; }

dp_status dp_model_info_get(const dp_model* model, dp_model_info* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const PottsModel& m = model->model;
    *out = dp_model_info{m.width(),     m.height(),          m.q(),
                         m.num_sites(), m.num_bonds(),       m.has_field() ? 1 : 0,
                         model_fingerprint(m)};
  });
}

dp_status dp_model_couplings(const dp_model* model, double* out, size_t capacity) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto j = model->model.couplings();
    std::copy_n(j.begin(), std::min(capacity, j.size()), out);
  });
}

dp_status dp_model_hamiltonian(const dp_model* model, const uint32_t* x, size_t n,
                               double* out) {
  return guarded([&] {
    require(model, "model");
    require(x, "x");
    require(out, "out");
    *out = hamiltonian(model->model, std::span<const Symbol>(x, n));
  });
}

dp_status dp_model_log_weight(const dp_model* model, const uint32_t* x, size_t n,
                              double* out) {
  return guarded([&] {
    require(model, "model");
    require(x, "x");
    require(out, "out");
    *out = log_weight(model->model, std::span<const Symbol>(x, n));
  });
}

dp_status dp_partition_build(const dp_model* model, dp_partition_strategy strategy,
                             dp_partition** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    PartitionStrategy s;
    switch (strategy) {
      case DP_PARTITION_MAX_COUPLING: s = PartitionStrategy::max_coupling; break;
      case DP_PARTITION_COMB: s = PartitionStrategy::comb; break;
      default: throw InvalidArgument("unknown partition strategy");
    }
    *out = new dp_partition{build_partition(model->model, s)};
  });
}

dp_status dp_partition_from_tree(int width, int height, const uint32_t* tree_bonds,
                                 size_t count, uint32_t root, dp_partition** out) {
  return guarded([&] {
    require(out, "out");
    if (tree_bonds == nullptr && count > 0) throw InvalidArgument("tree_bonds must not be null");
    std::vector<BondId> tree(tree_bonds, tree_bonds + count);
    *out = new dp_partition{partition_from_tree(width, height, std::move(tree), root)};
  });
}

dp_status dp_partition_from_json(const char* text, dp_partition** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new dp_partition{partition_from_json(text)};
  });
}

dp_status dp_partition_to_json(const dp_partition* partition, char** out) {
  return guarded([&] {
    require(partition, "partition");
    require(out, "out");
    *out = copy_string(partition_to_json(partition->partition));
  });
}

void dp_partition_destroy(dp_partition* partition) { delete partition; }

dp_status dp_partition_flip(const dp_partition* partition, uint32_t bond, dp_partition** out) {
  return guarded([&] {
    require(partition, "partition");
    require(out, "out");
    *out = new dp_partition{partition->partition.with_flipped_orientation(bond)};
  });
}

dp_status dp_partition_tree_bonds(const dp_partition* partition, uint32_t* out,
                                  size_t capacity, size_t* count) {
  return guarded([&] {
    require(partition, "partition");
    copy_ids(partition->partition.tree_bonds(), out, capacity, count);
  });
}

dp_status dp_partition_cotree_bonds(const dp_partition* partition, uint32_t* out,
                                    size_t capacity, size_t* count) {
  return guarded([&] {
    require(partition, "partition");
    copy_ids(partition->partition.cotree_bonds(), out, capacity, count);
  });
}

dp_status dp_model_with_side_couplings(const dp_model* model, const dp_partition* partition,
                                       dp_side side, const dp_values_spec* spec,
                                       dp_model** out) {
  return guarded([&] {
    require(model, "model");
    require(partition, "partition");
    require(spec, "spec");
    require(out, "out");
    const Side s = side == DP_SIDE_A ? Side::A : Side::B;
    *out = new dp_model{
        with_side_couplings(model->model, partition->partition, s, to_spec(*spec))};
  });
}

dp_status dp_dual_edge_factor(int q, double coupling, uint32_t t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = dual_edge_factor(q, coupling, t);
  });
}

dp_status dp_log_dual_edge_factor(int q, double coupling, uint32_t t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = log_dual_edge_factor(q, coupling, t);
  });
}

dp_status dp_dual_field_factor(int q, double field, uint32_t t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = dual_field_factor(q, field, t);
  });
}

dp_status dp_log_dual_field_factor(int q, double field, uint32_t t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = log_dual_field_factor(q, field, t);
  });
}

dp_status dp_duality_scale(const dp_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = duality_scale(model->model);
  });
}

dp_status dp_log_z_qd(const dp_model* model, const dp_partition* partition, double* out) {
  return guarded([&] {
    require(model, "model");
    require(partition, "partition");
    require(out, "out");
    *out = log_z_qd(model->model, partition->partition);
  });
}

dp_status dp_method_parse(const char* name, dp_method* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = from_method(method_from_string(name));
  });
}

const char* dp_method_name(dp_method method) {
  switch (method) {
    case DP_METHOD_IMPORTANCE: return "importance";
    case DP_METHOD_UNIFORM: return "uniform";
    case DP_METHOD_ANNEALED: return "annealed";
  }
  return "unknown";
}

void dp_sampler_spec_init(dp_sampler_spec* spec) {
  if (spec == nullptr) return;
  *spec = dp_sampler_spec{DP_METHOD_IMPORTANCE, 100000, 0, 1, nullptr, 0, 5, 0};
}

dp_status dp_anneal_geometric(double alpha_max, int levels, double* alphas_out) {
  return guarded([&] {
    require(alphas_out, "alphas_out");
    const AnnealSchedule s = AnnealSchedule::geometric(alpha_max, levels);
    std::copy(s.alphas.begin(), s.alphas.end(), alphas_out);
  });
}

dp_status dp_anneal_alpha_reaching(double min_tree_coupling, double target, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = AnnealSchedule::alpha_reaching(min_tree_coupling, target);
  });
}

dp_status dp_estimate_run(const dp_model* model, const dp_partition* partition,
                          const dp_sampler_spec* spec, dp_estimate* out, dp_trace_fn on_trace,
                          void* user) {
  return guarded([&] {
    require(model, "model");
    require(partition, "partition");
    require(spec, "spec");
    require(out, "out");
    SamplerSpec s;
    s.method = to_method(spec->method);
    s.samples = spec->samples;
    s.seed = spec->seed;
    s.workers = spec->workers;
    s.trace_stride = spec->trace_stride;
    if (spec->alphas != nullptr) {
      if (s.method != Method::annealed) {
        throw InvalidArgument("an annealing schedule is only valid with the annealed method");
      }
      AnnealSchedule schedule;
      schedule.alphas.assign(spec->alphas, spec->alphas + spec->num_alphas);
      schedule.sweeps_per_level = spec->sweeps_per_level;
      s.schedule = std::move(schedule);
    }
    const EstimateResult r = estimate(model->model, partition->partition, s);
    *out = dp_estimate{from_method(r.method),
                       r.samples,
                       r.seed,
                       r.workers,
                       r.log_zd_hat,
                       r.log_z_hat,
                       r.log_z_per_site,
                       r.log_proposal_norm,
                       r.log_weight_mean,
                       r.log_weight_second_moment,
                       r.ess,
                       r.chi2_hat,
                       r.trace.size()};
    if (on_trace != nullptr) {
      for (const auto& t : r.trace) {
        const dp_trace_point p{t.samples, t.log_z_per_site, t.ess};
        on_trace(&p, user);
      }
    }
  });
}

dp_status dp_brute_force_log_z(const dp_model* model, uint64_t limit, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = brute_force_log_z(model->model, effective_limit(limit));
  });
}

dp_status dp_brute_force_log_zd(const dp_model* model, const dp_partition* partition,
                                uint64_t limit, double* out) {
  return guarded([&] {
    require(model, "model");
    require(partition, "partition");
    require(out, "out");
    *out = brute_force_log_zd(model->model, partition->partition, effective_limit(limit));
  });
}

dp_status dp_exact_chi_squared(const dp_model* model, const dp_partition* partition,
                               dp_method proposal, uint64_t limit, double* out) {
  return guarded([&] {
    require(model, "model");
    require(partition, "partition");
    require(out, "out");
    *out = exact_chi_squared(model->model, partition->partition, to_method(proposal),
                             effective_limit(limit));
  });
}

dp_status dp_chain_log_z(int q, const double* couplings, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = chain_log_z(make_chain(q, couplings, n));
  });
}

dp_status dp_chain_brute_force_log_z(int q, const double* couplings, size_t n, uint64_t limit,
                                     double* out) {
  return guarded([&] {
    require(out, "out");
    *out = chain_brute_force_log_z(make_chain(q, couplings, n), effective_limit(limit));
  });
}

dp_status dp_relative_error(double log_z_hat, double log_z_ref, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = relative_error(log_z_hat, log_z_ref);
  });
}

}  // extern "C"
