#include "dualpotts/estimators.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <thread>

#include "dualpotts/diagnostics.hpp"
#include "dualpotts/errors.hpp"

namespace dualpotts {

std::string to_string(Method m) {
  switch (m) {
    case Method::importance: return "importance";
    case Method::uniform: return "uniform";
    case Method::annealed: return "annealed";
  }
  return "unknown";
}

Method method_from_string(std::string_view s) {
  if (s == "importance" || s == "is") return Method::importance;
  if (s == "uniform") return Method::uniform;
  if (s == "annealed" || s == "ais") return Method::annealed;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

AnnealSchedule AnnealSchedule::geometric(double alpha_max, int levels, int sweeps_per_level) {
  if (levels < 0) throw InvalidArgument("number of annealing levels must be >= 0");
  if (levels > 0 && !(alpha_max > 1.0)) {
    throw InvalidArgument("geometric schedule needs alpha_max > 1");
  }
  AnnealSchedule s;
  s.sweeps_per_level = sweeps_per_level;
  s.alphas.resize(std::size_t(levels) + 1);
  s.alphas[0] = 1.0;
  for (int v = 1; v <= levels; ++v) {
    s.alphas[v] = std::pow(alpha_max, double(v) / double(levels));
  }
  s.validate();
  return s;
}

double AnnealSchedule::alpha_reaching(double min_tree_coupling, double target_coupling) {
  if (!(min_tree_coupling > 1.0)) {
    throw InvalidArgument("tree couplings must exceed 1 to be strengthened by exponentiation");
  }
  return std::max(1.0, std::log(target_coupling) / std::log(min_tree_coupling));
}

void AnnealSchedule::validate() const {
  if (alphas.empty() || alphas[0] != 1.0) {
    throw InvalidArgument("annealing schedule must start at alpha_0 = 1");
  }
  for (std::size_t v = 1; v < alphas.size(); ++v) {
    if (!(alphas[v] > alphas[v - 1]) || !std::isfinite(alphas[v])) {
      throw InvalidArgument("annealing exponents must be finite and strictly increasing");
    }
  }
  if (sweeps_per_level < 1) throw InvalidArgument("sweeps_per_level must be >= 1");
}

double log_z_qd(const PottsModel& model, const DualPartition& partition) {
  check_compatible(model, partition);
  const double log_q = std::log(double(model.q()));
  double acc = 0.0;
  for (BondId b : partition.cotree_bonds()) acc += log_q + model.coupling(b);
  if (model.has_field()) {
    for (std::size_t m = 0; m + 1 < model.num_sites(); ++m) acc += model.field(m);
  }
  return acc;
}

namespace {

// P(symbol 0) under the product proposal: (1 + (q-1) e^-v) / q.
double zero_threshold(int q, double v) { return (1.0 + (q - 1) * std::exp(-v)) / q; }

void draw_symbols(std::span<const double> thresholds, int q, Rng& rng, std::span<Symbol> out) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double u = uniform01(rng);
    out[i] = u < thresholds[i] ? 0 : uniform_int(rng, 1, Symbol(q) - 1);
  }
}

std::vector<double> cotree_thresholds(const PottsModel& model, const DualPartition& partition) {
  std::vector<double> t;
  t.reserve(partition.cotree_bonds().size());
  for (BondId b : partition.cotree_bonds()) t.push_back(zero_threshold(model.q(), model.coupling(b)));
  return t;
}

std::vector<double> site_thresholds(const PottsModel& model) {
  std::vector<double> t;
  t.reserve(model.num_sites() - 1);
  for (std::size_t m = 0; m + 1 < model.num_sites(); ++m) {
    t.push_back(zero_threshold(model.q(), model.field(m)));
  }
  return t;
}

/// Per-bond ln gamma(0) and ln gamma(t != 0) tables.
struct FactorTable {
  std::vector<double> zero;
  std::vector<double> nonzero;

  FactorTable(int q, std::span<const double> couplings) {
    zero.reserve(couplings.size());
    nonzero.reserve(couplings.size());
    for (double j : couplings) {
      zero.push_back(log_dual_edge_factor(q, j, 0));
      nonzero.push_back(log_dual_edge_factor(q, j, 1));
    }
  }
  double operator()(std::size_t i, Symbol x) const { return x == 0 ? zero[i] : nonzero[i]; }
};

double side_log_weight(const FactorTable& table, const std::vector<BondId>& bonds,
                       const std::vector<Symbol>& values) {
  double acc = 0.0;
  for (BondId b : bonds) acc += table(b, values[b]);
  return acc;
}

struct ChunkOutput {
  WeightAccumulator acc;
  std::vector<std::pair<std::uint64_t, WeightAccumulator>> snapshots;
  std::exception_ptr error;
};

using SampleFn = std::function<double(Rng&)>;
using WorkerFactory = std::function<SampleFn()>;

/// Splits L into `workers` contiguous chunks, chunk c drawing from the
/// sub-stream (seed, sampling, c), and reduces in chunk order.
EstimateResult run_sampler(const PottsModel& model, const SamplerSpec& spec,
                           double log_proposal_norm, const WorkerFactory& make_worker) {
  if (spec.samples == 0) throw InvalidArgument("sample count L must be >= 1");
  if (spec.workers == 0) throw InvalidArgument("workers must be >= 1");
  const std::uint64_t total = spec.samples;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(spec.workers, total));
  const std::uint64_t stride = spec.trace_stride;

  std::vector<ChunkOutput> chunks(workers);
  auto run_chunk = [&](unsigned c) {
    try {
      const std::uint64_t begin = total * c / workers;
      const std::uint64_t end = total * (c + 1) / workers;
      Rng rng = make_stream(spec.seed, StreamTag::sampling, c);
      SampleFn sample = make_worker();
      ChunkOutput& out = chunks[c];
      for (std::uint64_t g = begin; g < end; ++g) {
        out.acc.add(sample(rng));
        const std::uint64_t done = g + 1;
        if (stride > 0 && (done % stride == 0 || done == total)) {
          out.snapshots.emplace_back(done, out.acc);
        }
      }
    } catch (...) {
      chunks[c].error = std::current_exception();
    }
  };
  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned c = 0; c < workers; ++c) threads.emplace_back(run_chunk, c);
  }
  for (const auto& c : chunks) {
    if (c.error) std::rethrow_exception(c.error);
  }

  const double scale = duality_scale(model);
  const double n_sites = double(model.num_sites());
  EstimateResult r;
  r.method = spec.method;
  r.samples = total;
  r.seed = spec.seed;
  r.workers = workers;
  r.log_proposal_norm = log_proposal_norm;

  WeightAccumulator prefix;
  for (const auto& c : chunks) {
    for (const auto& [done, snap] : c.snapshots) {
      WeightAccumulator running = prefix;
      running.merge(snap);
      r.trace.push_back({done, (log_proposal_norm + running.log_mean() - scale) / n_sites,
                         ess(running)});
    }
    prefix.merge(c.acc);
  }
  r.log_weight_mean = prefix.log_mean();
  r.log_weight_second_moment = prefix.log_second_moment();
  r.log_zd_hat = log_proposal_norm + r.log_weight_mean;
  r.log_z_hat = r.log_zd_hat - scale;
  r.log_z_per_site = r.log_z_hat / n_sites;
  r.ess = ess(prefix);
  r.chi2_hat = (total >= 2 && std::isfinite(r.log_weight_mean)) ? empirical_chi2(prefix) : 0.0;
  return r;
}

}  // namespace

std::vector<Symbol> draw_cotree_values(const PottsModel& model, const DualPartition& partition,
                                       Rng& rng) {
  check_compatible(model, partition);
  const auto thresholds = cotree_thresholds(model, partition);
  std::vector<Symbol> out(thresholds.size());
  draw_symbols(thresholds, model.q(), rng, out);
  return out;
}

std::vector<Symbol> draw_site_values(const PottsModel& model, Rng& rng) {
  if (!model.has_field()) throw InvalidArgument("draw_site_values requires a model with a field");
  const auto thresholds = site_thresholds(model);
  std::vector<Symbol> out(thresholds.size());
  draw_symbols(thresholds, model.q(), rng, out);
  return out;
}

EstimateResult estimate_importance(const PottsModel& model, const DualPartition& partition,
                                   const SamplerSpec& spec) {
  check_compatible(model, partition);
  if (spec.method != Method::importance) throw InvalidArgument("spec.method must be importance");
  const int q = model.q();
  const bool field = model.has_field();
  const std::size_t n = model.num_sites();
  const FactorTable gamma(q, model.couplings());
  const auto bond_thresholds = cotree_thresholds(model, partition);
  const auto field_thresholds = field ? site_thresholds(model) : std::vector<double>{};
  const double last_zero = field ? log_dual_field_factor(q, model.field(n - 1), 0) : 0.0;
  const double last_nonzero = field ? log_dual_field_factor(q, model.field(n - 1), 1) : 0.0;

  return run_sampler(model, spec, log_z_qd(model, partition), [&]() -> SampleFn {
    struct State {
      std::vector<Symbol> xa, y;
      DualConfiguration config;
      std::vector<std::int64_t> residual;
    };
    auto st = std::make_shared<State>();
    st->xa.resize(bond_thresholds.size());
    st->y.resize(field_thresholds.size());
    return [&, st](Rng& rng) {
      draw_symbols(bond_thresholds, q, rng, st->xa);
      if (field) draw_symbols(field_thresholds, q, rng, st->y);
      complete_into(partition, q, st->xa, st->y, st->config, st->residual);
      double lw = side_log_weight(gamma, partition.tree_bonds(), st->config.bond_values);
      if (field) lw += st->config.site_values[n - 1] == 0 ? last_zero : last_nonzero;
      return lw;
    };
  });
}

EstimateResult estimate_uniform(const PottsModel& model, const DualPartition& partition,
                                const SamplerSpec& spec) {
  check_compatible(model, partition);
  if (spec.method != Method::uniform) throw InvalidArgument("spec.method must be uniform");
  if (model.has_field()) {
    throw Unsupported("uniform sampling is defined only for models without external field");
  }
  const int q = model.q();
  const FactorTable gamma(q, model.couplings());
  const std::size_t num_free = partition.cotree_bonds().size();
  const double log_norm = double(num_free) * std::log(double(q));

  return run_sampler(model, spec, log_norm, [&]() -> SampleFn {
    struct State {
      std::vector<Symbol> xa;
      DualConfiguration config;
      std::vector<std::int64_t> residual;
    };
    auto st = std::make_shared<State>();
    st->xa.resize(num_free);
    return [&, st](Rng& rng) {
      for (auto& x : st->xa) x = uniform_int(rng, 0, Symbol(q) - 1);
      complete_into(partition, q, st->xa, {}, st->config, st->residual);
      return side_log_weight(gamma, partition.cotree_bonds(), st->config.bond_values) +
             side_log_weight(gamma, partition.tree_bonds(), st->config.bond_values);
    };
  });
}

EstimateResult estimate_annealed(const PottsModel& model, const DualPartition& partition,
                                 const SamplerSpec& spec) {
  check_compatible(model, partition);
  if (spec.method != Method::annealed) throw InvalidArgument("spec.method must be annealed");
  if (!spec.schedule) throw InvalidArgument("annealed sampling requires a schedule");
  if (model.has_field()) {
    throw Unsupported("annealed sampling is defined only for models without external field");
  }
  const AnnealSchedule& schedule = *spec.schedule;
  schedule.validate();
  const std::size_t levels = schedule.levels();
  if (levels > 0) {
    for (BondId b : partition.tree_bonds()) {
      if (model.coupling(b) <= 1.0) {
        throw InvalidArgument("tree bond " + std::to_string(b) + " has J = " +
                              std::to_string(model.coupling(b)) +
                              " <= 1; raising it to alpha > 1 would weaken it");
      }
    }
  }

  const int q = model.q();
  // Level tables: co-tree couplings are shared, tree couplings become J^alpha_v.
  std::vector<FactorTable> level_gamma;
  level_gamma.reserve(levels + 1);
  for (double alpha : schedule.alphas) {
    std::vector<double> j(model.couplings().begin(), model.couplings().end());
    for (BondId b : partition.tree_bonds()) j[b] = std::pow(j[b], alpha);
    level_gamma.emplace_back(q, j);
  }
  const auto thresholds = cotree_thresholds(model, partition);
  const CycleBasis basis(partition, false);
  const auto& tree = partition.tree_bonds();
  const std::size_t num_free = thresholds.size();
  const int sweeps = schedule.sweeps_per_level;

  return run_sampler(model, spec, log_z_qd(model, partition), [&]() -> SampleFn {
    struct State {
      std::vector<Symbol> xa;
      DualConfiguration config;
      std::vector<std::int64_t> residual;
    };
    auto st = std::make_shared<State>();
    st->xa.resize(num_free);
    return [&, st](Rng& rng) {
      draw_symbols(thresholds, q, rng, st->xa);
      complete_into(partition, q, st->xa, {}, st->config, st->residual);
      auto& x = st->config.bond_values;
      double lw = side_log_weight(level_gamma[levels], tree, x);
      for (std::size_t v = levels; v-- > 0;) {
        lw += side_log_weight(level_gamma[v], tree, x) - side_log_weight(level_gamma[v + 1], tree, x);
        if (v == 0) break;
        const FactorTable& g = level_gamma[v];
        for (int s = 0; s < sweeps; ++s) {
          for (std::size_t i = 0; i < num_free; ++i) {
            const auto terms = basis.bond_terms(i);
            const Symbol old = st->xa[i];
            const Symbol proposal = uniform_int(rng, 0, Symbol(q) - 1);
            const double u = uniform01(rng);
            if (proposal == old) continue;
            const Symbol delta = (proposal + Symbol(q) - old) % Symbol(q);
            double log_ratio = 0.0;
            for (const auto& t : terms) {
              const Symbol cur = x[t.index];
              log_ratio += g(t.index, shift_symbol(cur, t.sign, delta, q)) - g(t.index, cur);
            }
            if (std::log(u) < log_ratio) {
              for (const auto& t : terms) x[t.index] = shift_symbol(x[t.index], t.sign, delta, q);
              st->xa[i] = proposal;
            }
          }
        }
      }
      return lw;
    };
  });
}

EstimateResult estimate(const PottsModel& model, const DualPartition& partition,
                        const SamplerSpec& spec) {
  switch (spec.method) {
    case Method::importance: return estimate_importance(model, partition, spec);
    case Method::uniform: return estimate_uniform(model, partition, spec);
    case Method::annealed: return estimate_annealed(model, partition, spec);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace dualpotts
