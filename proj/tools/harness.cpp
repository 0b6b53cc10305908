#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace harness {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Error(DP_ERR_INVALID_ARGUMENT, "not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(DP_ERR_INVALID_ARGUMENT, "not an unsigned integer: '" + s + "'");
  }
  return std::stoull(s);
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

std::vector<std::uint32_t> bond_list(const dp_partition* p, bool tree) {
  std::size_t n = 0;
  check(tree ? dp_partition_tree_bonds(p, nullptr, 0, &n)
             : dp_partition_cotree_bonds(p, nullptr, 0, &n));
  std::vector<std::uint32_t> ids(n);
  check(tree ? dp_partition_tree_bonds(p, ids.data(), n, &n)
             : dp_partition_cotree_bonds(p, ids.data(), n, &n));
  return ids;
}

dp_model_info info_of(const dp_model* m) {
  dp_model_info info{};
  check(dp_model_info_get(m, &info));
  return info;
}

std::string take_string(char* s) {
  std::string out(s);
  dp_string_free(s);
  return out;
}

/// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double pos = p * double(sorted.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile(v, 0.5);
}

}  // namespace

void check(dp_status status) {
  if (status != DP_OK) throw Error(status, dp_last_error());
}

dp_values_spec ValuesSpec::c_spec() const {
  return dp_values_spec{kind, value, values.data(), values.size(), lo, hi, seed};
}

std::string ValuesSpec::to_string() const {
  switch (kind) {
    case DP_VALUES_CONSTANT: return "const:" + fmt(value);
    case DP_VALUES_UNIFORM: return "uniform:" + fmt(lo) + "," + fmt(hi) + ":" + std::to_string(seed);
    case DP_VALUES_EXPLICIT: {
      std::string s = "list:";
      for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + fmt(values[i]);
      return s;
    }
  }
  return "?";
}

ValuesSpec parse_values(const std::string& text, std::uint64_t default_seed) {
  ValuesSpec s;
  const auto colon = text.find(':');
  const std::string head = colon == std::string::npos ? "" : text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? text : text.substr(colon + 1);
  if (head.empty() || head == "const") {
    s.kind = DP_VALUES_CONSTANT;
    s.value = to_double(rest);
  } else if (head == "uniform") {
    s.kind = DP_VALUES_UNIFORM;
    const auto parts = split(rest, ':');
    if (parts.empty() || parts.size() > 2) {
      throw Error(DP_ERR_INVALID_ARGUMENT, "expected uniform:lo,hi[:seed], got '" + text + "'");
    }
    const auto range = to_doubles(parts[0]);
    if (range.size() != 2) {
      throw Error(DP_ERR_INVALID_ARGUMENT, "expected uniform:lo,hi[:seed], got '" + text + "'");
    }
    s.lo = range[0];
    s.hi = range[1];
    s.seed = parts.size() == 2 ? to_u64(parts[1]) : default_seed;
  } else if (head == "list") {
    s.kind = DP_VALUES_EXPLICIT;
    s.values = to_doubles(rest);
  } else {
    throw Error(DP_ERR_INVALID_ARGUMENT, "unknown value spec '" + text + "'");
  }
  return s;
}

PartitionSource parse_partition_source(const std::string& text) {
  if (text == "max-coupling") return PartitionSource::max_coupling;
  if (text == "comb") return PartitionSource::comb;
  if (text == "file") return PartitionSource::file;
  throw Error(DP_ERR_INVALID_ARGUMENT, "unknown partition '" + text + "'");
}

Setup build_setup(const ModelSource& source) {
  Setup setup;
  dp_model* raw = nullptr;
  if (source.model_file) {
    check(dp_model_from_json(read_file(*source.model_file).c_str(), &raw));
  } else {
    const ValuesSpec couplings = parse_values(source.coupling, source.model_seed);
    const ValuesSpec fields = parse_values(source.field, source.model_seed);
    const dp_values_spec c = couplings.c_spec();
    const dp_values_spec f = fields.c_spec();
    check(dp_model_create(source.width, source.height, source.q, &c, &f, &raw));
  }
  setup.model.reset(raw);

  // With a separate tree coupling the two sides are drawn independently, so
  // the tree must not be chosen from the drawn values: pick it on a
  // constant-coupling model of the same shape.
  const bool split = source.tree_coupling && !source.model_file;
  Model shape;
  if (split) {
    dp_values_spec one{};
    one.kind = DP_VALUES_CONSTANT;
    one.value = 1.0;
    dp_model* s = nullptr;
    check(dp_model_create(source.width, source.height, source.q, &one, nullptr, &s));
    shape.reset(s);
  }
  const dp_model* chooser = split ? shape.get() : setup.model.get();

  dp_partition* part = nullptr;
  switch (source.partition) {
    case PartitionSource::file:
      if (!source.partition_file) {
        throw Error(DP_ERR_INVALID_ARGUMENT, "--partition file needs --partition-file");
      }
      check(dp_partition_from_json(read_file(*source.partition_file).c_str(), &part));
      break;
    case PartitionSource::comb:
      check(dp_partition_build(chooser, DP_PARTITION_COMB, &part));
      break;
    case PartitionSource::max_coupling:
      check(dp_partition_build(chooser, DP_PARTITION_MAX_COUPLING, &part));
      break;
  }
  setup.partition.reset(part);

  if (source.tree_coupling) {
    if (split) {
      const ValuesSpec cotree = parse_values(source.coupling, source.model_seed);
      const dp_values_spec a = cotree.c_spec();
      dp_model* sided = nullptr;
      check(dp_model_with_side_couplings(setup.model.get(), setup.partition.get(), DP_SIDE_A, &a,
                                         &sided));
      setup.model.reset(sided);
    }
    const ValuesSpec tree = parse_values(*source.tree_coupling, source.model_seed);
    const dp_values_spec t = tree.c_spec();
    dp_model* overridden = nullptr;
    check(dp_model_with_side_couplings(setup.model.get(), setup.partition.get(), DP_SIDE_B, &t,
                                       &overridden));
    setup.model.reset(overridden);
  }
  return setup;
}

std::vector<double> resolve_alphas(const SamplerOptions& options, const dp_model* model,
                                   const dp_partition* partition) {
  if (options.method != DP_METHOD_ANNEALED) return {};
  const std::string& text = options.alphas;
  if (text.rfind("geometric:", 0) != 0) return to_doubles(text);

  const auto parts = split(text.substr(10), ':');
  double alpha_max = 1.0;
  std::uint64_t levels = 0;
  if (parts.size() == 1) {
    levels = to_u64(parts[0]);
    if (levels > 0) {
      std::vector<double> j(info_of(model).num_bonds);
      check(dp_model_couplings(model, j.data(), j.size()));
      double weakest = INFINITY;
      for (auto b : bond_list(partition, true)) weakest = std::min(weakest, j[b]);
      check(dp_anneal_alpha_reaching(weakest, options.alpha_target, &alpha_max));
    }
  } else if (parts.size() == 2) {
    alpha_max = to_double(parts[0]);
    levels = to_u64(parts[1]);
  } else {
    throw Error(DP_ERR_INVALID_ARGUMENT, "expected geometric:V or geometric:alpha_max:V");
  }
  // Tree couplings already at the target need no annealing.
  if (levels == 0 || alpha_max <= 1.0) return {1.0};
  std::vector<double> alphas(levels + 1);
  check(dp_anneal_geometric(alpha_max, int(levels), alphas.data()));
  return alphas;
}

EstimateRun run_estimator(const dp_model* model, const dp_partition* partition,
                          const SamplerOptions& options) {
  EstimateRun run;
  run.alphas = resolve_alphas(options, model, partition);
  dp_sampler_spec spec;
  dp_sampler_spec_init(&spec);
  spec.method = options.method;
  spec.samples = options.samples;
  spec.seed = options.seed;
  spec.workers = options.workers;
  spec.trace_stride = options.stride;
  spec.sweeps_per_level = options.sweeps_per_level;
  if (!run.alphas.empty()) {
    spec.alphas = run.alphas.data();
    spec.num_alphas = run.alphas.size();
  }
  const auto start = std::chrono::steady_clock::now();
  check(dp_estimate_run(
      model, partition, &spec, &run.estimate,
      [](const dp_trace_point* p, void* user) {
        static_cast<std::vector<dp_trace_point>*>(user)->push_back(*p);
      },
      &run.trace));
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::string estimate_json(const dp_model* model, const dp_partition* partition,
                          const SamplerOptions& options, const EstimateRun& run) {
  const dp_model_info info = info_of(model);
  char* model_text = nullptr;
  check(dp_model_to_json(model, &model_text));
  char* partition_text = nullptr;
  check(dp_partition_to_json(partition, &partition_text));
  const dp_estimate& e = run.estimate;

  json doc;
  doc["tool"] = "dualpotts";
  doc["version"] = dp_version();
  doc["sampler"] = {{"method", dp_method_name(e.method)},
                    {"samples", e.samples},
                    {"seed", e.seed},
                    {"workers", e.workers},
                    {"trace_stride", options.stride}};
  if (e.method == DP_METHOD_ANNEALED) {
    doc["sampler"]["alphas"] = run.alphas;
    doc["sampler"]["sweeps_per_level"] = options.sweeps_per_level;
  }
  doc["model"] = {{"width", info.width},
                  {"height", info.height},
                  {"q", info.q},
                  {"num_sites", info.num_sites},
                  {"num_bonds", info.num_bonds},
                  {"has_field", info.has_field != 0},
                  {"fingerprint", hex64(info.fingerprint)},
                  {"definition", json::parse(take_string(model_text))}};
  doc["partition"] = json::parse(take_string(partition_text));
  doc["result"] = {{"log_zd_hat", e.log_zd_hat},
                   {"log_z_hat", e.log_z_hat},
                   {"log_z_per_site", e.log_z_per_site},
                   {"log_proposal_norm", e.log_proposal_norm},
                   {"log_weight_mean", e.log_weight_mean},
                   {"log_weight_second_moment", e.log_weight_second_moment},
                   {"ess", e.ess},
                   {"chi2_hat", e.chi2_hat},
                   {"trace_length", e.trace_length}};
  doc["wall_time_s"] = run.wall_seconds;
  return doc.dump(2) + "\n";
}

std::string trace_csv(const std::vector<dp_trace_point>& trace) {
  std::string out = "# dualpotts-trace v1\nsamples,log_z_per_site,ess\n";
  for (const auto& p : trace) {
    out += std::to_string(p.samples) + "," + fmt(p.log_z_per_site) + "," + fmt(p.ess) + "\n";
  }
  return out;
}

std::string exact_json(const dp_model* model, const dp_partition* partition,
                       std::uint64_t limit) {
  const dp_model_info info = info_of(model);
  json doc;
  doc["tool"] = "dualpotts";
  doc["version"] = dp_version();
  doc["model"] = {{"width", info.width},
                  {"height", info.height},
                  {"q", info.q},
                  {"has_field", info.has_field != 0},
                  {"fingerprint", hex64(info.fingerprint)}};
  json skipped = json::object();
  auto attempt = [&](const char* key, dp_status status, const double& value) {
    if (status == DP_OK) {
      doc[key] = value;
    } else if (status == DP_ERR_GUARD_EXCEEDED || status == DP_ERR_UNSUPPORTED) {
      skipped[key] = dp_last_error();
    } else {
      check(status);
    }
  };
  double v = 0.0;
  attempt("log_z", dp_brute_force_log_z(model, limit, &v), v);
  if (doc.contains("log_z")) doc["log_z_per_site"] = doc["log_z"].get<double>() / double(info.num_sites);
  attempt("log_zd", dp_brute_force_log_zd(model, partition, limit, &v), v);
  check(dp_duality_scale(model, &v));
  doc["duality_scale"] = v;
  check(dp_log_z_qd(model, partition, &v));
  doc["log_z_qd"] = v;
  attempt("chi2_importance", dp_exact_chi_squared(model, partition, DP_METHOD_IMPORTANCE, limit, &v), v);
  attempt("chi2_uniform", dp_exact_chi_squared(model, partition, DP_METHOD_UNIFORM, limit, &v), v);
  if (!skipped.empty()) doc["skipped"] = skipped;
  return doc.dump(2) + "\n";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "constant") return SweepAxis::constant;
  if (text == "mixed") return SweepAxis::mixed;
  if (text == "field") return SweepAxis::field;
  throw Error(DP_ERR_INVALID_ARGUMENT, "unknown sweep axis '" + text + "'");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::constant: return "constant";
    case SweepAxis::mixed: return "mixed";
    case SweepAxis::field: return "field";
  }
  return "?";
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw Error(DP_ERR_INVALID_ARGUMENT, "sweep axis has no values");
  if (spec.repetitions < 1) throw Error(DP_ERR_INVALID_ARGUMENT, "repetitions must be >= 1");
  SweepResult result;
  bool noted_uniform = false;
  for (double x : spec.values) {
    ModelSource source;
    source.width = spec.width;
    source.height = spec.height;
    source.q = spec.q;
    source.coupling = "const:" + fmt(x);
    if (spec.axis != SweepAxis::constant) source.tree_coupling = "const:" + fmt(spec.fixed_tree_coupling);
    if (spec.axis == SweepAxis::field) source.field = "const:" + fmt(spec.field_value);
    const Setup setup = build_setup(source);

    double log_z = 0.0;
    check(dp_brute_force_log_z(setup.model.get(), 0, &log_z));

    for (dp_method method : spec.methods) {
      if (spec.axis == SweepAxis::field && method == DP_METHOD_UNIFORM) {
        if (!noted_uniform) {
          result.notes.push_back("uniform sampling skipped: it is defined only without a field");
          noted_uniform = true;
        }
        continue;
      }
      std::vector<double> errors, ess, chi2;
      for (int r = 0; r < spec.repetitions; ++r) {
        SamplerOptions options;
        options.method = method;
        options.samples = spec.samples;
        options.seed = spec.seed + std::uint64_t(r);
        options.workers = spec.workers;
        const EstimateRun run = run_estimator(setup.model.get(), setup.partition.get(), options);
        double err = 0.0;
        check(dp_relative_error(run.estimate.log_z_hat, log_z, &err));
        errors.push_back(err);
        ess.push_back(run.estimate.ess);
        chi2.push_back(run.estimate.chi2_hat);
      }
      std::vector<double> sorted = errors;
      std::sort(sorted.begin(), sorted.end());
      double mean = 0.0;
      for (double e : errors) mean += e;
      mean /= double(errors.size());
      result.rows.push_back(SweepRow{x, method, spec.repetitions, spec.samples, log_z,
                                     quantile(sorted, 0.5), quantile(sorted, 0.25),
                                     quantile(sorted, 0.75), mean, median_of(ess),
                                     median_of(chi2)});
    }
  }
  return result;
}

std::string sweep_csv(const SweepSpec& spec, const SweepResult& result) {
  std::ostringstream out;
  out << "# dualpotts-sweep v1\n";
  out << "# axis=" << to_string(spec.axis) << " width=" << spec.width << " height=" << spec.height
      << " q=" << spec.q << " samples=" << spec.samples << " repetitions=" << spec.repetitions
      << " seed=" << spec.seed << " workers=" << spec.workers;
  if (spec.axis != SweepAxis::constant) out << " tree_coupling=" << fmt(spec.fixed_tree_coupling);
  if (spec.axis == SweepAxis::field) out << " field=" << fmt(spec.field_value);
  out << " version=" << dp_version() << "\n";
  out << "# relative error |lnZ - lnZ_hat| / lnZ against brute force; repetition r uses seed+r;"
         " quartiles by linear interpolation\n";
  for (const auto& note : result.notes) out << "# note: " << note << "\n";
  out << "axis_value,method,repetitions,samples,log_z_exact,median_rel_error,q1_rel_error,"
         "q3_rel_error,mean_rel_error,median_ess,median_chi2\n";
  for (const auto& r : result.rows) {
    out << fmt(r.axis_value) << ',' << dp_method_name(r.method) << ',' << r.repetitions << ','
        << r.samples << ',' << fmt(r.log_z_exact) << ',' << fmt(r.median_rel_error) << ','
        << fmt(r.q1_rel_error) << ',' << fmt(r.q3_rel_error) << ',' << fmt(r.mean_rel_error)
        << ',' << fmt(r.median_ess) << ',' << fmt(r.median_chi2) << '\n';
  }
  return out.str();
}

std::string chain_json(int q, const std::vector<double>& couplings, std::uint64_t limit) {
  json doc;
  doc["tool"] = "dualpotts";
  doc["version"] = dp_version();
  doc["q"] = q;
  doc["length"] = couplings.size();
  double v = 0.0;
  check(dp_chain_log_z(q, couplings.data(), couplings.size(), &v));
  doc["log_z"] = v;
  doc["log_z_per_site"] = v / double(couplings.size());
  const dp_status s = dp_chain_brute_force_log_z(q, couplings.data(), couplings.size(), limit, &v);
  if (s == DP_OK) {
    doc["log_z_brute_force"] = v;
  } else if (s == DP_ERR_GUARD_EXCEEDED) {
    doc["skipped"] = {{"log_z_brute_force", dp_last_error()}};
  } else {
    check(s);
  }
  return doc.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(DP_ERR_IO, "cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error(DP_ERR_IO, "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(DP_ERR_IO, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace harness
