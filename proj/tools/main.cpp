#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "harness.hpp"

namespace {

struct ModelFlags {
  harness::ModelSource source;
  std::string partition = "max-coupling";
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  auto& s = f.source;
  app->add_option("--width", s.width, "Grid width (>= 3)")->capture_default_str();
  app->add_option("--height", s.height, "Grid height (>= 3)")->capture_default_str();
  app->add_option("--q", s.q, "Alphabet size (>= 2)")->capture_default_str();
  app->add_option("--coupling", s.coupling,
                  "Bond couplings: J | const:J | uniform:lo,hi[:seed] | list:J0,J1,...")
      ->capture_default_str();
  app->add_option("--tree-coupling", s.tree_coupling,
                  "Spanning-tree couplings (same syntax); --coupling then sets the co-tree only");
  app->add_option("--field", s.field, "Site fields, same syntax as --coupling")
      ->capture_default_str();
  app->add_option("--model-seed", s.model_seed, "Seed for uniform specs without their own seed")
      ->capture_default_str();
  app->add_option("--model", s.model_file, "Model JSON file (replaces the inline flags)");
  app->add_option("--partition", f.partition, "Spanning tree: max-coupling | comb | file")
      ->check(CLI::IsMember({"max-coupling", "comb", "file"}))
      ->capture_default_str();
  app->add_option("--partition-file", s.partition_file, "Partition JSON for --partition file");
}

struct SamplerFlags {
  harness::SamplerOptions options;
  std::string method = "is";
};

void add_sampler_flags(CLI::App* app, SamplerFlags& f) {
  auto& o = f.options;
  app->add_option("--method", f.method, "is | uniform | ais")
      ->check(CLI::IsMember({"is", "importance", "uniform", "ais", "annealed"}))
      ->capture_default_str();
  app->add_option("--samples", o.samples, "Sample count L")->capture_default_str();
  app->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  app->add_option("--workers", o.workers, "Worker threads (part of the reproducibility key)")
      ->capture_default_str();
  app->add_option("--alphas", o.alphas,
                  "AIS exponents: a0,a1,... | geometric:V | geometric:alpha_max:V")
      ->capture_default_str();
  app->add_option("--alpha-target", o.alpha_target,
                  "For geometric:V, weakest tree coupling raised to at least this value")
      ->capture_default_str();
  app->add_option("--sweeps-per-level", o.sweeps_per_level, "AIS Metropolis sweeps per level")
      ->capture_default_str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    harness::write_file(path, text);
  }
}

dp_method parse_method(const std::string& name) {
  dp_method m;
  harness::check(dp_method_parse(name.c_str(), &m));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-domain Monte Carlo estimation of 2D Potts partition functions"};
  app.set_version_flag("--version", std::string(dp_version()));
  app.require_subcommand(1);

  ModelFlags est_model, exact_model, trace_model;
  SamplerFlags est_sampler, trace_sampler;
  std::string est_out, est_trace_out, exact_out, trace_out, trace_json;
  std::uint64_t exact_limit = 0;

  auto* estimate = app.add_subcommand("estimate", "Estimate ln Z and write a JSON result");
  add_model_flags(estimate, est_model);
  add_sampler_flags(estimate, est_sampler);
  estimate->add_option("--stride", est_sampler.options.stride, "Trace stride (0 disables)");
  estimate->add_option("--out", est_out, "JSON output path (default stdout)");
  estimate->add_option("--trace-out", est_trace_out, "CSV trace path (needs --stride)");

  auto* exact = app.add_subcommand("exact", "Exact ln Z, ln Z_d and chi-squared by enumeration");
  add_model_flags(exact, exact_model);
  exact->add_option("--limit", exact_limit, "Enumeration term limit (0 = default)");
  exact->add_option("--out", exact_out, "JSON output path (default stdout)");

  auto* trace = app.add_subcommand("trace", "Running ln Z / N as CSV");
  add_model_flags(trace, trace_model);
  add_sampler_flags(trace, trace_sampler);
  trace_sampler.options.stride = 100;
  trace->add_option("--stride", trace_sampler.options.stride, "Samples between trace rows")
      ->capture_default_str();
  trace->add_option("--out", trace_out, "CSV output path (default stdout)");
  trace->add_option("--json", trace_json, "Also write the JSON result here");

  harness::SweepSpec sweep_spec;
  std::string sweep_axis = "constant", sweep_values = "0.5,1,1.5,2,2.5,3", sweep_methods = "is,uniform",
              sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Relative error vs coupling against brute force");
  sweep->add_option("--axis", sweep_axis, "constant | mixed | field")
      ->check(CLI::IsMember({"constant", "mixed", "field"}))
      ->capture_default_str();
  sweep->add_option("--values", sweep_values, "Comma-separated axis values")->capture_default_str();
  sweep->add_option("--tree-coupling", sweep_spec.fixed_tree_coupling,
                    "Tree coupling for mixed/field axes")
      ->capture_default_str();
  sweep->add_option("--field", sweep_spec.field_value, "Field for the field axis")
      ->capture_default_str();
  sweep->add_option("--methods", sweep_methods, "Comma-separated methods")->capture_default_str();
  sweep->add_option("--width", sweep_spec.width)->capture_default_str();
  sweep->add_option("--height", sweep_spec.height)->capture_default_str();
  sweep->add_option("--q", sweep_spec.q)->capture_default_str();
  sweep->add_option("--samples", sweep_spec.samples)->capture_default_str();
  sweep->add_option("--repetitions", sweep_spec.repetitions)->capture_default_str();
  sweep->add_option("--seed", sweep_spec.seed)->capture_default_str();
  sweep->add_option("--workers", sweep_spec.workers)->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");

  int chain_q = 3;
  std::size_t chain_length = 3;
  std::string chain_coupling = "const:1", chain_out;
  std::uint64_t chain_limit = 0;
  auto* chain = app.add_subcommand("chain", "Periodic 1D chain: closed form and brute force");
  chain->add_option("--q", chain_q)->capture_default_str();
  chain->add_option("--length", chain_length, "Chain length N (>= 3)")->capture_default_str();
  chain->add_option("--coupling", chain_coupling, "const:J | list:J1,...,JN")->capture_default_str();
  chain->add_option("--limit", chain_limit, "Brute-force term limit (0 = default)");
  chain->add_option("--out", chain_out, "JSON output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto finish_model = [](ModelFlags& f) {
      f.source.partition = harness::parse_partition_source(f.partition);
      return harness::build_setup(f.source);
    };

    if (estimate->parsed()) {
      est_sampler.options.method = parse_method(est_sampler.method);
      const auto setup = finish_model(est_model);
      const auto run =
          harness::run_estimator(setup.model.get(), setup.partition.get(), est_sampler.options);
      emit(est_out, harness::estimate_json(setup.model.get(), setup.partition.get(),
                                           est_sampler.options, run));
      if (!est_trace_out.empty()) harness::write_file(est_trace_out, harness::trace_csv(run.trace));
    } else if (exact->parsed()) {
      const auto setup = finish_model(exact_model);
      emit(exact_out, harness::exact_json(setup.model.get(), setup.partition.get(), exact_limit));
    } else if (trace->parsed()) {
      trace_sampler.options.method = parse_method(trace_sampler.method);
      if (trace_sampler.options.stride == 0) {
        throw harness::Error(DP_ERR_INVALID_ARGUMENT, "trace needs --stride >= 1");
      }
      const auto setup = finish_model(trace_model);
      const auto run =
          harness::run_estimator(setup.model.get(), setup.partition.get(), trace_sampler.options);
      emit(trace_out, harness::trace_csv(run.trace));
      if (!trace_json.empty()) {
        harness::write_file(trace_json, harness::estimate_json(setup.model.get(), setup.partition.get(),
                                                               trace_sampler.options, run));
      }
    } else if (sweep->parsed()) {
      sweep_spec.axis = harness::parse_sweep_axis(sweep_axis);
      sweep_spec.values = harness::parse_values("list:" + sweep_values).values;
      sweep_spec.methods.clear();
      std::stringstream ss(sweep_methods);
      for (std::string m; std::getline(ss, m, ',');) sweep_spec.methods.push_back(parse_method(m));
      const auto result = harness::run_sweep(sweep_spec);
      for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
      emit(sweep_out, harness::sweep_csv(sweep_spec, result));
    } else if (chain->parsed()) {
      const auto spec = harness::parse_values(chain_coupling);
      std::vector<double> j;
      if (spec.kind == DP_VALUES_CONSTANT) {
        j.assign(chain_length, spec.value);
      } else if (spec.kind == DP_VALUES_EXPLICIT) {
        j = spec.values;
      } else {
        throw harness::Error(DP_ERR_INVALID_ARGUMENT, "chain couplings must be const: or list:");
      }
      emit(chain_out, harness::chain_json(chain_q, j, chain_limit));
    }
  } catch (const harness::Error& e) {
    std::cerr << "error (" << dp_status_name(e.status()) << "): " << e.what() << "\n";
    return 1 + int(e.status());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
