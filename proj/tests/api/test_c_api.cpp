#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "dualpotts/dualpotts.h"

namespace {

dp_values_spec constant(double v) {
  dp_values_spec s{};
  s.kind = DP_VALUES_CONSTANT;
  s.value = v;
  return s;
}

dp_model* make_model(double j, double h = 0.0, int w = 3, int q = 3) {
  dp_model* m = nullptr;
  const auto c = constant(j);
  const auto f = constant(h);
  REQUIRE(dp_model_create(w, 3, q, &c, &f, &m) == DP_OK);
  return m;
}

dp_partition* make_partition(const dp_model* m) {
  dp_partition* p = nullptr;
  REQUIRE(dp_partition_build(m, DP_PARTITION_MAX_COUPLING, &p) == DP_OK);
  return p;
}

}  // namespace

TEST_SUITE("c_api") {

TEST_CASE("version and status names") {
  CHECK(std::strlen(dp_version()) > 0);
  CHECK(std::string(dp_status_name(DP_ERR_GUARD_EXCEEDED)) == "enumeration guard exceeded");
  CHECK(std::string(dp_method_name(DP_METHOD_ANNEALED)) == "annealed");
}

TEST_CASE("model lifecycle and info") {
  dp_model* m = make_model(1.0);
  dp_model_info info{};
  REQUIRE(dp_model_info_get(m, &info) == DP_OK);
  CHECK(info.num_sites == 9);
  CHECK(info.num_bonds == 18);
  CHECK(info.has_field == 0);

  std::vector<uint32_t> zero(9, 0);
  double v = 0.0;
  REQUIRE(dp_model_hamiltonian(m, zero.data(), zero.size(), &v) == DP_OK);
  CHECK(v == -18.0);
  REQUIRE(dp_model_log_weight(m, zero.data(), zero.size(), &v) == DP_OK);
  CHECK(v == 18.0);

  char* text = nullptr;
  REQUIRE(dp_model_to_json(m, &text) == DP_OK);
  dp_model* copy = nullptr;
  REQUIRE(dp_model_from_json(text, &copy) == DP_OK);
  dp_string_free(text);
  dp_model_info copy_info{};
  REQUIRE(dp_model_info_get(copy, &copy_info) == DP_OK);
  CHECK(copy_info.fingerprint == info.fingerprint);
  dp_model_destroy(copy);
  dp_model_destroy(m);
  dp_model_destroy(nullptr);
}

TEST_CASE("explicit and uniform value specs") {
  std::vector<double> j(18);
  for (int b = 0; b < 18; ++b) j[b] = 0.1 * b;
  dp_values_spec c{};
  c.kind = DP_VALUES_EXPLICIT;
  c.values = j.data();
  c.count = j.size();
  dp_model* m = nullptr;
  REQUIRE(dp_model_create(3, 3, 2, &c, nullptr, &m) == DP_OK);
  std::vector<double> back(18);
  REQUIRE(dp_model_couplings(m, back.data(), back.size()) == DP_OK);
  CHECK(back == j);
  dp_model_destroy(m);

  dp_values_spec u{};
  u.kind = DP_VALUES_UNIFORM;
  u.lo = 0.75;
  u.hi = 2.25;
  u.seed = 3;
  REQUIRE(dp_model_create(30, 30, 4, &u, nullptr, &m) == DP_OK);
  std::vector<double> drawn(1800);
  REQUIRE(dp_model_couplings(m, drawn.data(), drawn.size()) == DP_OK);
  for (double x : drawn) CHECK((x >= 0.75 && x <= 2.25));
  dp_model_destroy(m);
}

TEST_CASE("errors map to status codes and messages") {
  dp_model* m = nullptr;
  const auto c = constant(-1.0);
  CHECK(dp_model_create(3, 3, 3, &c, nullptr, &m) == DP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(dp_last_error()) > 0);
  CHECK(m == nullptr);
  CHECK(dp_model_create(3, 3, 3, nullptr, nullptr, &m) == DP_ERR_INVALID_ARGUMENT);
  CHECK(dp_model_from_json("{oops", &m) == DP_ERR_PARSE);

  dp_model* big = make_model(1.0, 0.0, 5, 4);
  double v = 0.0;
  CHECK(dp_brute_force_log_z(big, 0, &v) == DP_ERR_GUARD_EXCEEDED);
  CHECK(std::string(dp_last_error()).find("limit") != std::string::npos);
  dp_model_destroy(big);

  dp_model* field = make_model(1.0, 0.1);
  dp_partition* p = make_partition(field);
  dp_sampler_spec spec;
  dp_sampler_spec_init(&spec);
  spec.method = DP_METHOD_UNIFORM;
  spec.samples = 10;
  dp_estimate e{};
  CHECK(dp_estimate_run(field, p, &spec, &e, nullptr, nullptr) == DP_ERR_UNSUPPORTED);
  spec.method = DP_METHOD_IMPORTANCE;
  const double alphas[] = {1.0, 2.0};
  spec.alphas = alphas;
  spec.num_alphas = 2;
  CHECK(dp_estimate_run(field, p, &spec, &e, nullptr, nullptr) == DP_ERR_INVALID_ARGUMENT);
  dp_partition_destroy(p);
  dp_model_destroy(field);

  dp_method method;
  CHECK(dp_method_parse("bogus", &method) == DP_ERR_INVALID_ARGUMENT);
  REQUIRE(dp_method_parse("ais", &method) == DP_OK);
  CHECK(method == DP_METHOD_ANNEALED);
}

TEST_CASE("partition accessors, flip and JSON") {
  dp_model* m = make_model(1.0);
  dp_partition* p = make_partition(m);
  size_t n = 0;
  REQUIRE(dp_partition_tree_bonds(p, nullptr, 0, &n) == DP_OK);
  CHECK(n == 8);
  std::vector<uint32_t> tree(n);
  REQUIRE(dp_partition_tree_bonds(p, tree.data(), tree.size(), &n) == DP_OK);
  REQUIRE(dp_partition_cotree_bonds(p, nullptr, 0, &n) == DP_OK);
  CHECK(n == 10);

  dp_partition* again = nullptr;
  REQUIRE(dp_partition_from_tree(3, 3, tree.data(), tree.size(), 0, &again) == DP_OK);
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(dp_partition_to_json(p, &a) == DP_OK);
  REQUIRE(dp_partition_to_json(again, &b) == DP_OK);
  CHECK(std::string(a) == std::string(b));

  dp_partition* flipped = nullptr;
  REQUIRE(dp_partition_flip(p, 3, &flipped) == DP_OK);
  char* f = nullptr;
  REQUIRE(dp_partition_to_json(flipped, &f) == DP_OK);
  CHECK(std::string(f).find("\"flipped\":[3]") != std::string::npos);
  dp_partition* parsed = nullptr;
  REQUIRE(dp_partition_from_json(f, &parsed) == DP_OK);

  CHECK(dp_partition_from_tree(3, 3, tree.data(), 7, 0, &again) == DP_ERR_INVALID_ARGUMENT);
  CHECK(dp_partition_flip(p, 99, &flipped) == DP_ERR_INVALID_ARGUMENT);

  for (char* s : {a, b, f}) dp_string_free(s);
  for (dp_partition* x : {p, again, flipped, parsed}) dp_partition_destroy(x);
  dp_model_destroy(m);
}

TEST_CASE("factors and closed forms") {
  double v = 0.0;
  REQUIRE(dp_dual_edge_factor(3, std::log(4.0), 0, &v) == DP_OK);
  CHECK(v == doctest::Approx(6.0));
  REQUIRE(dp_log_dual_edge_factor(3, 0.0, 1, &v) == DP_OK);
  CHECK(v == -INFINITY);
  REQUIRE(dp_dual_field_factor(3, 0.0, 0, &v) == DP_OK);
  CHECK(v == doctest::Approx(1.0));
  REQUIRE(dp_log_dual_field_factor(3, 0.1, 0, &v) == DP_OK);
  CHECK(v == doctest::Approx(std::log((std::exp(0.1) + 2) / 3)));
  CHECK(dp_dual_edge_factor(3, -1.0, 0, &v) == DP_ERR_INVALID_ARGUMENT);

  dp_model* m = make_model(1.0);
  dp_partition* p = make_partition(m);
  REQUIRE(dp_duality_scale(m, &v) == DP_OK);
  CHECK(v == doctest::Approx(9 * std::log(3.0)));
  REQUIRE(dp_log_z_qd(m, p, &v) == DP_OK);
  CHECK(v == doctest::Approx(10 * std::log(3.0) + 10));

  const double j[] = {1.0, 1.0, 1.0};
  REQUIRE(dp_chain_log_z(3, j, 3, &v) == DP_OK);
  CHECK(std::exp(v) == doctest::Approx(115.186).epsilon(1e-5));
  double brute = 0.0;
  REQUIRE(dp_chain_brute_force_log_z(3, j, 3, 0, &brute) == DP_OK);
  CHECK(brute == doctest::Approx(v));
  REQUIRE(dp_relative_error(9.0, 10.0, &v) == DP_OK);
  CHECK(v == doctest::Approx(0.1));
  CHECK(dp_relative_error(9.0, 0.0, &v) == DP_ERR_INVALID_ARGUMENT);

  double alphas[4];
  REQUIRE(dp_anneal_geometric(8.0, 3, alphas) == DP_OK);
  CHECK(alphas[3] == doctest::Approx(8.0));
  REQUIRE(dp_anneal_alpha_reaching(2.0, 4.0, &v) == DP_OK);
  CHECK(v == doctest::Approx(2.0));
  dp_partition_destroy(p);
  dp_model_destroy(m);
}

TEST_CASE("estimates through the C API") {
  dp_model* m = make_model(1.5);
  dp_partition* p = make_partition(m);
  double exact = 0.0;
  REQUIRE(dp_brute_force_log_z(m, 0, &exact) == DP_OK);
  double exact_d = 0.0;
  REQUIRE(dp_brute_force_log_zd(m, p, 0, &exact_d) == DP_OK);
  CHECK(std::abs(exact_d - exact - 9 * std::log(3.0)) < 1e-9);
  double chi2 = 0.0;
  REQUIRE(dp_exact_chi_squared(m, p, DP_METHOD_IMPORTANCE, 0, &chi2) == DP_OK);
  CHECK(chi2 > 0.0);

  dp_sampler_spec spec;
  dp_sampler_spec_init(&spec);
  CHECK(spec.samples == 100000);
  spec.samples = 50000;
  spec.seed = 9;
  spec.trace_stride = 10000;
  std::vector<dp_trace_point> trace;
  dp_estimate e{};
  REQUIRE(dp_estimate_run(
              m, p, &spec, &e,
              [](const dp_trace_point* t, void* user) {
                static_cast<std::vector<dp_trace_point>*>(user)->push_back(*t);
              },
              &trace) == DP_OK);
  CHECK(e.samples == 50000);
  CHECK(e.trace_length == 5);
  REQUIRE(trace.size() == 5);
  CHECK(trace.back().samples == 50000);
  CHECK(trace.back().log_z_per_site == doctest::Approx(e.log_z_per_site));
  CHECK(std::abs(e.log_z_hat - exact) / exact < 2e-3);

  dp_estimate again{};
  REQUIRE(dp_estimate_run(m, p, &spec, &again, nullptr, nullptr) == DP_OK);
  CHECK(std::memcmp(&e, &again, sizeof e) == 0);

  spec.method = DP_METHOD_ANNEALED;
  const double alphas[] = {1.0, 1.5, 2.0};
  spec.alphas = alphas;
  spec.num_alphas = 3;
  spec.sweeps_per_level = 2;
  spec.samples = 2000;
  REQUIRE(dp_estimate_run(m, p, &spec, &e, nullptr, nullptr) == DP_OK);
  CHECK(e.method == DP_METHOD_ANNEALED);
  CHECK(std::abs(e.log_z_hat - exact) / exact < 1e-2);

  dp_model* mixed = nullptr;
  const auto tree = constant(2.0);
  REQUIRE(dp_model_with_side_couplings(m, p, DP_SIDE_B, &tree, &mixed) == DP_OK);
  std::vector<double> j(18);
  REQUIRE(dp_model_couplings(mixed, j.data(), j.size()) == DP_OK);
  int strong = 0;
  for (double x : j) strong += x == 2.0;
  CHECK(strong == 8);
  dp_model_destroy(mixed);
  dp_partition_destroy(p);
  dp_model_destroy(m);
}

}  // TEST_SUITE
