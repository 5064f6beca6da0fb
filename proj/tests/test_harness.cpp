// Tests for the experiment harness: config parsing and overrides, CSV/JSON
// round trips, the statistic registry against independent oracles, sweep
// determinism across worker counts, the Glauber sampler against exact
// enumeration (including per-site detailed balance), and scaling fits.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "sklab/disorder.hpp"
#include "sklab/gibbs_exact.hpp"
#include "sklab/harness.hpp"
#include "sklab/scalar_rs.hpp"
#include "sklab/spectral.hpp"

using namespace sklab;
using harness::ExperimentConfig;
using harness::ResultRow;

namespace {

// RAII guard that pins an environment variable for one test body.
struct EnvGuard {
  std::string name;
  std::string old_value;
  bool had_old = false;
  EnvGuard(const std::string& var, const std::string& value) : name(var) {
    if (const char* v = std::getenv(var.c_str())) {
      had_old = true;
      old_value = v;
    }
    ::setenv(var.c_str(), value.c_str(), 1);
  }
  ~EnvGuard() {
    if (had_old)
      ::setenv(name.c_str(), old_value.c_str(), 1);
    else
      ::unsetenv(name.c_str());
  }
};

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  harness::emit_csv(rows, os);
  return os.str();
}

}  // namespace

// ── configuration ────────────────────────────────────────────────────────────

TEST_CASE("config defaults and full text parse") {
  const ExperimentConfig def;
  CHECK(def.beta == std::vector<double>{0.5});
  CHECK(def.h == std::vector<double>{0.5});
  CHECK(def.n_list == std::vector<int>{14});
  CHECK(def.samples == 1);
  CHECK(def.seed == 1);
  CHECK(def.k_max == 16);
  CHECK(def.variant == "conditional");
  CHECK(def.workers == 1);
  CHECK_NOTHROW(def.validate());

  const std::string text = R"(
# full-key example
command = sweep
beta = 0.4, 0.8     # grid
h = 0.3
n_list = 8, 10, 12
samples = 25
seed = 42
k_max = 9
variant = tilde
statistic = two_point_sq
out = results.csv
workers = 3
)";
  const ExperimentConfig c = harness::parse_config_text(text);
  CHECK(c.command == harness::Command::sweep);
  CHECK(c.beta == std::vector<double>{0.4, 0.8});
  CHECK(c.h == std::vector<double>{0.3});
  CHECK(c.n_list == std::vector<int>{8, 10, 12});
  CHECK(c.samples == 25);
  CHECK(c.seed == 42);
  CHECK(c.k_max == 9);
  CHECK(c.variant == "tilde");
  CHECK(c.statistic == "two_point_sq");
  CHECK(c.out == "results.csv");
  CHECK(c.workers == 3);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config n key sets a singleton size list; base carries over") {
  ExperimentConfig base;
  base.samples = 7;
  const ExperimentConfig c = harness::parse_config_text("n = 16\n", base);
  CHECK(c.n_list == std::vector<int>{16});
  CHECK(c.samples == 7);  // untouched keys keep the base value
}

TEST_CASE("config parse rejects malformed input") {
  CHECK_THROWS_AS((void)harness::parse_config_text("bogus_key = 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::parse_config_text("just a line\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::parse_config_text("beta = 0.5x\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::parse_config_text("samples = many\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::parse_config_text("beta = \n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      (void)harness::load_config("/nonexistent/sklab.cfg"),
      std::runtime_error);
}

TEST_CASE("config validation catches out-of-range values") {
  ExperimentConfig c;
  c.samples = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.k_max = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.beta.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.n_list = {0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.beta = {-0.1};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.variant = "sideways";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("apply_override wins over file values") {
  ExperimentConfig c = harness::parse_config_text("samples = 4\nseed = 2\n");
  harness::apply_override(c, "samples", "11");
  CHECK(c.samples == 11);
  CHECK(c.seed == 2);
  CHECK_THROWS_AS(harness::apply_override(c, "nope", "1"),
                  std::invalid_argument);
}

TEST_CASE("effective_workers respects the SKLAB_THREADS cap") {
  {
    EnvGuard guard("SKLAB_THREADS", "2");
    CHECK(harness::effective_workers(8) == 2);
    CHECK(harness::effective_workers(1) == 1);
  }
  {
    EnvGuard guard("SKLAB_THREADS", "not_a_number");
    CHECK(harness::effective_workers(3) == 3);  // unparsable cap is ignored
  }
  ::unsetenv("SKLAB_THREADS");
  CHECK(harness::effective_workers(5) == 5);
  CHECK(harness::effective_workers(0) == 1);  // floor of one worker
}

// ── CSV / JSON ───────────────────────────────────────────────────────────────

TEST_CASE("CSV round trip is exact, including quoting and doubles") {
  std::vector<ResultRow> rows;
  ResultRow a;
  a.experiment = "sweep";
  a.param_json = R"({"beta":0.5,"h":0.4,"n":10})";  // embedded quotes + commas
  a.statistic = "two_point_sq";
  a.value = 1.0 / 3.0;
  a.std_error = 1e-17;
  a.count = 100;
  rows.push_back(a);
  ResultRow b;
  b.experiment = "odd,name\nwith newline";
  b.param_json = "\"только\" quotes";
  b.statistic = "x";
  b.value = -0.0;
  b.std_error = 6.02e23;
  b.count = 0;
  rows.push_back(b);

  const std::string text = csv_of(rows);
  CHECK(text.rfind("experiment,param_json,statistic,value,stderr,count\n",
                   0) == 0);
  std::istringstream is(text);
  const std::vector<ResultRow> back = harness::parse_csv(is);
  REQUIRE(back.size() == rows.size());
  CHECK(back[0] == rows[0]);
  CHECK(back[1].experiment == rows[1].experiment);
  CHECK(back[1].param_json == rows[1].param_json);
  CHECK(back[1].value == rows[1].value);
  CHECK(back[1].std_error == rows[1].std_error);

  // header-only file round trips to zero rows
  std::istringstream empty_is(csv_of({}));
  CHECK(harness::parse_csv(empty_is).empty());
}

TEST_CASE("CSV parse rejects malformed input") {
  std::istringstream no_header("a,b\n");
  CHECK_THROWS_AS((void)harness::parse_csv(no_header), std::runtime_error);
  std::istringstream short_row(
      "experiment,param_json,statistic,value,stderr,count\nx,y,z\n");
  CHECK_THROWS_AS((void)harness::parse_csv(short_row), std::runtime_error);
  std::istringstream bad_value(
      "experiment,param_json,statistic,value,stderr,count\nx,p,s,oops,0,1\n");
  CHECK_THROWS_AS((void)harness::parse_csv(bad_value), std::invalid_argument);
  std::istringstream open_quote(
      "experiment,param_json,statistic,value,stderr,count\n\"x,p,s,1,0,1\n");
  CHECK_THROWS_AS((void)harness::parse_csv(open_quote), std::runtime_error);
  std::istringstream nothing("");
  CHECK_THROWS_AS((void)harness::parse_csv(nothing), std::runtime_error);
}

TEST_CASE("JSON emission carries every field") {
  ResultRow r;
  r.experiment = "scaling";
  r.param_json = R"({"n":8})";
  r.statistic = "s";
  r.value = 2.5;
  r.std_error = 0.25;
  r.count = 12;
  std::ostringstream os;
  harness::emit_json({r}, os);
  const nlohmann::json j = nlohmann::json::parse(os.str());
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["experiment"] == "scaling");
  CHECK(j[0]["param_json"] == R"({"n":8})");
  CHECK(j[0]["statistic"] == "s");
  CHECK(j[0]["value"].get<double>() == 2.5);
  CHECK(j[0]["stderr"].get<double>() == 0.25);
  CHECK(j[0]["count"].get<long>() == 12);
}

TEST_CASE("emit dispatches on format and reports unwritable paths") {
  ResultRow r;
  r.experiment = "e";
  r.param_json = "{}";
  r.statistic = "s";
  r.value = 1.0;
  r.std_error = 0.0;
  r.count = 1;
  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv_path = (dir / "sklab_test_rows.csv").string();
  const std::string json_path = (dir / "sklab_test_rows.json").string();

  harness::emit({r}, "csv", csv_path);
  std::ifstream csv_in(csv_path);
  const std::vector<ResultRow> back = harness::parse_csv(csv_in);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == r);

  harness::emit({r}, "json", json_path);
  std::ifstream json_in(json_path);
  const nlohmann::json j = nlohmann::json::parse(json_in);
  CHECK(j[0]["value"].get<double>() == 1.0);

  CHECK_THROWS_AS(harness::emit({r}, "yaml", csv_path),
                  std::invalid_argument);
  CHECK_THROWS_AS(harness::emit({r}, "csv", "/nonexistent/dir/out.csv"),
                  std::runtime_error);
  std::filesystem::remove(csv_path);
  std::filesystem::remove(json_path);
}

// ── statistic registry ───────────────────────────────────────────────────────

TEST_CASE("registry lists the documented statistics in name order") {
  const std::vector<std::string> names = harness::statistic_names();
  const std::vector<std::string> expected = {
      "energy_per_site", "op_norm_M",       "overlap_mean",
      "overlap_var",     "resolvent_error", "t12_sq_scaled",
      "tap_residual_sq", "two_point_sq"};
  CHECK(names == expected);
  for (const std::string& name : names)
    CHECK(harness::statistic_registry().count(name) == 1);
}

TEST_CASE("statistics agree with independent oracles on one instance") {
  const int n = 10;
  const double beta = 0.6, h = 0.4;
  harness::StatisticContext ctx = harness::make_instance(n, beta, h, 21);
  const auto& reg = harness::statistic_registry();

  CHECK(reg.at("energy_per_site")(ctx) ==
        doctest::Approx(ctx.gibbs.mean_energy / n).epsilon(1e-14));
  CHECK(reg.at("overlap_mean")(ctx) ==
        doctest::Approx(1.0 - ctx.gibbs.correlation.trace() / n)
            .epsilon(1e-14));
  CHECK(reg.at("two_point_sq")(ctx) ==
        doctest::Approx(ctx.gibbs.correlation.squaredNorm() / (n * n))
            .epsilon(1e-14));
  CHECK(reg.at("t12_sq_scaled")(ctx) ==
        doctest::Approx(ctx.gibbs.correlation.squaredNorm() / n)
            .epsilon(1e-14));

  // dense eigensolver oracle for the operator norm
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ctx.gibbs.correlation);
  const double norm_oracle = std::max(std::abs(es.eigenvalues().minCoeff()),
                                      std::abs(es.eigenvalues().maxCoeff()));
  CHECK(reg.at("op_norm_M")(ctx) == doctest::Approx(norm_oracle).epsilon(1e-8));

  // overlap-variance closed form computed by the enumeration module
  const double q = scalar_rs::solve_q({beta, h});
  const gibbs_exact::OverlapStats os = gibbs_exact::overlap_stats(ctx.system, q);
  CHECK(reg.at("overlap_var")(ctx) == doctest::Approx(os.var_R).epsilon(1e-12));

  // surrogate-resolvent error via an explicit dense inverse
  const Eigen::MatrixXd surrogate =
      ((1.0 + beta * beta) * Eigen::MatrixXd::Identity(n, n) - beta * ctx.G)
          .inverse();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctx.gibbs.correlation - surrogate);
  CHECK(reg.at("resolvent_error")(ctx) ==
        doctest::Approx(svd.singularValues()(0)).epsilon(1e-8));
}

TEST_CASE("cavity-representation residual matches a from-scratch evaluation") {
  const int n = 8;
  const double beta = 0.7, h = 0.3;
  harness::StatisticContext ctx = harness::make_instance(n, beta, h, 5);

  const gibbs_exact::GibbsSolution cav =
      gibbs_exact::enumerate(gibbs_exact::cavity(ctx.system, 0));
  const double m0 = ctx.gibbs.magnetization[0];
  double acc = 0.0;
  for (int j = 1; j < n; ++j) {
    double pred = 0.0;
    for (int k = 1; k < n; ++k)
      pred += ctx.G(0, k) * cav.correlation(k - 1, j - 1);
    pred *= beta * (1.0 - m0 * m0);
    acc += std::pow(ctx.gibbs.correlation(0, j) - pred, 2);
  }
  acc /= n - 1;
  CHECK(harness::statistic_registry().at("tap_residual_sq")(ctx) ==
        doctest::Approx(acc).epsilon(1e-12));
  CHECK(acc >= 0.0);

  // the cavity solve is cached: repeated access returns the same object
  const auto* first = &ctx.cavity0();
  CHECK(first == &ctx.cavity0());
}

// ── sweeps ───────────────────────────────────────────────────────────────────

namespace {

ExperimentConfig small_sweep_config() {
  ExperimentConfig c;
  c.command = harness::Command::sweep;
  c.beta = {0.5};
  c.h = {0.4};
  c.n_list = {9};
  c.samples = 6;
  c.seed = 100;
  return c;
}

}  // namespace

TEST_CASE("sweep with one sample reproduces direct evaluation") {
  ExperimentConfig c = small_sweep_config();
  c.samples = 1;
  const harness::SweepResult res = harness::run_sweep(c);
  CHECK(res.failed_instances == 0);
  const auto& reg = harness::statistic_registry();
  REQUIRE(res.rows.size() == reg.size());

  harness::StatisticContext ctx =
      harness::make_instance(c.n_list[0], c.beta[0], c.h[0], c.seed);
  std::size_t i = 0;
  for (const auto& [name, fn] : reg) {
    CHECK(res.rows[i].statistic == name);
    CHECK(res.rows[i].value == fn(ctx));  // same code path: exact equality
    CHECK(res.rows[i].std_error == 0.0);
    CHECK(res.rows[i].count == 1);
    CHECK(res.rows[i].experiment == "sweep");
    CHECK(res.rows[i].param_json == R"({"beta":0.5,"h":0.4,"n":9})");
    ++i;
  }
}

TEST_CASE("sweep output is byte-identical across worker counts") {
  ExperimentConfig c = small_sweep_config();
  c.workers = 1;
  const harness::SweepResult serial = harness::run_sweep(c);
  c.workers = 4;
  const harness::SweepResult parallel = harness::run_sweep(c);
  CHECK(serial.rows == parallel.rows);
  CHECK(csv_of(serial.rows) == csv_of(parallel.rows));

  // and a repeated run is bit-for-bit reproducible
  const harness::SweepResult again = harness::run_sweep(c);
  CHECK(again.rows == parallel.rows);
}

TEST_CASE("sweep covers the full parameter grid in declared order") {
  ExperimentConfig c;
  c.beta = {0.4, 0.6};
  c.h = {0.3};
  c.n_list = {6, 8};
  c.samples = 2;
  c.seed = 3;
  const harness::SweepResult res = harness::run_sweep(c);
  const std::size_t per_combo = harness::statistic_registry().size();
  REQUIRE(res.rows.size() == 4 * per_combo);
  CHECK(res.rows[0 * per_combo].param_json == R"({"beta":0.4,"h":0.3,"n":6})");
  CHECK(res.rows[1 * per_combo].param_json == R"({"beta":0.4,"h":0.3,"n":8})");
  CHECK(res.rows[2 * per_combo].param_json == R"({"beta":0.6,"h":0.3,"n":6})");
  CHECK(res.rows[3 * per_combo].param_json == R"({"beta":0.6,"h":0.3,"n":8})");
  for (const ResultRow& row : res.rows) {
    CHECK(row.count == 2);
    CHECK(std::isfinite(row.value));
    CHECK(row.std_error >= 0.0);
  }
}

TEST_CASE("sweep flags unreachable instances instead of aborting") {
  ExperimentConfig c = small_sweep_config();
  c.n_list = {9, 25};  // 25 exceeds the exact-enumeration cap
  c.samples = 3;
  const harness::SweepResult res = harness::run_sweep(c);
  CHECK(res.failed_instances == 3);
  const std::size_t per_combo = harness::statistic_registry().size();
  REQUIRE(res.rows.size() == 2 * per_combo);
  for (std::size_t i = 0; i < per_combo; ++i) {
    CHECK(res.rows[i].count == 3);  // the feasible size keeps its samples
    CHECK(res.rows[per_combo + i].count == 0);
    CHECK(res.rows[per_combo + i].value == 0.0);
    CHECK(res.rows[per_combo + i].std_error == 0.0);
  }
}

// ── Glauber sampler ──────────────────────────────────────────────────────────

TEST_CASE("heat-bath flip probabilities satisfy detailed balance") {
  const int n = 3;
  const Eigen::MatrixXd G = disorder::sample_coupling_only(n, 77);
  const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, 0.9, 0.2);

  // exact Boltzmann weights over all 2^n configurations
  const auto weight = [&](const Eigen::VectorXd& sigma) {
    double e = s.fields.dot(sigma);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        e += s.couplings(i, j) * sigma[i] * sigma[j];
    return std::exp(e);
  };

  for (int mask = 0; mask < (1 << n); ++mask) {
    Eigen::VectorXd sigma(n);
    for (int i = 0; i < n; ++i) sigma[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    for (int u = 0; u < n; ++u) {
      Eigen::VectorXd flipped = sigma;
      flipped[u] = -sigma[u];
      // the heat-bath draw of σ_u is independent of its current value
      const double p_up = harness::heat_bath_flip_probability(s, sigma, u);
      CHECK(harness::heat_bath_flip_probability(s, flipped, u) ==
            doctest::Approx(p_up).epsilon(1e-15));
      const double p_to_sigma = sigma[u] > 0 ? p_up : 1.0 - p_up;
      const double p_to_flip = flipped[u] > 0 ? p_up : 1.0 - p_up;
      // π(σ')·P_u(σ'→σ) = π(σ)·P_u(σ→σ')
      CHECK(weight(flipped) * p_to_sigma ==
            doctest::Approx(weight(sigma) * p_to_flip).epsilon(1e-12));
    }
  }

  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(n);
  CHECK_THROWS_AS(
      (void)harness::heat_bath_flip_probability(s, sigma, 3),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)harness::heat_bath_flip_probability(s, sigma.head(2), 0),
      std::invalid_argument);
}

TEST_CASE("Glauber sampler recovers independent spins at zero coupling") {
  const int n = 20;
  const double h = 0.7;
  const Eigen::MatrixXd G = disorder::sample_coupling_only(n, 4);
  const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, 0.0, h);
  const harness::GlauberResult r =
      harness::glauber_estimate(s, 30000, 2000, 11, {{0, 1}, {5, 9}});
  CHECK(r.measurement_sweeps == 28000);
  CHECK(r.batches == 32);
  const double target = std::tanh(h);
  for (int i = 0; i < n; ++i) {
    CHECK(r.m_std_error[i] > 0.0);
    CHECK(std::abs(r.m[i] - target) < 5.0 * r.m_std_error[i] + 1e-3);
  }
  for (std::size_t p = 0; p < 2; ++p)
    CHECK(std::abs(r.pair_corr[p]) < 5.0 * r.pair_corr_std_error[p] + 1e-3);
}

TEST_CASE("Glauber sampler matches exact enumeration on a small system") {
  const int n = 12;
  const double beta = 0.5, h = 0.5;
  const Eigen::MatrixXd G = disorder::sample_coupling_only(n, 31);
  const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, beta, h);
  const gibbs_exact::GibbsSolution exact = gibbs_exact::enumerate(s);

  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {2, 7}, {4, 11}};
  const harness::GlauberResult r =
      harness::glauber_estimate(s, 200000, 5000, 17, pairs);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(r.m[i] - exact.magnetization[i]) <
          5.0 * r.m_std_error[i] + 1e-3);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    CHECK(std::abs(r.pair_corr[p] -
                   exact.correlation(pairs[p].first, pairs[p].second)) <
          5.0 * r.pair_corr_std_error[p] + 1e-3);
}

TEST_CASE("Glauber sampler is deterministic in the seed") {
  const Eigen::MatrixXd G = disorder::sample_coupling_only(8, 2);
  const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, 0.6, 0.3);
  const harness::GlauberResult a = harness::glauber_estimate(s, 4000, 500, 9);
  const harness::GlauberResult b = harness::glauber_estimate(s, 4000, 500, 9);
  CHECK(a.m == b.m);
  const harness::GlauberResult c = harness::glauber_estimate(s, 4000, 500, 10);
  CHECK((a.m - c.m).norm() > 0.0);
}

TEST_CASE("Glauber sampler validates its arguments") {
  const Eigen::MatrixXd G = disorder::sample_coupling_only(6, 1);
  const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, 0.5, 0.5);
  CHECK_THROWS_AS((void)harness::glauber_estimate(s, 100, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::glauber_estimate(s, 100, -1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::glauber_estimate(s, 100, 10, 1, {{0, 6}}),
                  std::invalid_argument);
}

TEST_CASE("short Glauber runs shrink the batch count instead of failing") {
  const Eigen::MatrixXd G = disorder::sample_coupling_only(5, 3);
  const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, 0.4, 0.2);
  const harness::GlauberResult r = harness::glauber_estimate(s, 11, 1, 5);
  CHECK(r.measurement_sweeps == 10);
  CHECK(r.batches == 10);
  const harness::GlauberResult one = harness::glauber_estimate(s, 2, 1, 5);
  CHECK(one.batches == 1);
  CHECK(one.m_std_error.norm() == 0.0);  // a single batch carries no spread
}

// ── scaling studies ──────────────────────────────────────────────────────────

TEST_CASE("scaling study fits a negative size exponent for two-point decay") {
  const harness::ScalingResult res = harness::scaling_study(
      "two_point_sq", {8, 10, 12}, 40, 0.6, 0.4, 7, 2);
  CHECK(res.slope < 0.0);
  CHECK(res.ci_lo <= res.slope);
  CHECK(res.slope <= res.ci_hi);
  CHECK(res.ci_hi < 0.0);  // decay is resolvable even at 40 samples
  REQUIRE(res.mean.size() == 3);
  CHECK(res.mean[0] > res.mean[1]);
  CHECK(res.mean[1] > res.mean[2]);
  REQUIRE(res.rows.size() == 3 + 3);
  CHECK(res.rows[0].param_json == R"({"beta":0.6,"h":0.4,"n":8})");
  CHECK(res.rows[3].statistic == "two_point_sq_slope");
  CHECK(res.rows[4].statistic == "two_point_sq_slope_ci_lo");
  CHECK(res.rows[5].statistic == "two_point_sq_slope_ci_hi");
  CHECK(res.rows[3].value == res.slope);
  CHECK(res.rows[3].param_json == R"({"beta":0.6,"h":0.4,"n_list":[8,10,12]})");
}

TEST_CASE("scaling study is deterministic and worker-count independent") {
  const harness::ScalingResult a =
      harness::scaling_study("overlap_mean", {6, 8}, 12, 0.5, 0.5, 19, 1);
  const harness::ScalingResult b =
      harness::scaling_study("overlap_mean", {6, 8}, 12, 0.5, 0.5, 19, 3);
  CHECK(a.rows == b.rows);
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);
}

TEST_CASE("scaling study validates statistic, sizes, and positivity") {
  CHECK_THROWS_AS((void)harness::scaling_study("no_such", {8, 10}, 2, 0.5,
                                               0.5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::scaling_study("two_point_sq", {8}, 2, 0.5,
                                               0.5, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)harness::scaling_study("two_point_sq", {8, 10}, 0,
                                               0.5, 0.5, 1),
                  std::invalid_argument);
  // at β = h = 0 the mean energy is identically zero: log-log fit undefined
  CHECK_THROWS_AS((void)harness::scaling_study("energy_per_site", {4, 6}, 2,
                                               0.0, 0.0, 1),
                  std::domain_error);
  // infeasible sizes propagate as hard errors rather than silent gaps
  CHECK_THROWS_AS((void)harness::scaling_study("two_point_sq", {8, 25}, 2,
                                               0.5, 0.5, 1),
                  std::invalid_argument);
}
