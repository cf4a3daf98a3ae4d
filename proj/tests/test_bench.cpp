#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "srk/bench.hpp"
#include "srk/report.hpp"

using namespace srk;

namespace {

StudyConfig tiny_config() {
  StudyConfig cfg;
  cfg.problem_id = "eq1";
  cfg.schemes = {"EM", "SRI2s1"};
  cfg.hmax_exp = 2;
  cfg.hmin_exp = 5;
  cfg.paths = 48;
  cfg.seed = 42;
  cfg.fit_window = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("cost model rows") {
  // Worked example: two-stage scheme, d = m = 10, h = 2^-6.
  CHECK(rho(10, 1.0 / 64) == 102);
  CHECK(cost("SRI2s1", 10, 10, 1.0 / 64) == 10 + 2 * 100 + 10 + 102);
  CHECK(cost("EM", 10, 10, 1.0 / 64) == 10 + 100 + 10);
  CHECK(cost("MIL", 2, 2, 1.0 / 64) == 2 + 4 + 8 + 2 + 8);
  CHECK(cost("SPLI", 2, 2, 1.0 / 64) == 2 + 4 + 8 + 2 + 8);  // dm^2 = d^2 m here
  CHECK(cost("SPLI", 3, 2, 1.0 / 64) == 3 + 6 + 12 + 2 + 8);
  CHECK(cost("MIL", 3, 2, 1.0 / 64) == 3 + 6 + 18 + 2 + 8);
  CHECK(cost("SRIC2s1", 10, 10, 1.0) == 10 + 200 + 10);  // no pair budget
  CHECK(cost("SRA2s2", 5, 3, 0.125) == 10 + 15 + 3);
  CHECK(cost("SRI1", 4, 4, 0.25) == 4 + 3 * 16 + 4 + rho(4, 0.25));
  CHECK(cost_uses_pair_integrals("MIL"));
  CHECK(cost_uses_pair_integrals("SRI2s1"));
  CHECK(cost_uses_pair_integrals("SRS2s2"));
  CHECK_FALSE(cost_uses_pair_integrals("EM"));
  CHECK_FALSE(cost_uses_pair_integrals("SRIC2s1"));
  CHECK_FALSE(cost_uses_pair_integrals("SRA2s1"));
  CHECK(has_cost_model("SRI1"));
  CHECK(has_cost_model("SRIC1"));
  CHECK_FALSE(has_cost_model("SSBE"));
  CHECK_THROWS_AS((void)cost("SSBE", 1, 1, 0.5), std::invalid_argument);
  CHECK(cost_model_names().size() == 15);
}

TEST_CASE("metric names round trip") {
  for (const char* s : {"terminal-l2", "terminal-lp", "sup-grid-lp"}) {
    CAPTURE(s);
    CHECK(to_string(metric_from_string(s)) == s);
  }
  CHECK_THROWS_AS((void)metric_from_string("l2"), std::invalid_argument);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(tiny_config().validate());
  StudyConfig bad = tiny_config();
  bad.problem_id = "eqX";
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.schemes = {"EM", "nope"};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.hmax_exp = 6;  // larger exponent than hmin_exp
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.paths = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.fit_window = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.p = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.use_reference = true;
  bad.reference.href_exp = 4;  // coarser than hmin_exp
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  // One path is allowed: degenerate but well defined.
  StudyConfig one = tiny_config();
  one.paths = 1;
  CHECK_NOTHROW(one.validate());
}

TEST_CASE("config hash tracks every field except threads") {
  const StudyConfig base = tiny_config();
  const std::uint64_t h0 = base.config_hash();
  StudyConfig c = base;
  c.threads = 8;
  CHECK(c.config_hash() == h0);

  c = base;
  c.problem_id = "eq2";
  CHECK(c.config_hash() != h0);
  c = base;
  c.schemes = {"EM"};
  CHECK(c.config_hash() != h0);
  c = base;
  c.paths = 17;
  CHECK(c.config_hash() != h0);
  c = base;
  c.seed = 43;
  CHECK(c.config_hash() != h0);
  c = base;
  c.metric = ErrorMetric::sup_grid_lp;
  CHECK(c.config_hash() != h0);
  c = base;
  c.rho_reading = RhoReading::sqrt3_h;
  CHECK(c.config_hash() != h0);
  c = base;
  c.fit_window = 4;
  CHECK(c.config_hash() != h0);
}

TEST_CASE("least-squares order recovery on synthetic data") {
  std::vector<std::pair<double, double>> pts;
  for (int e = 2; e <= 8; ++e) {
    const double h = std::ldexp(1.0, -e);
    pts.push_back({h, 3.0 * std::pow(h, 1.5)});
  }
  CHECK(empirical_order(pts) == doctest::Approx(1.5).epsilon(1e-12));
  // A contaminated coarse level is excluded by the window.
  pts.front().second = 100.0;
  CHECK(empirical_order(pts, 3) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(empirical_order(pts) != doctest::Approx(1.5).epsilon(1e-3));
  // Degenerate inputs are rejected rather than fitted.
  std::vector<std::pair<double, double>> zeros = {{0.5, 0.0}, {0.25, 0.0}};
  CHECK_THROWS_AS((void)empirical_order(zeros), std::invalid_argument);
  std::vector<std::pair<double, double>> single = {{0.5, 1.0}};
  CHECK_THROWS_AS((void)empirical_order(single), std::invalid_argument);
}

TEST_CASE("effective order against an h-independent cost row") {
  std::vector<std::pair<double, double>> pts;
  for (int e = 3; e <= 7; ++e) {
    const double h = std::ldexp(1.0, -e);
    pts.push_back({h, 0.4 * h});
  }
  const EffectiveOrder eo = effective_order(pts, "EM", 1, 1);
  CHECK(eo.lsq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eo.pairwise == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("effective order dips where the auxiliary budget grows") {
  // Exact order-one data at m = 4 step sizes fine enough for the rho term
  // to matter: per-step costs 40 + rho are 117 at 2^-11 and 145 at 2^-12,
  // so the pairwise ratio is 1 / log2(2 * 145 / 117) = 0.7636.
  std::vector<std::pair<double, double>> pts;
  for (int e = 10; e <= 12; ++e) {
    const double h = std::ldexp(1.0, -e);
    pts.push_back({h, 0.4 * h});
  }
  CHECK(cost("SRI2s1", 4, 4, std::ldexp(1.0, -11)) == 117.0);
  CHECK(cost("SRI2s1", 4, 4, std::ldexp(1.0, -12)) == 145.0);
  const EffectiveOrder ep = effective_order(pts, "SRI2s1", 4, 4);
  CHECK(ep.pairwise ==
        doctest::Approx(1.0 / std::log2(2.0 * 145.0 / 117.0)).epsilon(1e-9));
  CHECK(ep.pairwise > 0.55);
  CHECK(ep.pairwise < 0.80);
  CHECK(ep.lsq < 1.0);
  CHECK(ep.lsq > 0.5);
}

TEST_CASE("study on a closed-form problem") {
  const StudyConfig cfg = tiny_config();
  const ConvergenceReport rep = run_study(cfg);
  REQUIRE(rep.rows.size() == 2);
  REQUIRE(rep.summaries.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    REQUIRE(rep.rows[s].size() == 4);  // levels 2..5
    double prev_h = 1e9;
    for (const LevelResult& r : rep.rows[s]) {
      CHECK(r.h < prev_h);
      prev_h = r.h;
      CHECK(r.h == std::ldexp(1.0, -r.h_exp));
      CHECK(r.n_steps == (std::int64_t(1) << r.h_exp));
      CHECK(r.err > 0.0);
      CHECK(r.mc_stderr >= 0.0);
      CHECK(r.total_cost ==
            doctest::Approx(double(r.n_steps) * r.cost_per_step).epsilon(1e-12));
      CHECK(r.counters.gaussians > 0);
    }
    const std::vector<int>& fe = rep.summaries[s].fit_exps;
    CHECK(fe.size() >= 2);
    CHECK(fe.size() <= 3);
    for (std::size_t i = 0; i < fe.size(); ++i) {
      CHECK(fe[i] >= 2);
      CHECK(fe[i] <= 5);
      if (i) CHECK(fe[i] > fe[i - 1]);
    }
    CHECK_FALSE(std::isnan(rep.summaries[s].gamma));
  }
  // EM error should exceed the order-one scheme's error at the finest level.
  CHECK(rep.rows[0].back().err > rep.rows[1].back().err);
}

TEST_CASE("identical runs are byte-identical, across thread counts") {
  StudyConfig cfg = tiny_config();
  cfg.threads = 1;
  const std::string a = report_to_csv(run_study(cfg));
  const std::string b = report_to_csv(run_study(cfg));
  CHECK(a == b);
  cfg.threads = 3;
  const std::string c = report_to_csv(run_study(cfg));
  CHECK(a == c);
  cfg.threads = 0;  // hardware concurrency
  const std::string d = report_to_csv(run_study(cfg));
  CHECK(a == d);
}

TEST_CASE("schemes without a cost row get NaN cost columns") {
  StudyConfig cfg = tiny_config();
  cfg.schemes = {"SSBE"};
  cfg.paths = 4;
  const ConvergenceReport rep = run_study(cfg);
  for (const LevelResult& r : rep.rows[0]) {
    CHECK(std::isnan(r.cost_per_step));
    CHECK(std::isnan(r.total_cost));
  }
  CHECK(std::isnan(rep.summaries[0].p_eff));
  CHECK(std::isnan(rep.summaries[0].pairwise_p_eff));
  CHECK_FALSE(std::isnan(rep.summaries[0].gamma));

  // NaN survives both serializations.
  const ConvergenceReport r1 = report_from_csv(report_to_csv(rep));
  CHECK(std::isnan(r1.rows[0][0].cost_per_step));
  const ConvergenceReport r2 = report_from_json(report_to_json(rep));
  CHECK(std::isnan(r2.rows[0][0].cost_per_step));
  CHECK(std::isnan(r2.summaries[0].p_eff));
}

TEST_CASE("sup-over-grid metric dominates the terminal metric") {
  StudyConfig cfg = tiny_config();
  cfg.schemes = {"EM"};
  cfg.hmax_exp = 3;
  cfg.hmin_exp = 4;
  const ConvergenceReport term = run_study(cfg);
  cfg.metric = ErrorMetric::sup_grid_lp;
  const ConvergenceReport sup = run_study(cfg);
  for (std::size_t l = 0; l < term.rows[0].size(); ++l)
    CHECK(sup.rows[0][l].err >= term.rows[0][l].err * (1.0 - 1e-12));
}

TEST_CASE("lp metric with p = 2 matches the l2 metric") {
  StudyConfig cfg = tiny_config();
  cfg.schemes = {"EM"};
  cfg.hmax_exp = 3;
  cfg.hmin_exp = 4;
  const ConvergenceReport a = run_study(cfg);
  cfg.metric = ErrorMetric::terminal_lp;
  cfg.p = 2.0;
  const ConvergenceReport b = run_study(cfg);
  for (std::size_t l = 0; l < a.rows[0].size(); ++l)
    CHECK(a.rows[0][l].err == doctest::Approx(b.rows[0][l].err).epsilon(1e-12));
}

TEST_CASE("monte carlo error shrinks like one over root paths") {
  StudyConfig cfg = tiny_config();
  cfg.schemes = {"EM"};
  cfg.hmax_exp = 4;
  cfg.hmin_exp = 4;
  cfg.paths = 256;
  const ConvergenceReport small = run_study(cfg);
  cfg.paths = 1024;
  const ConvergenceReport large = run_study(cfg);
  const double ratio =
      small.rows[0][0].mc_stderr / large.rows[0][0].mc_stderr;
  // Quadrupling the paths should halve the standard error, loosely.
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.9);
}

TEST_CASE("single-path study is degenerate but defined") {
  StudyConfig cfg = tiny_config();
  cfg.schemes = {"EM"};
  cfg.paths = 1;
  const ConvergenceReport rep = run_study(cfg);
  CHECK(rep.rows[0][0].err > 0.0);
  CHECK(rep.rows[0][0].mc_stderr == 0.0);
}

TEST_CASE("reference mode on a problem without a closed form") {
  StudyConfig cfg;
  cfg.problem_id = "eq5";
  cfg.schemes = {"EM", "SRI2s1"};
  cfg.hmax_exp = 3;
  cfg.hmin_exp = 5;
  cfg.paths = 8;
  cfg.seed = 7;
  cfg.fit_window = 2;
  cfg.reference.href_exp = 8;
  const ConvergenceReport rep = run_study(cfg);  // forced by missing closed form
  for (std::size_t s = 0; s < 2; ++s)
    for (const LevelResult& r : rep.rows[s]) {
      CHECK(std::isfinite(r.err));
      CHECK(r.err > 0.0);
    }
  // The order-one scheme should beat euler at the finest level even at
  // this tiny scale.
  CHECK(rep.rows[1].back().err < rep.rows[0].back().err);

  // Decoupled-noise diagnostics mode still runs.
  StudyConfig diag = cfg;
  diag.reference.shared_paths = false;
  const ConvergenceReport rep2 = run_study(diag);
  CHECK(std::isfinite(rep2.rows[0][0].err));
}

TEST_CASE("csv and json round trips are lossless") {
  StudyConfig cfg = tiny_config();
  cfg.paths = 8;
  const ConvergenceReport rep = run_study(cfg);

  const std::string csv = report_to_csv(rep);
  const ConvergenceReport from_csv = report_from_csv(csv);
  CHECK(report_to_csv(from_csv) == csv);

  const std::string js = report_to_json(rep);
  const ConvergenceReport from_js = report_from_json(js);
  CHECK(report_to_json(from_js) == js);

  // Cross-format: csv -> report -> json equals direct json.
  CHECK(report_to_json(from_csv) == js);
  CHECK(report_to_csv(from_js) == csv);

  // Numeric fields survive exactly.
  CHECK(from_csv.rows[0][0].err == rep.rows[0][0].err);
  CHECK(from_csv.rows[0][0].counters.gaussians == rep.rows[0][0].counters.gaussians);
  CHECK(from_js.summaries[1].gamma == rep.summaries[1].gamma);
  CHECK(from_csv.config.config_hash() == rep.config.config_hash());
}

TEST_CASE("tampered serializations are rejected") {
  StudyConfig cfg = tiny_config();
  cfg.paths = 4;
  cfg.schemes = {"EM"};
  const ConvergenceReport rep = run_study(cfg);

  SUBCASE("csv hash mismatch") {
    std::string csv = report_to_csv(rep);
    const auto pos = csv.find("seed=42");
    REQUIRE(pos != std::string::npos);
    csv.replace(pos, 7, "seed=43");
    CHECK_THROWS_AS((void)report_from_csv(csv), std::runtime_error);
  }
  SUBCASE("csv missing rows") {
    std::string csv = report_to_csv(rep);
    const auto pos = csv.rfind("\nEM,");
    REQUIRE(pos != std::string::npos);
    const auto eol = csv.find('\n', pos + 1);
    csv.erase(pos, eol - pos);
    CHECK_THROWS_AS((void)report_from_csv(csv), std::runtime_error);
  }
  SUBCASE("json hash mismatch") {
    std::string js = report_to_json(rep);
    const auto pos = js.find("\"seed\": \"42\"");
    REQUIRE(pos != std::string::npos);
    js.replace(pos, 12, "\"seed\": \"43\"");
    CHECK_THROWS_AS((void)report_from_json(js), std::runtime_error);
  }
  SUBCASE("garbage") {
    CHECK_THROWS_AS((void)report_from_csv("hello"), std::exception);
    CHECK_THROWS_AS((void)report_from_json("{]"), std::exception);
  }
}

}  // TEST_SUITE
