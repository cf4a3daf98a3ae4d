#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "doctest.h"
#include "srk/solver.hpp"
#include "srk/tableau.hpp"
#include "srk/testeqs.hpp"

using namespace srk;

namespace {

SdeProblem drift_free_linear_diffusion() {
  SdeProblem p;
  p.d = 1;
  p.m = 1;
  p.noise_class = NoiseClass::scalar;
  p.x0 = {1.0};
  p.name = "b(x)=x";
  p.drift = [](double, std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
  };
  p.diffusion = [](double, std::span<const double> x, int,
                   std::span<double> out) { out[0] = x[0]; };
  p.diffusion_jacobian = [](double, std::span<const double>, int,
                            std::span<double> out) { out[0] = 1.0; };
  return p;
}

SdeProblem linear_drift_only(double lambda) {
  SdeProblem p;
  p.d = 1;
  p.m = 1;
  p.noise_class = NoiseClass::scalar;
  p.x0 = {1.0};
  p.name = "a(x)=-lambda x";
  p.drift = [lambda](double, std::span<const double> x, std::span<double> out) {
    out[0] = -lambda * x[0];
  };
  p.diffusion = [](double, std::span<const double>, int, std::span<double> out) {
    out[0] = 0.0;
  };
  p.diffusion_jacobian = [](double, std::span<const double>, int,
                            std::span<double> out) { out[0] = 0.0; };
  return p;
}

IteratedIntegrals scalar_iter(double dw, double h) {
  IteratedIntegrals it(1, h, IntegralMode::scalar_exact);
  it.at(0, 0) = (dw * dw - h) / 2.0;
  return it;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("registry lists fourteen runnable schemes") {
  const auto& names = scheme_names();
  CHECK(names.size() == 14);
  for (const char* n :
       {"EM", "SSBE", "MIL", "SPLI", "SRI2s1", "SRI2s2", "SRIC2s1", "SRIC2s2",
        "SRS2s1", "SRS2s2", "SRSC2s1", "SRSC2s2", "SRA2s1", "SRA2s2"}) {
    CAPTURE(n);
    CHECK(scheme_known(n));
    CHECK(make_scheme(n).name == n);
  }
  CHECK_FALSE(scheme_known("EM2"));
  CHECK_THROWS_AS((void)make_scheme("EM2"), std::invalid_argument);
}

TEST_CASE("scheme wiring: kind, selector, calculus") {
  CHECK(make_scheme("EM").kind == SchemeKind::em);
  CHECK(make_scheme("EM").selector == Selector::none);
  CHECK(make_scheme("SSBE").kind == SchemeKind::srk);
  CHECK(make_scheme("SSBE").selector == Selector::none);
  CHECK(make_scheme("MIL").kind == SchemeKind::milstein);
  CHECK(make_scheme("MIL").selector == Selector::ito_approx);
  CHECK(make_scheme("SPLI").kind == SchemeKind::spli);
  CHECK(make_scheme("SRI2s1").selector == Selector::ito_approx);
  CHECK(make_scheme("SRIC2s1").selector == Selector::commutative_ito);
  CHECK(make_scheme("SRS2s1").selector == Selector::strat_approx);
  CHECK(make_scheme("SRSC2s2").selector == Selector::commutative_strat);
  CHECK(make_scheme("SRA2s1").selector == Selector::additive);
  CHECK(make_scheme("SRS2s1").required_calculus() == Calculus::stratonovich);
  CHECK(make_scheme("SRSC2s1").required_calculus() == Calculus::stratonovich);
  CHECK(make_scheme("SRI2s1").required_calculus() == Calculus::ito);
  CHECK(make_scheme("SSBE").view.drift_implicit);
  CHECK_FALSE(make_scheme("SRI2s2").view.drift_implicit);
  // Stratonovich variants reuse the Ito coefficient sets.
  CHECK(make_scheme("SRS2s1").tableau.name == "SRI2s1");
  CHECK(make_scheme("SRS2s2").tableau.name == "SRI2s2");
}

TEST_CASE("two-stage step reproduces the hand expansion exactly") {
  const SdeProblem p = drift_free_linear_diffusion();
  const SchemeInstance sri = make_scheme("SRI2s1");
  const struct {
    double dw, h, closed;
  } cases[] = {
      {0.5, 0.25, 1.5},    // 1 + 1/2 + (1/4 - 1/4)/2
      {1.0, 0.25, 2.375},  // 1 + 1 + (1 - 1/4)/2
  };
  for (const auto& c : cases) {
    CAPTURE(c.dw);
    WienerIncrements w{c.h, {c.dw}};
    const IteratedIntegrals it = scalar_iter(c.dw, c.h);
    const StepContext ctx{0.0, c.h, &w, &it};
    const double y = 1.0;
    double out_srk = 0.0, out_mil = 0.0;
    srk_step(sri, p, ctx, std::span<const double>(&y, 1),
             std::span<double>(&out_srk, 1));
    milstein_step(p, ctx, std::span<const double>(&y, 1),
                  std::span<double>(&out_mil, 1));
    CHECK(out_srk == c.closed);
    CHECK(out_srk == out_mil);  // bit-for-bit, shared update kernel
  }
}

TEST_CASE("euler step oracle") {
  SdeProblem p = drift_free_linear_diffusion();
  p.drift = [](double, std::span<const double> x, std::span<double> out) {
    out[0] = 2.0 * x[0];
  };
  WienerIncrements w{0.25, {0.5}};
  const StepContext ctx{0.0, 0.25, &w, nullptr};
  const double y = 1.0;
  double out = 0.0;
  em_step(p, ctx, std::span<const double>(&y, 1), std::span<double>(&out, 1));
  CHECK(out == 1.0 + 2.0 * 0.25 + 0.5);  // y + a h + b dW, exact dyadics
}

TEST_CASE("implicit euler stage solves the linear fixed point") {
  const double lambda = 1.0, h = 0.5;
  const SdeProblem p = linear_drift_only(lambda);
  const SchemeInstance ssbe = make_scheme("SSBE");
  WienerIncrements w{h, {0.3}};
  const StepContext ctx{0.0, h, &w, nullptr};
  const double y = 1.0;
  double out = 0.0;
  scheme_step(ssbe, p, ctx, std::span<const double>(&y, 1),
              std::span<double>(&out, 1));
  CHECK(out == doctest::Approx(y / (1.0 + lambda * h)).epsilon(1e-12));
}

TEST_CASE("fixed point honors the iteration cap") {
  const SdeProblem p = linear_drift_only(1.0);
  const SchemeInstance ssbe = make_scheme("SSBE");
  WienerIncrements w{0.5, {0.0}};
  const StepContext ctx{0.0, 0.5, &w, nullptr};
  const double y = 1.0;
  double out = 0.0;
  ImplicitOptions opts;
  opts.max_iterations = 2;
  CHECK_THROWS_AS(scheme_step(ssbe, p, ctx, std::span<const double>(&y, 1),
                              std::span<double>(&out, 1), nullptr, opts),
                  std::runtime_error);
}

TEST_CASE("divergent fixed point reports failure") {
  const SdeProblem p = linear_drift_only(1e6);
  const SchemeInstance ssbe = make_scheme("SSBE");
  WienerIncrements w{1.0, {0.0}};
  const StepContext ctx{0.0, 1.0, &w, nullptr};
  const double y = 1.0;
  double out = 0.0;
  CHECK_THROWS_AS(scheme_step(ssbe, p, ctx, std::span<const double>(&y, 1),
                              std::span<double>(&out, 1)),
                  std::runtime_error);
}

TEST_CASE("heun reduction of the two-stage additive method") {
  // With b = 0 the additive method is the deterministic trapezoid rule.
  SdeProblem p = linear_drift_only(-1.0);  // a(x) = x
  p.noise_class = NoiseClass::additive;
  const SchemeInstance sra = make_scheme("SRA2s2");
  WienerIncrements w{0.5, {0.0}};
  const StepContext ctx{0.0, 0.5, &w, nullptr};
  const double y = 1.0;
  double out = 0.0;
  additive_step(sra, p, ctx, std::span<const double>(&y, 1),
                std::span<double>(&out, 1));
  const double h = 0.5;
  const double heun = y + h / 2.0 * (y + (y + h * y));
  CHECK(out == doctest::Approx(heun).epsilon(1e-15));
}

TEST_CASE("custom tableau euler is bit-identical to the dedicated step") {
  const SdeProblem p = eq2();
  const SchemeInstance em = make_scheme("EM");
  const SchemeInstance tab = make_custom_scheme(builtin_tableau("EM"),
                                                Selector::none);
  const std::int64_t n = 16;
  FreshPathSource s1(99, 0, 0, p.m, 1.0 / n);
  FreshPathSource s2(99, 0, 0, p.m, 1.0 / n);
  const Trajectory t1 = integrate(em, p, n, s1);
  const Trajectory t2 = integrate(tab, p, n, s2);
  for (std::size_t i = 0; i < t1.states.size(); ++i)
    CHECK(t1.states[i] == t2.states[i]);
}

TEST_CASE("additive noise collapses the order-one schemes onto euler") {
  const SdeProblem p = eq3(2);
  std::vector<std::vector<double>> terminals;
  for (const char* name : {"EM", "MIL", "SPLI", "SRA2s1"}) {
    FreshPathSource src(7, 4, 0, p.m, 0.125);
    terminals.push_back(integrate(make_scheme(name), p, 8, src).terminal());
  }
  CHECK(terminals[0] == terminals[1]);
  CHECK(terminals[0] == terminals[2]);
  CHECK(terminals[0] == terminals[3]);
}

TEST_CASE("integrate grid, accumulation and counters") {
  const SdeProblem p = eq4(2);
  const std::int64_t n = 8;
  const double h = 1.0 / n;
  FreshPathSource src(3, 1, 0, p.m, h);
  const Trajectory tr = integrate(make_scheme("EM"), p, n, src);
  REQUIRE(tr.times.size() == std::size_t(n + 1));
  REQUIRE(tr.states.size() == std::size_t(n + 1));
  REQUIRE(tr.w_path.size() == std::size_t(n + 1));
  for (std::int64_t i = 0; i <= n; ++i)
    CHECK(tr.times[i] == doctest::Approx(i * h).epsilon(1e-15));
  CHECK(tr.states.front() == p.x0);
  CHECK(tr.terminal() == tr.states.back());
  // w_path accumulates exactly the increments the source produced.
  FreshPathSource replay(3, 1, 0, p.m, h);
  std::vector<double> acc(p.m, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const StepDraw d = replay.draw(i, Selector::none);
    for (int k = 0; k < p.m; ++k) acc[k] += d.w.dw[k];
    for (int k = 0; k < p.m; ++k) CHECK(tr.w_path[i + 1][k] == acc[k]);
  }
  CHECK(tr.counters.drift_calls == n);
  CHECK(tr.counters.diffusion_calls == n * p.m);
  CHECK(tr.counters.jacobian_calls == 0);
  CHECK(tr.counters.gaussians == n * p.m);  // selector none, no aux draws
}

TEST_CASE("iterated-integral draws are charged to the gaussian counter") {
  const SdeProblem p = eq4(2);
  const std::int64_t n = 4;
  const double h = 0.25;
  FreshPathSource src(3, 1, 0, p.m, h);
  const Trajectory tr = integrate(make_scheme("SRI2s1"), p, n, src);
  // Actual consumption per step: m increments plus 2mP + (m^2+m)/2 auxiliary
  // draws. At coarse h the floor P >= 1 can push this past the rho budget,
  // so the counter is checked against consumption, not the budget.
  const std::int64_t aux =
      2 * p.m * levy_truncation_depth(p.m, h) + (p.m * p.m + p.m) / 2;
  CHECK(tr.counters.gaussians == n * (p.m + aux));
  // At fine h the consumption fits the budget.
  const double hf = 1.0 / 64;
  CHECK(2 * p.m * levy_truncation_depth(p.m, hf) + (p.m * p.m + p.m) / 2 <=
        rho(p.m, hf));
}

TEST_CASE("commutative surrogate values come from the increments") {
  FreshPathSource src(17, 2, 0, 3, 0.25);
  const StepDraw d = src.draw(5, Selector::commutative_ito);
  REQUIRE(d.has_iter);
  CHECK(d.iter.mode == IntegralMode::commutative_ito);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k) {
      const double expect =
          (d.w.dw[l] * d.w.dw[k] - (l == k ? 0.25 : 0.0)) / 2.0;
      CHECK(d.iter.at(l, k) == expect);
    }
  // Stratonovich surrogate shifts only the diagonal, by h/2.
  FreshPathSource src2(17, 2, 0, 3, 0.25);
  const StepDraw s = src2.draw(5, Selector::commutative_strat);
  CHECK(s.iter.mode == IntegralMode::commutative_strat);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k)
      CHECK(s.iter.at(l, k) ==
            (l == k ? d.iter.at(l, l) + 0.125 : d.iter.at(l, k)));
}

TEST_CASE("identical sources replay identically, different paths differ") {
  FreshPathSource a(5, 0, 0, 2, 0.5);
  FreshPathSource b(5, 0, 0, 2, 0.5);
  FreshPathSource c(5, 1, 0, 2, 0.5);
  const StepDraw da = a.draw(3, Selector::ito_approx);
  const StepDraw db = b.draw(3, Selector::ito_approx);
  const StepDraw dc = c.draw(3, Selector::ito_approx);
  CHECK(da.w.dw == db.w.dw);
  CHECK(da.iter.values == db.iter.values);
  CHECK(da.w.dw != dc.w.dw);
  // Draw order does not matter.
  FreshPathSource d(5, 0, 0, 2, 0.5);
  (void)d.draw(7, Selector::ito_approx);
  const StepDraw late = d.draw(3, Selector::ito_approx);
  CHECK(late.w.dw == da.w.dw);
  CHECK(late.iter.values == da.iter.values);
}

TEST_CASE("aggregate source with window one replays the grid") {
  const WienerFineGrid grid(21, 0, 2, 16, 1.0 / 16);
  AggregatePathSource src(grid, 1);
  CHECK(src.m() == 2);
  CHECK(src.step_size() == doctest::Approx(1.0 / 16).epsilon(1e-15));
  for (int i = 0; i < 16; ++i) {
    const StepDraw d = src.draw(i, Selector::ito_approx);
    CHECK(d.w.dw == grid.step(i).w.dw);
    CHECK(d.iter.values == grid.step(i).iter.values);
    CHECK(d.gaussians == 0);  // nothing fresh, data reused from the grid
  }
}

TEST_CASE("aggregate source composes windows") {
  const WienerFineGrid grid(22, 0, 2, 16, 1.0 / 16);
  AggregatePathSource src(grid, 4);
  const StepDraw d = src.draw(1, Selector::ito_approx);
  const PathStep direct = grid.aggregate(4, 4);
  CHECK(d.w.dw == direct.w.dw);
  CHECK(d.iter.values == direct.iter.values);
  CHECK(d.w.h == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("integration rejects inconsistent setups") {
  const SdeProblem p4 = eq4(2);
  const SdeProblem p5 = eq5();

  SUBCASE("source noise dimension must match") {
    FreshPathSource src(1, 0, 0, 3, 0.25);  // m = 3, problem has m = 2
    CHECK_THROWS_AS((void)integrate(make_scheme("EM"), p4, 4, src),
                    std::invalid_argument);
  }
  SUBCASE("source step size must match the requested grid") {
    FreshPathSource src(1, 0, 0, 2, 0.2);
    CHECK_THROWS_AS((void)integrate(make_scheme("EM"), p4, 4, src),
                    std::invalid_argument);
  }
  SUBCASE("commutative selector on general noise") {
    FreshPathSource src(1, 0, 0, p5.m, 0.25);
    CHECK_THROWS_AS((void)integrate(make_scheme("SRIC2s1"), p5, 4, src),
                    std::invalid_argument);
  }
  SUBCASE("calculus mismatch between scheme and integrals") {
    const SdeProblem p = drift_free_linear_diffusion();
    WienerIncrements w{0.25, {0.5}};
    IteratedIntegrals it(1, 0.25, IntegralMode::strat_approx);
    const StepContext ctx{0.0, 0.25, &w, &it};
    const double y = 1.0;
    double out = 0.0;
    CHECK_THROWS_AS(srk_step(make_scheme("SRI2s1"), p, ctx,
                             std::span<const double>(&y, 1),
                             std::span<double>(&out, 1)),
                    std::invalid_argument);
  }
  SUBCASE("missing iterated integrals") {
    const SdeProblem p = drift_free_linear_diffusion();
    WienerIncrements w{0.25, {0.5}};
    const StepContext ctx{0.0, 0.25, &w, nullptr};
    const double y = 1.0;
    double out = 0.0;
    CHECK_THROWS_AS(milstein_step(p, ctx, std::span<const double>(&y, 1),
                                  std::span<double>(&out, 1)),
                    std::invalid_argument);
  }
  SUBCASE("additive step demands additive noise") {
    const SdeProblem p = drift_free_linear_diffusion();  // state-dependent b
    WienerIncrements w{0.25, {0.5}};
    const StepContext ctx{0.0, 0.25, &w, nullptr};
    const double y = 1.0;
    double out = 0.0;
    CHECK_THROWS_AS(additive_step(make_scheme("SRA2s1"), p, ctx,
                                  std::span<const double>(&y, 1),
                                  std::span<double>(&out, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("milstein correction on a linear system matches the update rule") {
  // d = 1, b(x) = x: one step must equal EM plus jac * b * I_(1,1).
  const SdeProblem p = drift_free_linear_diffusion();
  const double h = 0.25, dw = 0.7;
  WienerIncrements w{h, {dw}};
  const IteratedIntegrals it = scalar_iter(dw, h);
  const StepContext ctx{0.0, h, &w, &it};
  const double y = 2.0;
  double mil = 0.0, em = 0.0;
  milstein_step(p, ctx, std::span<const double>(&y, 1), std::span<double>(&mil, 1));
  em_step(p, ctx, std::span<const double>(&y, 1), std::span<double>(&em, 1));
  CHECK(mil == doctest::Approx(em + y * it.at(0, 0)).epsilon(1e-15));
}

}  // TEST_SUITE
