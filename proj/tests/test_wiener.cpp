#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "srk/rng.hpp"
#include "srk/wiener.hpp"

using namespace srk;

TEST_SUITE("wiener") {

TEST_CASE("stream derivation separates paths, steps and purposes") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t path = 0; path < 4; ++path)
    for (std::uint64_t level = 0; level < 3; ++level)
      for (std::uint64_t step = 0; step < 4; ++step)
        for (StreamPurpose p : {StreamPurpose::increments, StreamPurpose::levy,
                                StreamPurpose::oracle})
          seen.insert(derive_stream_seed(42, path, level, step, p));
  CHECK(seen.size() == 4u * 3u * 4u * 3u);
  // Pure function: same tuple, same seed.
  CHECK(derive_stream_seed(1, 2, 3, 4, StreamPurpose::levy) ==
        derive_stream_seed(1, 2, 3, 4, StreamPurpose::levy));
  CHECK(derive_stream_seed(1, 2, 3, 4, StreamPurpose::levy) !=
        derive_stream_seed(2, 2, 3, 4, StreamPurpose::levy));
}

TEST_CASE("normal sampler moments and tails") {
  RngStream rng(0xfeedbeefull);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  int tail3 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
    if (std::fabs(z) > 3.0) ++tail3;
  }
  s1 /= n;
  s2 /= n;
  s4 /= n;
  CHECK(std::fabs(s1) < 4.0 / std::sqrt(double(n)));          // E[z] = 0
  CHECK(std::fabs(s2 - 1.0) < 4.0 * std::sqrt(2.0 / n));      // E[z^2] = 1
  CHECK(std::fabs(s4 - 3.0) < 4.0 * std::sqrt(96.0 / n));     // E[z^4] = 3
  // P(|z| > 3) = 0.0027; a crude check that the ziggurat tail is sampled.
  const double expect = 0.0026998 * n;
  CHECK(std::fabs(tail3 - expect) < 4.0 * std::sqrt(expect));
}

TEST_CASE("uniform01 stays inside the open interval") {
  RngStream rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("auxiliary draw budget, both readings") {
  CHECK(rho(1, 0.25) == 0);
  CHECK(rho(1, 1e-9) == 0);
  CHECK(rho(2, 1.0) == 4);
  CHECK(rho(2, 0.25) == 5);
  CHECK(rho(2, 1.0 / 64) == 8);
  CHECK(rho(2, std::ldexp(1.0, -12)) == 37);
  CHECK(rho(4, std::ldexp(1.0, -11)) == 77);
  CHECK(rho(4, std::ldexp(1.0, -12)) == 105);
  CHECK(rho(4, std::ldexp(1.0, -14)) == 199);
  CHECK(rho(10, 1.0 / 64) == 102);
  CHECK(rho(2, 1.0 / 64, RhoReading::sqrt3_h) == 37);
  // The alternate reading folds h linearly into the budget.
  CHECK(rho(2, 1.0, RhoReading::sqrt3_h) == 4);
  // Budget never shrinks as h decreases (default reading).
  for (int e = 0; e < 20; ++e)
    CHECK(rho(3, std::ldexp(1.0, -e - 1)) >= rho(3, std::ldexp(1.0, -e)));
}

TEST_CASE("rho reading names") {
  CHECK(rho_reading_from_string("sqrt-3h") == RhoReading::sqrt_3h);
  CHECK(rho_reading_from_string("sqrt3-h") == RhoReading::sqrt3_h);
  CHECK(to_string(RhoReading::sqrt_3h) == "sqrt-3h");
  CHECK(to_string(RhoReading::sqrt3_h) == "sqrt3-h");
  CHECK_THROWS_AS((void)rho_reading_from_string("x"), std::invalid_argument);
}

TEST_CASE("increment sampling") {
  RngStream rng(11);
  const WienerIncrements w = sample_increments(rng, 3, 0.25);
  CHECK(w.m() == 3);
  CHECK(w.h == 0.25);
  // Variance sanity over many draws.
  RngStream rng2(12);
  double s2 = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const WienerIncrements v = sample_increments(rng2, 1, 0.25);
    s2 += v.dw[0] * v.dw[0];
  }
  s2 /= n;
  CHECK(std::fabs(s2 - 0.25) < 5.0 * 0.25 * std::sqrt(2.0 / n));
}

TEST_CASE("single-channel iterated integral is exact") {
  RngStream inc(21);
  const WienerIncrements w = sample_increments(inc, 1, 0.5);
  RngStream lev(22);
  const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
  CHECK(it.mode == IntegralMode::scalar_exact);
  CHECK(it.aux_gaussians == 0);
  CHECK(it.at(0, 0) == (w.dw[0] * w.dw[0] - w.h) / 2.0);
}

TEST_CASE("diagonal entries use the exact formula for any m") {
  RngStream inc(31);
  const WienerIncrements w = sample_increments(inc, 3, 0.125);
  RngStream lev(32);
  const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
  CHECK(it.mode == IntegralMode::ito_approx);
  CHECK(it.aux_gaussians > 0);
  for (int k = 0; k < 3; ++k)
    CHECK(it.at(k, k) == doctest::Approx((w.dw[k] * w.dw[k] - w.h) / 2.0)
                             .epsilon(1e-15));
}

TEST_CASE("pair construction satisfies the increment-product identity") {
  // I_(l,k) + I_(k,l) = dW_l dW_k for l != k, exactly by construction.
  for (int trial = 0; trial < 50; ++trial) {
    RngStream inc = make_stream(5, trial, 0, 0, StreamPurpose::increments);
    const WienerIncrements w = sample_increments(inc, 3, 0.25);
    RngStream lev = make_stream(5, trial, 0, 0, StreamPurpose::levy);
    const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
    for (int l = 0; l < 3; ++l)
      for (int k = l + 1; k < 3; ++k) {
        const double sum = it.at(l, k) + it.at(k, l);
        const double prod = w.dw[l] * w.dw[k];
        CHECK(std::fabs(sum - prod) <=
              1e-14 * std::max(1.0, std::fabs(prod)));
      }
  }
}

TEST_CASE("pair moments at moderate sample count") {
  const double h = 0.25;
  const int n = 50000;
  double mihat = 0, mihat2 = 0, cross = 0, mj = 0;
  for (int i = 0; i < n; ++i) {
    RngStream inc = make_stream(9, i, 0, 0, StreamPurpose::increments);
    const WienerIncrements w = sample_increments(inc, 2, h);
    RngStream lev = make_stream(9, i, 0, 0, StreamPurpose::levy);
    const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
    const IteratedIntegrals js = ito_to_strat(it);
    mihat += it.at(0, 1);
    mihat2 += it.at(0, 1) * it.at(0, 1);
    cross += it.at(0, 1) * it.at(1, 0);
    mj += js.at(1, 1);
  }
  mihat /= n;
  mihat2 /= n;
  cross /= n;
  mj /= n;
  CHECK(std::fabs(mihat) < 4.5 * h / std::sqrt(2.0 * n));
  CHECK(std::fabs(mihat2 - h * h / 2) < 0.06 * h * h / 2);
  // E[I_(1,2) I_(2,1)] = 0 for the exact pair; the estimator keeps the
  // exact second-moment structure.
  CHECK(std::fabs(cross) < 0.06 * h * h / 2);
  CHECK(std::fabs(mj - h / 2) < 0.05 * h / 2);
}

TEST_CASE("stratonovich shift moves only the diagonal") {
  RngStream inc(41);
  const WienerIncrements w = sample_increments(inc, 2, 0.5);
  RngStream lev(42);
  const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
  const IteratedIntegrals js = ito_to_strat(it);
  CHECK(js.mode == IntegralMode::strat_approx);
  CHECK(js.at(0, 0) == it.at(0, 0) + w.h / 2.0);
  CHECK(js.at(1, 1) == it.at(1, 1) + w.h / 2.0);
  CHECK(js.at(0, 1) == it.at(0, 1));
  CHECK(js.at(1, 0) == it.at(1, 0));
  // Requesting Stratonovich directly gives the same values.
  RngStream lev2(42);
  const IteratedIntegrals direct = approx_iterated(lev2, w, Calculus::stratonovich);
  CHECK(direct.mode == IntegralMode::strat_approx);
  CHECK(direct.at(0, 0) == js.at(0, 0));
  CHECK(direct.at(0, 1) == js.at(0, 1));
}

TEST_CASE("oracle estimator agrees with the fourier estimator in L2") {
  const double h = 0.25;
  const int n = 4000;
  double ap2 = 0, or2 = 0;
  for (int i = 0; i < n; ++i) {
    RngStream inc = make_stream(13, i, 0, 0, StreamPurpose::increments);
    const WienerIncrements w = sample_increments(inc, 2, h);
    RngStream lev = make_stream(13, i, 0, 0, StreamPurpose::levy);
    const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
    ap2 += it.at(0, 1) * it.at(0, 1);
    RngStream orc = make_stream(13, i, 0, 0, StreamPurpose::oracle);
    const PathStep os = oracle_iterated(orc, 2, h, 256);
    or2 += os.iter.at(0, 1) * os.iter.at(0, 1);
    if (i == 0) {
      CHECK(os.iter.mode == IntegralMode::oracle);
      CHECK(os.w.m() == 2);
      // Oracle diagonal folds to the exact formula.
      CHECK(os.iter.at(0, 0) ==
            doctest::Approx((os.w.dw[0] * os.w.dw[0] - h) / 2.0).epsilon(1e-12));
    }
  }
  ap2 /= n;
  or2 /= n;
  CHECK(std::fabs(ap2 - h * h / 2) < 0.10 * h * h / 2);
  CHECK(std::fabs(or2 - h * h / 2) < 0.10 * h * h / 2);
}

TEST_CASE("chen composition") {
  auto draw = [](std::uint64_t tag, double h) {
    PathStep s;
    RngStream inc = make_stream(77, tag, 0, 0, StreamPurpose::increments);
    s.w = sample_increments(inc, 2, h);
    RngStream lev = make_stream(77, tag, 0, 0, StreamPurpose::levy);
    s.iter = approx_iterated(lev, s.w, Calculus::ito);
    return s;
  };

  SUBCASE("increments add, step sizes add") {
    const PathStep a = draw(1, 0.25), b = draw(2, 0.5);
    const PathStep c = compose(a, b);
    CHECK(c.w.h == 0.75);
    CHECK(c.w.dw[0] == a.w.dw[0] + b.w.dw[0]);
    CHECK(c.w.dw[1] == a.w.dw[1] + b.w.dw[1]);
    // Cross term: I_c(l,k) = I_a + I_b + dW_a,l dW_b,k.
    CHECK(c.iter.at(0, 1) ==
          a.iter.at(0, 1) + b.iter.at(0, 1) + a.w.dw[0] * b.w.dw[1]);
  }
  SUBCASE("associative up to rounding") {
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const PathStep a = draw(100 + 3 * i, 0.25), b = draw(101 + 3 * i, 0.25),
                     c = draw(102 + 3 * i, 0.25);
      const PathStep l = compose(compose(a, b), c);
      const PathStep r = compose(a, compose(b, c));
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
          worst = std::max(worst, std::fabs(l.iter.at(u, v) - r.iter.at(u, v)) /
                                      std::max(1.0, std::fabs(l.iter.at(u, v))));
    }
    CHECK(worst <= 1e-12);
  }
  SUBCASE("surrogate modes refuse to compose") {
    PathStep a = draw(1, 0.25), b = draw(2, 0.25);
    a.iter.mode = IntegralMode::commutative_ito;
    b.iter.mode = IntegralMode::commutative_ito;
    CHECK_THROWS_AS((void)compose(a, b), std::invalid_argument);
  }
  SUBCASE("mismatched m refuses to compose") {
    PathStep a = draw(1, 0.25);
    PathStep b;
    RngStream inc = make_stream(78, 0, 0, 0, StreamPurpose::increments);
    b.w = sample_increments(inc, 3, 0.25);
    RngStream lev = make_stream(78, 0, 0, 0, StreamPurpose::levy);
    b.iter = approx_iterated(lev, b.w, Calculus::ito);
    CHECK_THROWS_AS((void)compose(a, b), std::invalid_argument);
  }
}

TEST_CASE("fine grid determinism and aggregation") {
  const WienerFineGrid g1(123, 5, 2, 64, 1.0 / 64);
  const WienerFineGrid g2(123, 5, 2, 64, 1.0 / 64);
  const WienerFineGrid g3(123, 6, 2, 64, 1.0 / 64);

  SUBCASE("identical construction, identical steps") {
    bool same = true, differs = false;
    for (int i = 0; i < 64; ++i) {
      same = same && g1.step(i).w.dw == g2.step(i).w.dw &&
             g1.step(i).iter.values == g2.step(i).iter.values;
      differs = differs || g1.step(i).w.dw != g3.step(i).w.dw;
    }
    CHECK(same);
    CHECK(differs);
  }
  SUBCASE("window of one is the fine step itself") {
    const PathStep a = g1.aggregate(7, 1);
    CHECK(a.w.dw == g1.step(7).w.dw);
    CHECK(a.iter.values == g1.step(7).iter.values);
  }
  SUBCASE("aggregated increments equal the summed fine increments") {
    const PathStep a = g1.aggregate(0, 64);
    for (int k = 0; k < 2; ++k) {
      double sum = 0;
      for (int i = 0; i < 64; ++i) sum += g1.step(i).w.dw[k];
      CHECK(a.w.dw[k] == sum);
    }
    CHECK(a.w.h == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("aggregate diagonal reproduces the exact formula") {
    const PathStep a = g1.aggregate(0, 64);
    for (int k = 0; k < 2; ++k) {
      const double expect = (a.w.dw[k] * a.w.dw[k] - a.w.h) / 2.0;
      CHECK(std::fabs(a.iter.at(k, k) - expect) <=
            1e-12 * std::max(1.0, std::fabs(expect)));
    }
  }
  SUBCASE("single-channel grid draws no auxiliary gaussians and aggregates") {
    const WienerFineGrid g(9, 0, 1, 32, 1.0 / 32);
    CHECK(g.aux_gaussians() == 0);
    CHECK(g1.aux_gaussians() > 0);
    const PathStep a = g.aggregate(0, 32);
    const double expect = (a.w.dw[0] * a.w.dw[0] - a.w.h) / 2.0;
    CHECK(std::fabs(a.iter.at(0, 0) - expect) <=
          1e-12 * std::max(1.0, std::fabs(expect)));
  }
  SUBCASE("dump / load round trip") {
    std::stringstream buf;
    g1.dump(buf);
    const WienerFineGrid back = WienerFineGrid::load(buf);
    CHECK(back.m() == g1.m());
    CHECK(back.n_fine() == g1.n_fine());
    CHECK(back.h_fine() == g1.h_fine());
    CHECK(back.master_seed() == g1.master_seed());
    bool same = true;
    for (int i = 0; i < 64; ++i)
      same = same && back.step(i).w.dw == g1.step(i).w.dw &&
             back.step(i).iter.values == g1.step(i).iter.values;
    CHECK(same);
  }
}

}  // TEST_SUITE
