#include "srk/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace srk {

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t path,
                                 std::uint64_t level, std::uint64_t step,
                                 StreamPurpose purpose) {
  using detail::mix64;
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;
  std::uint64_t s = mix64(master_seed ^ golden);
  const std::uint64_t words[4] = {path, level, step,
                                  static_cast<std::uint64_t>(purpose)};
  for (std::uint64_t w : words) s = mix64((s + golden) ^ mix64(w ^ 0x632be59bd9b4e019ull));
  return s;
}

namespace {

constexpr int kLayers = 128;

// Ziggurat tables for the standard normal density exp(-x^2/2) (unnormalized).
// X[i] is the right edge of layer i, F[i] = exp(-X[i]^2/2); layer 0 is the
// base strip whose rectangle part is [0,r] x [0,f(r)] plus the tail mass.
struct ZigguratTables {
  double X[kLayers + 1];
  double F[kLayers + 1];
  ZigguratTables();
};

double density(double x) { return std::exp(-0.5 * x * x); }

// Area of one strip when the base edge sits at r: the base rectangle plus the
// tail of the (unnormalized) density, integral_r^inf exp(-x^2/2) dx.
double strip_area(double r) {
  return r * density(r) + std::sqrt(3.14159265358979323846 / 2.0) * std::erfc(r / std::sqrt(2.0));
}

// Builds the edge tables upward from a trial base edge r and reports how far
// the topmost strip overshoots the apex: result > 0 means r was too small.
// Monotone in r, so the caller can bisect on the sign.
double build(double r, double* X, double* F) {
  const double v = strip_area(r);
  X[1] = r;
  F[1] = density(r);
  for (int i = 1; i < kLayers; ++i) {
    const double fn = F[i] + v / X[i];
    if (fn >= 1.0) {
      // Ran out of density below the apex: treat as overshoot however far
      // up we got, keeping the residual sign-consistent for the bisection.
      for (int j = i + 1; j <= kLayers; ++j) {
        X[j] = 0.0;
        F[j] = 1.0;
      }
      return 1.0 + static_cast<double>(kLayers - i);
    }
    F[i + 1] = fn;
    X[i + 1] = std::sqrt(-2.0 * std::log(fn));
  }
  X[0] = v / density(r);
  const double residual = (F[kLayers - 1] + v / X[kLayers - 1]) - 1.0;
  return residual;
}

ZigguratTables::ZigguratTables() {
  double lo = 2.0, hi = 5.0;
  if (!(build(lo, X, F) > 0.0) || !(build(hi, X, F) < 0.0))
    throw std::logic_error("ziggurat bracket invalid");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (build(mid, X, F) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  build(hi, X, F);
  X[kLayers] = 0.0;
  F[kLayers] = 1.0;
  F[0] = 0.0;  // unused; layer 0 takes the rectangle-or-tail branch
  // Construction sanity: edges strictly decreasing, densities increasing.
  for (int i = 0; i < kLayers; ++i) {
    if (!(X[i] > X[i + 1]) || !(F[i] < F[i + 1]) || !std::isfinite(X[i]))
      throw std::logic_error("ziggurat table construction failed");
  }
}

const ZigguratTables& tables() {
  static const ZigguratTables t;
  return t;
}

}  // namespace

double RngStream::normal() {
  const ZigguratTables& z = tables();
  for (;;) {
    const std::uint64_t u = next_u64();
    const int i = static_cast<int>(u & 127u);
    const double sign = (u & 128u) ? -1.0 : 1.0;
    const double frac = (static_cast<double>(u >> 11) + 0.5) * 0x1p-53;
    const double x = frac * z.X[i];
    if (x < z.X[i + 1]) return sign * x;
    if (i == 0) {
      // Tail beyond the base edge r = X[1]: exact exponential-rejection tail.
      const double r = z.X[1];
      for (;;) {
        const double xt = -std::log(uniform01()) / r;
        const double yt = -std::log(uniform01());
        if (2.0 * yt > xt * xt) return sign * (r + xt);
      }
    }
    const double y = z.F[i] + uniform01() * (z.F[i + 1] - z.F[i]);
    if (y < density(x)) return sign * x;
  }
}

}  // namespace srk
