#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "srk/rng.hpp"

namespace srk {

enum class Calculus { ito, stratonovich };

[[nodiscard]] std::string to_string(Calculus c);

/// How an iterated-integral matrix was produced. Consumers use this to
/// reject mismatched calculus and to decide composability.
enum class IntegralMode {
  ito_approx,         // truncated-Fourier + tail estimator, Ito calculus
  strat_approx,       // same with the diagonal Stratonovich shift
  commutative_ito,    // symmetric surrogate for commutative noise
  commutative_strat,
  scalar_exact,       // m == 1, exact diagonal
  oracle,             // brute-force fine-subdivision estimate
};

[[nodiscard]] std::string to_string(IntegralMode mode);

/// True for modes whose values are Ito-calculus integrals.
[[nodiscard]] bool ito_family(IntegralMode mode);
/// True for genuine (non-surrogate) Ito integrals, which compose under the
/// Chen relation. The commutative surrogates do not.
[[nodiscard]] bool chen_composable(IntegralMode mode);

/// One step's Wiener increments over an interval of length h.
struct WienerIncrements {
  double h = 0.0;
  std::vector<double> dw;
  [[nodiscard]] int m() const { return static_cast<int>(dw.size()); }
};

/// m x m matrix of (approximate) iterated integrals for one step. Entry
/// (l,k) integrates dW_l on the inside and dW_k on the outside.
struct IteratedIntegrals {
  int m = 0;
  double h = 0.0;
  IntegralMode mode = IntegralMode::ito_approx;
  std::vector<double> values;  // row-major m x m
  /// Auxiliary standard Gaussians consumed beyond the increments themselves.
  std::uint64_t aux_gaussians = 0;

  IteratedIntegrals() = default;
  IteratedIntegrals(int m_, double h_, IntegralMode mode_)
      : m(m_), h(h_), mode(mode_),
        values(static_cast<std::size_t>(m_) * m_, 0.0) {}

  [[nodiscard]] double& at(int l, int k) { return values[l * m + k]; }
  [[nodiscard]] double at(int l, int k) const { return values[l * m + k]; }
};

/// A step's full noise data: increments plus iterated integrals.
struct PathStep {
  WienerIncrements w;
  IteratedIntegrals iter;
};

/// Reading of the per-step auxiliary-Gaussian budget formula. The printed
/// expression is ambiguous about whether h sits under the square root; the
/// sqrt(3h) reading makes the budget O(h^{-1/2}) and is the default. Both are
/// cost-model constants only.
enum class RhoReading { sqrt_3h, sqrt3_h };

[[nodiscard]] std::string to_string(RhoReading r);
[[nodiscard]] RhoReading rho_reading_from_string(const std::string& name);

/// Auxiliary standard Gaussians budgeted per step for the iterated-integral
/// approximation: ceil(m^{3/2}/(sqrt(3h)*pi) + (m^2+m)/2) under the default
/// reading. Zero for m == 1 (the scalar case is exact).
[[nodiscard]] std::int64_t rho(int m, double h,
                               RhoReading reading = RhoReading::sqrt_3h);

/// Fourier truncation depth P funded by the rho budget after reserving
/// (m^2+m)/2 draws for the tail correction: max(1, floor((rho - (m^2+m)/2) /
/// (2m))). Zero for m == 1.
[[nodiscard]] std::int64_t levy_truncation_depth(
    int m, double h, RhoReading reading = RhoReading::sqrt_3h);

[[nodiscard]] WienerIncrements sample_increments(RngStream& rng, int m,
                                                 double h);

/// Exact diagonal second-iterated integral (dW_k^2 - h)/2.
[[nodiscard]] inline double diagonal_ito(double dwk, double h) {
  return (dwk * dwk - h) / 2.0;
}

/// Entrywise Ito -> Stratonovich conversion: adds h/2 on the diagonal only.
[[nodiscard]] inline double ito_to_strat_entry(double value, int l, int k,
                                               double h) {
  return l == k ? value + h / 2.0 : value;
}

/// Symmetric surrogate matrix valid under commutative noise: off-diagonal
/// dW_l*dW_k/2; diagonal (dW_k^2-h)/2 for Ito, dW_k^2/2 for Stratonovich.
[[nodiscard]] IteratedIntegrals commutative_matrix(const WienerIncrements& w,
                                                   Calculus calculus);

/// Estimates all iterated integrals for one step: exact diagonal, truncated
/// Fourier series plus a Gaussian tail correction off the diagonal, the
/// (k,l) entry set from (l,k) via the pairing identity. The truncation depth
/// is funded by the rho(m,h) budget (floored at one Fourier term, so very
/// large h can overrun the budget slightly); exact with zero auxiliary draws
/// for m == 1. The tail correction reproduces the exact conditional
/// covariance of the discarded series, so second moments are exact at every
/// truncation depth.
[[nodiscard]] IteratedIntegrals approx_iterated(
    RngStream& rng, const WienerIncrements& w, Calculus calculus,
    RhoReading reading = RhoReading::sqrt_3h);

/// Brute-force estimate from K fine sub-increments (its own draws), diagonal
/// folded to the exact formula. Returns the aggregated increments as well.
[[nodiscard]] PathStep oracle_iterated(RngStream& rng, int m, double h,
                                       std::int64_t subdivisions);

/// Adds h/2 to the diagonal and retags the mode as Stratonovich.
[[nodiscard]] IteratedIntegrals ito_to_strat(const IteratedIntegrals& iter);

/// Chen composition over adjacent intervals:
/// I(l,k) = Ia(l,k) + Ib(l,k) + dWa[l]*dWb[k]; increments add. Requires two
/// chen_composable Ito-mode operands; the result is tagged ito-approx.
[[nodiscard]] PathStep compose(const PathStep& a, const PathStep& b);

/// Finest-level noise realization of one path: n_fine steps of size h_fine,
/// each with increments and Ito-mode iterated integrals, generated from
/// streams derived per (master_seed, path_index, step). Coarse windows come
/// out of `aggregate` via left-folded Chen composition.
class WienerFineGrid {
 public:
  WienerFineGrid(std::uint64_t master_seed, std::uint64_t path_index, int m,
                 std::int64_t n_fine, double h_fine,
                 RhoReading reading = RhoReading::sqrt_3h);

  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] std::int64_t n_fine() const { return n_fine_; }
  [[nodiscard]] double h_fine() const { return h_fine_; }
  [[nodiscard]] std::uint64_t master_seed() const { return master_seed_; }
  [[nodiscard]] std::uint64_t path_index() const { return path_index_; }
  [[nodiscard]] const PathStep& step(std::int64_t i) const {
    return steps_.at(static_cast<std::size_t>(i));
  }
  /// Total auxiliary Gaussians drawn while building the grid.
  [[nodiscard]] std::uint64_t aux_gaussians() const { return aux_gaussians_; }

  /// Chen-composes steps [first, first+count) into one coarse step.
  [[nodiscard]] PathStep aggregate(std::int64_t first, std::int64_t count) const;

  /// Binary dump: little-endian header (u64 m, u64 n_fine, f64 h_fine,
  /// u64 seed), then per step the m increments followed by the row-major
  /// m x m integral matrix, all f64.
  void dump(std::ostream& os) const;
  static WienerFineGrid load(std::istream& is);

 private:
  WienerFineGrid() = default;

  int m_ = 0;
  std::int64_t n_fine_ = 0;
  double h_fine_ = 0.0;
  std::uint64_t master_seed_ = 0;
  std::uint64_t path_index_ = 0;
  std::uint64_t aux_gaussians_ = 0;
  std::vector<PathStep> steps_;
};

}  // namespace srk
