#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srk/sde.hpp"
#include "srk/solver.hpp"
#include "srk/wiener.hpp"

namespace srk {

// Benchmark problems on [0, 1], all stated in Ito form.

/// Scalar, arctan closed form: a = -(1/100) sin(x) cos^3(x),
/// b = (1/10) cos^2(x), X0 = 1.
[[nodiscard]] SdeProblem eq1();

/// Scalar, tanh-type closed form: a = -(1/4) x (1 - x^2),
/// b = (1/2)(1 - x^2), X0 = 1/2. Violates the global Lipschitz assumptions;
/// observed orders are empirical.
[[nodiscard]] SdeProblem eq2();

/// Scalar with m-dimensional additive noise, affine closed form:
/// a = beta/sqrt(1+t) - x/(2(1+t)), b^k = alpha_k beta/sqrt(1+t),
/// alpha_k = 1/10, beta = 1/2, X0 = 1.
[[nodiscard]] SdeProblem eq3(int m);

/// Linear system with d = m and commuting coefficient matrices,
/// matrix-exponential closed form: A_ii = -3/2, A_ij = 1/20, all B^k equal
/// with B_ii = 1/5, B_ij = 1/100, X0 = (2, ..., 2).
[[nodiscard]] SdeProblem eq4(int d);

/// Stochastic flow on the torus: d = 2, m = 4, zero drift, rotation angle
/// 1/2, X0 = (2, 2). Non-commutative, no closed form.
[[nodiscard]] SdeProblem eq5();

/// Stochastic Lotka-Volterra, d = m: a^i = x_i/5 + sum_j beta_ij x_j x_i
/// with beta_ii = 3/2, beta_ij = 1/(10 d); b^{i,k} = x_k/5 for
/// k-1 <= i <= k+1 (1-based, indices outside 1..d dropped), else 0;
/// X0 = (1/10, ..., 1/10). Non-commutative, no closed form.
[[nodiscard]] SdeProblem eq6(int d);

/// Lookup by id "eq1".."eq6". `dim` is m for eq3 and d for eq4 / eq6
/// (0 picks the default 1, 2, 2 respectively); ignored by the fixed-size
/// problems.
[[nodiscard]] SdeProblem make_problem(const std::string& id, int dim = 0);
[[nodiscard]] const std::vector<std::string>& problem_ids();

/// Reference-solution setup for problems without a closed form. The step
/// size is dyadic in the problem's horizon: h_ref = (T - t0) * 2^-href_exp,
/// so every coarser dyadic step aggregates the same fine grid.
struct ReferenceConfig {
  std::string scheme = "MIL";
  int href_exp = 14;
  bool shared_paths = true;  // coarse runs reuse the reference increments
};

struct ReferencePath {
  WienerFineGrid grid;
  Trajectory trajectory;
};

/// Builds the path's fine Wiener grid and integrates the reference scheme
/// over it. Deterministic in (seed, path_index); the grid is the one to
/// aggregate for every coarser run of the same path.
[[nodiscard]] ReferencePath reference_trajectory(
    const SdeProblem& p, const ReferenceConfig& cfg, std::uint64_t seed,
    std::uint64_t path_index, RhoReading reading = RhoReading::sqrt_3h);

}  // namespace srk
