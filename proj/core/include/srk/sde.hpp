#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "srk/wiener.hpp"

namespace srk {

enum class NoiseClass { general, commutative, additive, scalar };

[[nodiscard]] std::string to_string(NoiseClass nc);

/// SDE dX = a(t,X) dt + sum_k b^k(t,X) dW^k on [t0, T], in the declared
/// calculus. Diffusion is evaluated one column at a time (k in 0..m-1).
/// exact_solution, when present, maps (t, terminal Wiener vector W_t) to the
/// pathwise solution.
struct SdeProblem {
  int d = 0;
  int m = 0;
  Calculus calculus = Calculus::ito;
  NoiseClass noise_class = NoiseClass::general;
  double t0 = 0.0;
  double T = 1.0;
  std::vector<double> x0;
  std::string name;

  using DriftFn =
      std::function<void(double t, std::span<const double> x, std::span<double> out)>;
  using DiffusionFn = std::function<void(double t, std::span<const double> x,
                                         int k, std::span<double> out)>;
  /// Row-major d x d Jacobian of diffusion column k.
  using JacobianFn = std::function<void(double t, std::span<const double> x,
                                        int k, std::span<double> out)>;
  using ExactFn =
      std::function<void(double t, std::span<const double> w, std::span<double> out)>;

  DriftFn drift;
  DiffusionFn diffusion;
  JacobianFn diffusion_jacobian;  // optional; fd_jacobian is the fallback
  ExactFn exact_solution;         // optional

  [[nodiscard]] bool has_exact() const { return bool(exact_solution); }
  [[nodiscard]] bool has_jacobian() const { return bool(diffusion_jacobian); }

  /// Dimension and callable sanity; throws std::invalid_argument.
  void validate() const;
};

/// Central-difference Jacobian of diffusion column k; eps <= 0 selects the
/// default 1e-5 * (1 + ||x||).
[[nodiscard]] std::vector<double> fd_jacobian(const SdeProblem& p, double t,
                                              std::span<const double> x, int k,
                                              double eps = 0.0);

/// Evaluates diffusion column k's Jacobian, analytic when available and
/// finite-difference otherwise.
[[nodiscard]] std::vector<double> diffusion_jacobian_or_fd(
    const SdeProblem& p, double t, std::span<const double> x, int k);

/// The drift shift between the two calculi:
/// c(t,x) = 1/2 sum_j (d b^j/dx)(t,x) * b^j(t,x).
/// Ito drift = Strat drift + c; Strat drift = Ito drift - c.
[[nodiscard]] std::vector<double> strat_drift_correction(
    const SdeProblem& p, double t, std::span<const double> x);

/// Same solution process, Stratonovich form (drift a - c). Identity when the
/// problem is already Stratonovich.
[[nodiscard]] SdeProblem to_stratonovich(const SdeProblem& p);
/// Same solution process, Ito form (drift a + c).
[[nodiscard]] SdeProblem to_ito(const SdeProblem& p);

struct CommutativityReport {
  bool commutative = false;
  /// max over probes of the scaled violation max|...| / (1 + ||x||).
  double max_violation = 0.0;
  double tolerance = 0.0;
  int probes = 0;
};

/// Numerically probes the pairwise commutativity of the diffusion columns at
/// random states around x0. A sampling check, not a proof.
[[nodiscard]] CommutativityReport check_commutativity(
    const SdeProblem& p, int n_probes = 64, double tol = 1e-8,
    std::uint64_t seed = 0x5eedu);

}  // namespace srk
