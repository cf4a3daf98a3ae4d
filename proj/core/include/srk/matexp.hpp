#pragma once

#include <span>
#include <vector>

namespace srk {

/// Dense row-major d x d matrix product c = a * b.
[[nodiscard]] std::vector<double> mat_mul(std::span<const double> a,
                                          std::span<const double> b, int d);

/// Dense row-major matrix-vector product a * x.
[[nodiscard]] std::vector<double> mat_vec(std::span<const double> a,
                                          std::span<const double> x, int d);

/// exp(M) for a dense row-major d x d matrix via scaling-and-squaring with a
/// degree-13 Pade approximant. Intended for the small, mild matrices of the
/// linear test problems (d <= 16 or so).
[[nodiscard]] std::vector<double> matrix_exp(std::span<const double> M, int d);

}  // namespace srk
