#include "srk/matexp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace srk {

std::vector<double> mat_mul(std::span<const double> a, std::span<const double> b,
                            int d) {
  std::vector<double> c(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const double aik = a[i * d + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < d; ++j) c[i * d + j] += aik * b[k * d + j];
    }
  return c;
}

std::vector<double> mat_vec(std::span<const double> a, std::span<const double> x,
                            int d) {
  std::vector<double> y(d, 0.0);
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += a[i * d + j] * x[j];
    y[i] = acc;
  }
  return y;
}

namespace {

std::vector<double> identity(int d) {
  std::vector<double> I(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) I[i * d + i] = 1.0;
  return I;
}

void axpy_mat(std::vector<double>& y, double a, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double norm1(std::span<const double> a, int d) {
  double best = 0.0;
  for (int j = 0; j < d; ++j) {
    double col = 0.0;
    for (int i = 0; i < d; ++i) col += std::fabs(a[i * d + j]);
    if (col > best) best = col;
  }
  return best;
}

// Solves A X = B in place for X (both d x d, row-major) by Gaussian
// elimination with partial pivoting. A is destroyed.
std::vector<double> solve(std::vector<double> A, std::vector<double> B, int d) {
  for (int col = 0; col < d; ++col) {
    int piv = col;
    double best = std::fabs(A[col * d + col]);
    for (int r = col + 1; r < d; ++r) {
      const double v = std::fabs(A[r * d + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw std::runtime_error("singular matrix in pade solve");
    if (piv != col) {
      for (int j = 0; j < d; ++j) {
        std::swap(A[piv * d + j], A[col * d + j]);
        std::swap(B[piv * d + j], B[col * d + j]);
      }
    }
    const double inv = 1.0 / A[col * d + col];
    for (int r = col + 1; r < d; ++r) {
      const double f = A[r * d + col] * inv;
      if (f == 0.0) continue;
      for (int j = col; j < d; ++j) A[r * d + j] -= f * A[col * d + j];
      for (int j = 0; j < d; ++j) B[r * d + j] -= f * B[col * d + j];
    }
  }
  for (int col = d - 1; col >= 0; --col) {
    const double inv = 1.0 / A[col * d + col];
    for (int j = 0; j < d; ++j) {
      double acc = B[col * d + j];
      for (int k = col + 1; k < d; ++k) acc -= A[col * d + k] * B[k * d + j];
      B[col * d + j] = acc * inv;
    }
  }
  return B;
}

}  // namespace

std::vector<double> matrix_exp(std::span<const double> M, int d) {
  if (d < 1) throw std::invalid_argument("matrix_exp needs d >= 1");
  if (static_cast<int>(M.size()) != d * d)
    throw std::invalid_argument("matrix_exp dimension mismatch");
  for (double v : M)
    if (!std::isfinite(v))
      throw std::invalid_argument("matrix_exp needs finite entries");

  // Degree-13 Pade coefficients; theta is the 1-norm bound below which the
  // approximant reaches double precision without scaling.
  static const double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;

  const double nrm = norm1(M, d);
  int squarings = 0;
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    if (squarings > 64) throw std::runtime_error("matrix_exp overflow");
  }
  const double scale = std::ldexp(1.0, -squarings);

  std::vector<double> A(M.begin(), M.end());
  for (double& v : A) v *= scale;

  const std::vector<double> I = identity(d);
  const std::vector<double> A2 = mat_mul(A, A, d);
  const std::vector<double> A4 = mat_mul(A2, A2, d);
  const std::vector<double> A6 = mat_mul(A2, A4, d);

  // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
  std::vector<double> W(static_cast<std::size_t>(d) * d, 0.0);
  axpy_mat(W, b[13], A6);
  axpy_mat(W, b[11], A4);
  axpy_mat(W, b[9], A2);
  std::vector<double> U = mat_mul(A6, W, d);
  axpy_mat(U, b[7], A6);
  axpy_mat(U, b[5], A4);
  axpy_mat(U, b[3], A2);
  axpy_mat(U, b[1], I);
  U = mat_mul(A, U, d);

  // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
  std::fill(W.begin(), W.end(), 0.0);
  axpy_mat(W, b[12], A6);
  axpy_mat(W, b[10], A4);
  axpy_mat(W, b[8], A2);
  std::vector<double> V = mat_mul(A6, W, d);
  axpy_mat(V, b[6], A6);
  axpy_mat(V, b[4], A4);
  axpy_mat(V, b[2], A2);
  axpy_mat(V, b[0], I);

  // (V - U) R = (V + U)
  std::vector<double> num(V), den(V);
  axpy_mat(num, 1.0, U);
  axpy_mat(den, -1.0, U);
  std::vector<double> R = solve(std::move(den), std::move(num), d);

  for (int i = 0; i < squarings; ++i) R = mat_mul(R, R, d);
  return R;
}

}  // namespace srk
