#include "srk/testeqs.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "srk/matexp.hpp"

namespace srk {

namespace {

void fill_zero(std::span<double> out) {
  for (double& v : out) v = 0.0;
}

}  // namespace

SdeProblem eq1() {
  SdeProblem p;
  p.d = 1;
  p.m = 1;
  p.calculus = Calculus::ito;
  p.noise_class = NoiseClass::scalar;
  p.x0 = {1.0};
  p.name = "eq1";
  p.drift = [](double, std::span<const double> x, std::span<double> out) {
    const double c = std::cos(x[0]);
    out[0] = -0.01 * std::sin(x[0]) * c * c * c;
  };
  p.diffusion = [](double, std::span<const double> x, int,
                   std::span<double> out) {
    const double c = std::cos(x[0]);
    out[0] = 0.1 * c * c;
  };
  p.diffusion_jacobian = [](double, std::span<const double> x, int,
                            std::span<double> out) {
    out[0] = -0.2 * std::cos(x[0]) * std::sin(x[0]);
  };
  const double u0 = std::tan(p.x0[0]);
  p.exact_solution = [u0](double, std::span<const double> w,
                          std::span<double> out) {
    out[0] = std::atan(0.1 * w[0] + u0);
  };
  return p;
}

SdeProblem eq2() {
  SdeProblem p;
  p.d = 1;
  p.m = 1;
  p.calculus = Calculus::ito;
  p.noise_class = NoiseClass::scalar;
  p.x0 = {0.5};
  p.name = "eq2";
  p.drift = [](double, std::span<const double> x, std::span<double> out) {
    out[0] = -0.25 * x[0] * (1.0 - x[0] * x[0]);
  };
  p.diffusion = [](double, std::span<const double> x, int,
                   std::span<double> out) {
    out[0] = 0.5 * (1.0 - x[0] * x[0]);
  };
  p.diffusion_jacobian = [](double, std::span<const double> x, int,
                            std::span<double> out) { out[0] = -x[0]; };
  const double c = p.x0[0];
  p.exact_solution = [c](double, std::span<const double> w,
                         std::span<double> out) {
    const double e = (1.0 + c) * std::exp(w[0]);
    out[0] = (e + c - 1.0) / (e - c + 1.0);
  };
  return p;
}

SdeProblem eq3(int m) {
  if (m < 1) throw std::invalid_argument("eq3: m >= 1");
  SdeProblem p;
  p.d = 1;
  p.m = m;
  p.calculus = Calculus::ito;
  p.noise_class = NoiseClass::additive;
  p.x0 = {1.0};
  p.name = "eq3";
  constexpr double alpha = 0.1;
  constexpr double beta = 0.5;
  p.drift = [](double t, std::span<const double> x, std::span<double> out) {
    out[0] = beta / std::sqrt(1.0 + t) - x[0] / (2.0 * (1.0 + t));
  };
  p.diffusion = [](double t, std::span<const double>, int,
                   std::span<double> out) {
    out[0] = alpha * beta / std::sqrt(1.0 + t);
  };
  p.diffusion_jacobian = [](double, std::span<const double>, int,
                            std::span<double> out) { out[0] = 0.0; };
  const double x0 = p.x0[0];
  p.exact_solution = [m, x0](double t, std::span<const double> w,
                             std::span<double> out) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += alpha * w[k];
    out[0] = (x0 + beta * (t + s)) / std::sqrt(1.0 + t);
  };
  return p;
}

SdeProblem eq4(int d) {
  if (d < 1) throw std::invalid_argument("eq4: d = m >= 1");
  SdeProblem p;
  p.d = d;
  p.m = d;
  p.calculus = Calculus::ito;
  p.noise_class = d == 1 ? NoiseClass::scalar : NoiseClass::commutative;
  p.x0.assign(d, 2.0);
  p.name = "eq4";

  // A and every B^k are of the form c*I + e*(ones); they all commute, which
  // is what makes the matrix-exponential closed form valid.
  auto amat = std::make_shared<std::vector<double>>(d * d, 0.05);
  auto bmat = std::make_shared<std::vector<double>>(d * d, 0.01);
  for (int i = 0; i < d; ++i) {
    (*amat)[i * d + i] = -1.5;
    (*bmat)[i * d + i] = 0.2;
  }

  auto apply = [d](const std::vector<double>& mat, std::span<const double> x,
                   std::span<double> out) {
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += mat[i * d + j] * x[j];
      out[i] = acc;
    }
  };
  p.drift = [amat, apply](double, std::span<const double> x,
                          std::span<double> out) { apply(*amat, x, out); };
  p.diffusion = [bmat, apply](double, std::span<const double> x, int,
                              std::span<double> out) { apply(*bmat, x, out); };
  p.diffusion_jacobian = [d, bmat](double, std::span<const double>, int,
                                   std::span<double> out) {
    for (int i = 0; i < d * d; ++i) out[i] = (*bmat)[i];
  };

  // Exponent (A - (m/2) B^2) t + B * sum_k W^k, all B^k being equal.
  auto drift_part = std::make_shared<std::vector<double>>(d * d);
  {
    const std::vector<double> b2 = mat_mul(*bmat, *bmat, d);
    for (int i = 0; i < d * d; ++i)
      (*drift_part)[i] = (*amat)[i] - 0.5 * d * b2[i];
  }
  const std::vector<double> x0 = p.x0;
  p.exact_solution = [d, drift_part, bmat, x0](double t,
                                               std::span<const double> w,
                                               std::span<double> out) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += w[k];
    std::vector<double> expo(d * d);
    for (int i = 0; i < d * d; ++i)
      expo[i] = (*drift_part)[i] * t + (*bmat)[i] * s;
    const std::vector<double> ex = matrix_exp(expo, d);
    const std::vector<double> res = mat_vec(ex, x0, d);
    for (int i = 0; i < d; ++i) out[i] = res[i];
  };
  return p;
}

SdeProblem eq5() {
  SdeProblem p;
  p.d = 2;
  p.m = 4;
  p.calculus = Calculus::ito;
  p.noise_class = NoiseClass::general;
  p.x0 = {2.0, 2.0};
  p.name = "eq5";
  const double ca = std::cos(0.5);
  const double sa = std::sin(0.5);
  p.drift = [](double, std::span<const double>, std::span<double> out) {
    fill_zero(out);
  };
  // Columns 0,1 rotate by the angle and depend on x1; columns 2,3 use the
  // perpendicular direction and depend on x2.
  p.diffusion = [ca, sa](double, std::span<const double> x, int k,
                         std::span<double> out) {
    switch (k) {
      case 0: out[0] = ca * std::sin(x[0]); out[1] = sa * std::sin(x[0]); break;
      case 1: out[0] = ca * std::cos(x[0]); out[1] = sa * std::cos(x[0]); break;
      case 2: out[0] = -sa * std::sin(x[1]); out[1] = ca * std::sin(x[1]); break;
      default: out[0] = -sa * std::cos(x[1]); out[1] = ca * std::cos(x[1]);
    }
  };
  p.diffusion_jacobian = [ca, sa](double, std::span<const double> x, int k,
                                  std::span<double> out) {
    fill_zero(out);
    switch (k) {
      case 0:
        out[0] = ca * std::cos(x[0]);
        out[2] = sa * std::cos(x[0]);
        break;
      case 1:
        out[0] = -ca * std::sin(x[0]);
        out[2] = -sa * std::sin(x[0]);
        break;
      case 2:
        out[1] = -sa * std::cos(x[1]);
        out[3] = ca * std::cos(x[1]);
        break;
      default:
        out[1] = sa * std::sin(x[1]);
        out[3] = -ca * std::sin(x[1]);
    }
  };
  return p;
}

SdeProblem eq6(int d) {
  if (d < 1) throw std::invalid_argument("eq6: d = m >= 1");
  SdeProblem p;
  p.d = d;
  p.m = d;
  p.calculus = Calculus::ito;
  p.noise_class = d == 1 ? NoiseClass::scalar : NoiseClass::general;
  p.x0.assign(d, 0.1);
  p.name = "eq6";
  const double beta_off = 0.1 / static_cast<double>(d);
  p.drift = [d, beta_off](double, std::span<const double> x,
                          std::span<double> out) {
    for (int i = 0; i < d; ++i) {
      double inter = 0.0;
      for (int j = 0; j < d; ++j) inter += (j == i ? 1.5 : beta_off) * x[j];
      out[i] = (0.2 + inter) * x[i];
    }
  };
  // Column k feeds rows k-1, k, k+1 (0-based here; entries falling outside
  // the state vector are dropped) with the value x_k / 5.
  p.diffusion = [d](double, std::span<const double> x, int k,
                    std::span<double> out) {
    fill_zero(out);
    const double v = 0.2 * x[k];
    for (int i = k - 1; i <= k + 1; ++i)
      if (i >= 0 && i < d) out[i] = v;
  };
  p.diffusion_jacobian = [d](double, std::span<const double>, int k,
                             std::span<double> out) {
    fill_zero(out);
    for (int i = k - 1; i <= k + 1; ++i)
      if (i >= 0 && i < d) out[i * d + k] = 0.2;
  };
  return p;
}

SdeProblem make_problem(const std::string& id, int dim) {
  if (id == "eq1") return eq1();
  if (id == "eq2") return eq2();
  if (id == "eq3") return eq3(dim == 0 ? 1 : dim);
  if (id == "eq4") return eq4(dim == 0 ? 2 : dim);
  if (id == "eq5") return eq5();
  if (id == "eq6") return eq6(dim == 0 ? 2 : dim);
  throw std::invalid_argument("unknown problem id: " + id);
}

const std::vector<std::string>& problem_ids() {
  static const std::vector<std::string> ids = {"eq1", "eq2", "eq3",
                                               "eq4", "eq5", "eq6"};
  return ids;
}

ReferencePath reference_trajectory(const SdeProblem& p,
                                   const ReferenceConfig& cfg,
                                   std::uint64_t seed,
                                   std::uint64_t path_index,
                                   RhoReading reading) {
  if (cfg.href_exp < 0 || cfg.href_exp > 30)
    throw std::invalid_argument("reference_trajectory: href_exp out of range");
  const std::int64_t n_fine = std::int64_t{1} << cfg.href_exp;
  const double h_fine = (p.T - p.t0) / static_cast<double>(n_fine);
  SchemeInstance scheme = make_scheme(cfg.scheme);
  WienerFineGrid grid(seed, path_index, p.m, n_fine, h_fine, reading);
  AggregatePathSource src(grid, 1);
  Trajectory traj = integrate(scheme, p, n_fine, src);
  return ReferencePath{std::move(grid), std::move(traj)};
}

}  // namespace srk
