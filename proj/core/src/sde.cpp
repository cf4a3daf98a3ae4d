#include "srk/sde.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace srk {

std::string to_string(NoiseClass nc) {
  switch (nc) {
    case NoiseClass::general: return "general";
    case NoiseClass::commutative: return "commutative";
    case NoiseClass::additive: return "additive";
    case NoiseClass::scalar: return "scalar";
  }
  return "?";
}

void SdeProblem::validate() const {
  if (d < 1 || m < 1)
    throw std::invalid_argument("SdeProblem needs d >= 1 and m >= 1");
  if (static_cast<int>(x0.size()) != d)
    throw std::invalid_argument("SdeProblem: x0 must have length d");
  if (!(T > t0)) throw std::invalid_argument("SdeProblem needs T > t0");
  if (!drift || !diffusion)
    throw std::invalid_argument("SdeProblem needs drift and diffusion");
  if (noise_class == NoiseClass::scalar && m != 1)
    throw std::invalid_argument("scalar noise class requires m = 1");
}

namespace {

double norm2(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

std::vector<double> fd_jacobian(const SdeProblem& p, double t,
                                std::span<const double> x, int k, double eps) {
  const int d = p.d;
  if (eps <= 0.0) eps = 1e-5 * (1.0 + norm2(x));
  std::vector<double> jac(static_cast<std::size_t>(d) * d);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  std::vector<double> bp(d), bm(d);
  for (int q = 0; q < d; ++q) {
    const double orig = x[q];
    xp[q] = orig + eps;
    xm[q] = orig - eps;
    p.diffusion(t, xp, k, bp);
    p.diffusion(t, xm, k, bm);
    for (int i = 0; i < d; ++i) jac[i * d + q] = (bp[i] - bm[i]) / (2.0 * eps);
    xp[q] = orig;
    xm[q] = orig;
  }
  return jac;
}

std::vector<double> diffusion_jacobian_or_fd(const SdeProblem& p, double t,
                                             std::span<const double> x, int k) {
  if (p.has_jacobian()) {
    std::vector<double> jac(static_cast<std::size_t>(p.d) * p.d);
    p.diffusion_jacobian(t, x, k, jac);
    return jac;
  }
  return fd_jacobian(p, t, x, k);
}

std::vector<double> strat_drift_correction(const SdeProblem& p, double t,
                                           std::span<const double> x) {
  const int d = p.d;
  std::vector<double> c(d, 0.0);
  std::vector<double> b(d);
  for (int j = 0; j < p.m; ++j) {
    p.diffusion(t, x, j, b);
    const std::vector<double> jac = diffusion_jacobian_or_fd(p, t, x, j);
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int q = 0; q < d; ++q) acc += jac[i * d + q] * b[q];
      c[i] += 0.5 * acc;
    }
  }
  return c;
}

namespace {

SdeProblem convert_calculus(const SdeProblem& p, Calculus target) {
  if (p.calculus == target) return p;
  p.validate();
  // The shifted drift needs the original problem's diffusion and Jacobian;
  // keep a stable copy alive inside the closure.
  auto base = std::make_shared<const SdeProblem>(p);
  const double sign = target == Calculus::stratonovich ? -1.0 : 1.0;
  SdeProblem q = p;
  q.calculus = target;
  q.drift = [base, sign](double t, std::span<const double> x,
                         std::span<double> out) {
    base->drift(t, x, out);
    const std::vector<double> c = strat_drift_correction(*base, t, x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * c[i];
  };
  return q;
}

}  // namespace

SdeProblem to_stratonovich(const SdeProblem& p) {
  return convert_calculus(p, Calculus::stratonovich);
}

SdeProblem to_ito(const SdeProblem& p) {
  return convert_calculus(p, Calculus::ito);
}

CommutativityReport check_commutativity(const SdeProblem& p, int n_probes,
                                        double tol, std::uint64_t seed) {
  p.validate();
  CommutativityReport rep;
  rep.tolerance = tol;
  rep.probes = n_probes;

  const int d = p.d;
  const int m = p.m;
  if (m == 1) {
    rep.commutative = true;
    return rep;
  }

  std::vector<double> x(d);
  std::vector<std::vector<double>> cols(m, std::vector<double>(d));
  std::vector<std::vector<double>> jacs(m);
  std::vector<double> v(d);
  for (int probe = 0; probe < n_probes; ++probe) {
    RngStream rng = make_stream(seed, 0, 0, static_cast<std::uint64_t>(probe),
                                StreamPurpose::probe);
    for (int i = 0; i < d; ++i) x[i] = p.x0[i] + rng.normal();
    const double t = p.t0 + rng.uniform01() * (p.T - p.t0);
    const double scale = 1.0 + norm2(x);

    for (int j = 0; j < m; ++j) {
      p.diffusion(t, x, j, cols[j]);
      jacs[j] = diffusion_jacobian_or_fd(p, t, x, j);
    }
    for (int j1 = 0; j1 < m; ++j1) {
      for (int j2 = j1 + 1; j2 < m; ++j2) {
        // v = (d b^{j2}) b^{j1} - (d b^{j1}) b^{j2}, componentwise the
        // pairwise commutativity defect.
        for (int i = 0; i < d; ++i) {
          double acc = 0.0;
          for (int q = 0; q < d; ++q)
            acc += jacs[j2][i * d + q] * cols[j1][q] -
                   jacs[j1][i * d + q] * cols[j2][q];
          v[i] = acc;
        }
        for (int i = 0; i < d; ++i) {
          const double scaled = std::fabs(v[i]) / scale;
          if (scaled > rep.max_violation) rep.max_violation = scaled;
        }
      }
    }
  }
  rep.commutative = rep.max_violation <= tol;
  return rep;
}

}  // namespace srk
