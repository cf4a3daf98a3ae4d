#include "srk/wiener.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace srk {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string to_string(Calculus c) {
  return c == Calculus::ito ? "ito" : "strat";
}

std::string to_string(IntegralMode mode) {
  switch (mode) {
    case IntegralMode::ito_approx: return "ito-approx";
    case IntegralMode::strat_approx: return "strat-approx";
    case IntegralMode::commutative_ito: return "commutative-ito";
    case IntegralMode::commutative_strat: return "commutative-strat";
    case IntegralMode::scalar_exact: return "scalar-exact";
    case IntegralMode::oracle: return "oracle";
  }
  return "?";
}

bool ito_family(IntegralMode mode) {
  switch (mode) {
    case IntegralMode::ito_approx:
    case IntegralMode::commutative_ito:
    case IntegralMode::scalar_exact:
    case IntegralMode::oracle:
      return true;
    case IntegralMode::strat_approx:
    case IntegralMode::commutative_strat:
      return false;
  }
  return false;
}

bool chen_composable(IntegralMode mode) {
  switch (mode) {
    case IntegralMode::ito_approx:
    case IntegralMode::scalar_exact:
    case IntegralMode::oracle:
      return true;
    default:
      return false;
  }
}

std::string to_string(RhoReading r) {
  return r == RhoReading::sqrt_3h ? "sqrt-3h" : "sqrt3-h";
}

RhoReading rho_reading_from_string(const std::string& name) {
  if (name == "sqrt-3h") return RhoReading::sqrt_3h;
  if (name == "sqrt3-h") return RhoReading::sqrt3_h;
  throw std::invalid_argument("unknown rho reading: " + name);
}

std::int64_t rho(int m, double h, RhoReading reading) {
  if (m < 1) throw std::invalid_argument("rho needs m >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("rho needs h > 0");
  if (m == 1) return 0;
  const double md = static_cast<double>(m);
  const double denom = reading == RhoReading::sqrt_3h
                           ? std::sqrt(3.0 * h) * kPi
                           : std::sqrt(3.0) * h * kPi;
  const double fourier = std::pow(md, 1.5) / denom;
  const double pairs = (md * md + md) / 2.0;
  return static_cast<std::int64_t>(std::ceil(fourier + pairs));
}

std::int64_t levy_truncation_depth(int m, double h, RhoReading reading) {
  if (m == 1) return 0;
  const std::int64_t budget = rho(m, h, reading);
  const std::int64_t tail = (static_cast<std::int64_t>(m) * m + m) / 2;
  const std::int64_t p = (budget - tail) / (2 * m);
  return p < 1 ? 1 : p;
}

WienerIncrements sample_increments(RngStream& rng, int m, double h) {
  if (m < 1) throw std::invalid_argument("sample_increments needs m >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("sample_increments needs h > 0");
  WienerIncrements w;
  w.h = h;
  w.dw.resize(m);
  const double sqh = std::sqrt(h);
  for (int k = 0; k < m; ++k) w.dw[k] = sqh * rng.normal();
  return w;
}

IteratedIntegrals commutative_matrix(const WienerIncrements& w,
                                     Calculus calculus) {
  const int m = w.m();
  IteratedIntegrals out(m, w.h, IntegralMode::commutative_ito);
  for (int l = 0; l < m; ++l) {
    out.at(l, l) = diagonal_ito(w.dw[l], w.h);
    for (int k = l + 1; k < m; ++k) {
      const double v = w.dw[l] * w.dw[k] / 2.0;
      out.at(l, k) = v;
      out.at(k, l) = v;
    }
  }
  // Stratonovich variant through the entrywise shift keeps the two mode
  // conversions bit-for-bit commuting.
  if (calculus == Calculus::stratonovich) return ito_to_strat(out);
  return out;
}

IteratedIntegrals approx_iterated(RngStream& rng, const WienerIncrements& w,
                                  Calculus calculus, RhoReading reading) {
  const int m = w.m();
  const double h = w.h;
  if (m < 1) throw std::invalid_argument("approx_iterated needs m >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("approx_iterated needs h > 0");

  IteratedIntegrals out(m, h,
                        m == 1 ? IntegralMode::scalar_exact
                               : IntegralMode::ito_approx);
  for (int k = 0; k < m; ++k) out.at(k, k) = diagonal_ito(w.dw[k], h);

  if (m > 1) {
    const std::int64_t depth = levy_truncation_depth(m, h, reading);
    const double sqh = std::sqrt(h);
    const double sq2 = std::sqrt(2.0);
    std::vector<double> xi(m);
    for (int k = 0; k < m; ++k) xi[k] = w.dw[k] / sqh;

    // Truncated Fourier expansion of the Levy areas. Draw order is fixed
    // (zeta block then eta block per frequency) for reproducibility.
    std::vector<double> area(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> zeta(m), eta(m);
    for (std::int64_t r = 1; r <= depth; ++r) {
      for (int j = 0; j < m; ++j) zeta[j] = rng.normal();
      for (int j = 0; j < m; ++j) eta[j] = rng.normal();
      const double inv_r = 1.0 / static_cast<double>(r);
      for (int l = 0; l < m; ++l)
        for (int k = l + 1; k < m; ++k)
          area[l * m + k] += inv_r * (zeta[l] * (sq2 * xi[k] + eta[k]) -
                                      zeta[k] * (sq2 * xi[l] + eta[l]));
    }
    double sum_inv_r2 = 0.0;
    for (std::int64_t r = 1; r <= depth; ++r)
      sum_inv_r2 += 1.0 / (static_cast<double>(r) * static_cast<double>(r));
    // Conditional variance weight of the discarded frequencies.
    const double rho_p = 1.0 / 12.0 - sum_inv_r2 / (2.0 * kPi * kPi);
    const double tail_scale = std::sqrt(rho_p > 0.0 ? rho_p : 0.0);

    // Tail correction with the exact conditional covariance of the
    // remainder: one shared mu draw per component plus one tau draw per
    // pair, in fixed order.
    std::vector<double> mu(m);
    for (int j = 0; j < m; ++j) mu[j] = rng.normal();
    std::uint64_t taus = 0;
    for (int l = 0; l < m; ++l) {
      for (int k = l + 1; k < m; ++k) {
        const double tau = rng.normal();
        ++taus;
        const double tail =
            tail_scale * (mu[l] * xi[k] - mu[k] * xi[l] + tau);
        const double a = area[l * m + k] / (2.0 * kPi) + tail;
        const double ilk = w.dw[l] * w.dw[k] / 2.0 + h * a;
        out.at(l, k) = ilk;
        // Pairing identity, enforced by construction.
        out.at(k, l) = w.dw[l] * w.dw[k] - ilk;
      }
    }
    out.aux_gaussians =
        2 * static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(depth) +
        static_cast<std::uint64_t>(m) + taus;
  }

  if (calculus == Calculus::stratonovich) return ito_to_strat(out);
  return out;
}

PathStep oracle_iterated(RngStream& rng, int m, double h,
                         std::int64_t subdivisions) {
  if (subdivisions < 1)
    throw std::invalid_argument("oracle_iterated needs K >= 1");
  if (m < 1 || !(h > 0.0))
    throw std::invalid_argument("oracle_iterated needs m >= 1, h > 0");
  const double hs = h / static_cast<double>(subdivisions);
  const double sqhs = std::sqrt(hs);

  PathStep out;
  out.w.h = h;
  out.w.dw.assign(m, 0.0);
  out.iter = IteratedIntegrals(m, h, IntegralMode::oracle);

  std::vector<double> delta(m);
  for (std::int64_t j = 0; j < subdivisions; ++j) {
    for (int k = 0; k < m; ++k) delta[k] = sqhs * rng.normal();
    for (int l = 0; l < m; ++l)
      for (int k = 0; k < m; ++k)
        out.iter.at(l, k) += out.w.dw[l] * delta[k];
    for (int k = 0; k < m; ++k) out.w.dw[k] += delta[k];
  }
  // The left-point Riemann sum is only an estimate on the diagonal; fold it
  // to the closed form of the aggregate increment instead.
  for (int k = 0; k < m; ++k)
    out.iter.at(k, k) = diagonal_ito(out.w.dw[k], h);
  out.iter.aux_gaussians =
      static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(subdivisions);
  return out;
}

IteratedIntegrals ito_to_strat(const IteratedIntegrals& iter) {
  if (!ito_family(iter.mode))
    throw std::invalid_argument("ito_to_strat: input is already Stratonovich");
  IteratedIntegrals out = iter;
  for (int k = 0; k < out.m; ++k)
    out.at(k, k) = iter.at(k, k) + iter.h / 2.0;
  switch (iter.mode) {
    case IntegralMode::commutative_ito:
      out.mode = IntegralMode::commutative_strat;
      break;
    default:
      out.mode = IntegralMode::strat_approx;
      break;
  }
  return out;
}

PathStep compose(const PathStep& a, const PathStep& b) {
  const int m = a.w.m();
  if (b.w.m() != m || a.iter.m != m || b.iter.m != m)
    throw std::invalid_argument("compose: dimension mismatch");
  if (!chen_composable(a.iter.mode) || !chen_composable(b.iter.mode))
    throw std::invalid_argument(
        "compose: operands must be Chen-composable Ito integrals, got " +
        to_string(a.iter.mode) + " and " + to_string(b.iter.mode));

  PathStep out;
  out.w.h = a.w.h + b.w.h;
  out.w.dw.resize(m);
  for (int k = 0; k < m; ++k) out.w.dw[k] = a.w.dw[k] + b.w.dw[k];
  out.iter = IteratedIntegrals(m, out.w.h, IntegralMode::ito_approx);
  for (int l = 0; l < m; ++l)
    for (int k = 0; k < m; ++k)
      out.iter.at(l, k) =
          a.iter.at(l, k) + b.iter.at(l, k) + a.w.dw[l] * b.w.dw[k];
  out.iter.aux_gaussians = a.iter.aux_gaussians + b.iter.aux_gaussians;
  return out;
}

WienerFineGrid::WienerFineGrid(std::uint64_t master_seed,
                               std::uint64_t path_index, int m,
                               std::int64_t n_fine, double h_fine,
                               RhoReading reading)
    : m_(m),
      n_fine_(n_fine),
      h_fine_(h_fine),
      master_seed_(master_seed),
      path_index_(path_index) {
  if (m < 1 || n_fine < 1 || !(h_fine > 0.0))
    throw std::invalid_argument("WienerFineGrid: bad dimensions");
  steps_.reserve(static_cast<std::size_t>(n_fine));
  for (std::int64_t i = 0; i < n_fine; ++i) {
    PathStep step;
    {
      RngStream rng = make_stream(master_seed, path_index, 0,
                                  static_cast<std::uint64_t>(i),
                                  StreamPurpose::fine_increments);
      step.w = sample_increments(rng, m, h_fine);
    }
    {
      RngStream rng = make_stream(master_seed, path_index, 0,
                                  static_cast<std::uint64_t>(i),
                                  StreamPurpose::fine_levy);
      step.iter = approx_iterated(rng, step.w, Calculus::ito, reading);
    }
    aux_gaussians_ += step.iter.aux_gaussians;
    steps_.push_back(std::move(step));
  }
}

PathStep WienerFineGrid::aggregate(std::int64_t first,
                                   std::int64_t count) const {
  if (first < 0 || count < 1 || first + count > n_fine_)
    throw std::out_of_range("WienerFineGrid::aggregate: window out of range");
  PathStep acc = steps_[static_cast<std::size_t>(first)];
  for (std::int64_t i = 1; i < count; ++i)
    acc = compose(acc, steps_[static_cast<std::size_t>(first + i)]);
  return acc;
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("truncated path dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

void WienerFineGrid::dump(std::ostream& os) const {
  put_u64(os, static_cast<std::uint64_t>(m_));
  put_u64(os, static_cast<std::uint64_t>(n_fine_));
  put_f64(os, h_fine_);
  put_u64(os, master_seed_);
  for (const PathStep& s : steps_) {
    for (double v : s.w.dw) put_f64(os, v);
    for (double v : s.iter.values) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("path dump write failed");
}

WienerFineGrid WienerFineGrid::load(std::istream& is) {
  WienerFineGrid g;
  const std::uint64_t m = get_u64(is);
  const std::uint64_t n = get_u64(is);
  const double h_fine = get_f64(is);
  const std::uint64_t seed = get_u64(is);
  if (m < 1 || m > (1u << 20) || n < 1)
    throw std::runtime_error("path dump header invalid");
  g.m_ = static_cast<int>(m);
  g.n_fine_ = static_cast<std::int64_t>(n);
  g.h_fine_ = h_fine;
  g.master_seed_ = seed;
  g.path_index_ = 0;  // not carried by the dump format
  g.steps_.resize(n);
  const IntegralMode mode =
      m == 1 ? IntegralMode::scalar_exact : IntegralMode::ito_approx;
  for (std::uint64_t i = 0; i < n; ++i) {
    PathStep& s = g.steps_[i];
    s.w.h = h_fine;
    s.w.dw.resize(m);
    for (std::uint64_t k = 0; k < m; ++k) s.w.dw[k] = get_f64(is);
    s.iter = IteratedIntegrals(static_cast<int>(m), h_fine, mode);
    for (double& v : s.iter.values) v = get_f64(is);
  }
  return g;
}

}  // namespace srk
