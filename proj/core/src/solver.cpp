#include "srk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace srk {

std::string to_string(Selector s) {
  switch (s) {
    case Selector::none: return "none";
    case Selector::ito_approx: return "ito-approx";
    case Selector::strat_approx: return "strat-approx";
    case Selector::commutative_ito: return "commutative-ito";
    case Selector::commutative_strat: return "commutative-strat";
    case Selector::additive: return "additive";
  }
  return "?";
}

namespace {

// Single accumulation kernel shared by every stepper so that schemes which
// coincide algebraically (EM via tableau vs the dedicated formula, the
// additive-noise family on additive problems) also coincide bit for bit.
inline void axpy(std::span<double> y, double a, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double norm_inf(std::span<const double> x) {
  double best = 0.0;
  for (double v : x) {
    const double a = std::fabs(v);
    if (a > best) best = a;
  }
  return best;
}

SchemeInstance::View make_view(const ExtendedTableau& t) {
  SchemeInstance::View v;
  v.s = t.s;
  auto vec = [](const std::vector<Rational>& r) {
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i].to_double();
    return out;
  };
  auto mat = [&](const std::vector<std::vector<Rational>>& r) {
    std::vector<std::vector<double>> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = vec(r[i]);
    return out;
  };
  v.c0 = vec(t.c0);
  v.c1 = vec(t.c1);
  v.alpha = vec(t.alpha);
  v.beta1 = vec(t.beta1);
  v.beta2 = vec(t.beta2);
  v.A0 = mat(t.A0);
  v.A1 = mat(t.A1);
  v.B1 = mat(t.B1);
  v.drift_implicit = t.drift_implicit();
  for (const auto& row : v.B1)
    for (double e : row)
      if (e != 0.0) v.any_B1 = true;
  return v;
}

void check_step_inputs(const SchemeInstance& scheme, const SdeProblem& p,
                       const StepContext& ctx, std::span<const double> y,
                       std::span<double> out, bool want_iter) {
  if (static_cast<int>(y.size()) != p.d || static_cast<int>(out.size()) != p.d)
    throw std::invalid_argument("step: state size mismatch");
  if (ctx.wiener == nullptr || ctx.wiener->m() != p.m)
    throw std::invalid_argument("step: wiener increments missing or wrong m");
  if (!(ctx.h > 0.0)) throw std::invalid_argument("step: h must be positive");
  if (want_iter) {
    if (ctx.iterated == nullptr)
      throw std::invalid_argument(scheme.name +
                                  " needs iterated integrals in the context");
    if (ctx.iterated->m != p.m)
      throw std::invalid_argument("step: iterated integrals wrong m");
    const bool want_ito = scheme.required_calculus() == Calculus::ito;
    if (want_ito != ito_family(ctx.iterated->mode))
      throw std::invalid_argument(
          scheme.name + ": iterated-integral mode " +
          to_string(ctx.iterated->mode) + " does not match the scheme calculus");
  }
}

// Drift stage states and values per the tableau (shared by the general and
// additive methods). Fills astage[j] for every needed stage j; explicit
// sweep when A0 is strictly lower triangular, otherwise fixed-point
// iteration on the coupled stage system.
void drift_stages(const SchemeInstance& scheme, const SdeProblem& p,
                  const StepContext& ctx, std::span<const double> y,
                  std::vector<std::vector<double>>& astage,
                  EvalCounters* counters, const ImplicitOptions& opts) {
  const auto& v = scheme.view;
  const int s = v.s;
  const int d = p.d;
  const double t = ctx.t;
  const double h = ctx.h;

  std::vector<char> need(s, 0);
  for (int j = 0; j < s; ++j) {
    bool n = v.alpha[j] != 0.0;
    for (int i = 0; i < s && !n; ++i)
      n = v.A0[i][j] != 0.0 || v.A1[i][j] != 0.0;
    need[j] = n ? 1 : 0;
  }

  astage.assign(s, {});
  auto eval = [&](int j, std::span<const double> state) {
    astage[j].assign(d, 0.0);
    p.drift(t + v.c0[j] * h, state, astage[j]);
    if (counters) ++counters->drift_calls;
  };

  if (!v.drift_implicit) {
    std::vector<double> H0(d);
    for (int j = 0; j < s; ++j) {
      if (!need[j]) continue;
      H0.assign(y.begin(), y.end());
      for (int j2 = 0; j2 < j; ++j2)
        if (v.A0[j][j2] != 0.0) axpy(H0, v.A0[j][j2] * h, astage[j2]);
      eval(j, H0);
    }
    return;
  }

  // Coupled stages: iterate H0_i = y + h sum_j A0[i][j] a(t+c0_j h, H0_j).
  std::vector<char> feeds(s, 0);  // stage values that appear in some row
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      if (v.A0[i][j] != 0.0) feeds[j] = 1;

  std::vector<std::vector<double>> H0(s, std::vector<double>(y.begin(), y.end()));
  std::vector<double> next(d);
  const double tol = opts.tolerance * (1.0 + norm_inf(y));
  bool converged = false;
  for (int it = 0; it < opts.max_iterations && !converged; ++it) {
    for (int j = 0; j < s; ++j)
      if (feeds[j]) eval(j, H0[j]);
    double delta = 0.0;
    for (int i = 0; i < s; ++i) {
      next.assign(y.begin(), y.end());
      for (int j = 0; j < s; ++j)
        if (v.A0[i][j] != 0.0) axpy(next, v.A0[i][j] * h, astage[j]);
      for (int q = 0; q < d; ++q) {
        const double dq = std::fabs(next[q] - H0[i][q]);
        if (dq > delta) delta = dq;
      }
      H0[i] = next;
    }
    converged = delta <= tol;
  }
  if (!converged)
    throw std::runtime_error(
        scheme.name +
        ": implicit drift stages did not converge (step size too large for "
        "the fixed-point solve)");
  for (int j = 0; j < s; ++j)
    if (need[j]) eval(j, H0[j]);
}

}  // namespace

void srk_step(const SchemeInstance& scheme, const SdeProblem& p,
              const StepContext& ctx, std::span<const double> y,
              std::span<double> out, EvalCounters* counters,
              const ImplicitOptions& opts) {
  const auto& v = scheme.view;
  const int s = v.s;
  const int d = p.d;
  const int m = p.m;
  const double t = ctx.t;
  const double h = ctx.h;
  check_step_inputs(scheme, p, ctx, y, out, v.any_B1);
  const WienerIncrements& w = *ctx.wiener;

  std::vector<std::vector<double>> astage;
  drift_stages(scheme, p, ctx, y, astage, counters, opts);

  // Diffusion stages: bstage[i][k] = b^k evaluated at the k-th stage state.
  std::vector<char> need(s, 0);
  for (int i = 0; i < s; ++i) {
    bool n = v.beta1[i] != 0.0 || v.beta2[i] != 0.0;
    for (int i2 = i + 1; i2 < s && !n; ++i2) n = v.B1[i2][i] != 0.0;
    need[i] = n ? 1 : 0;
  }

  std::vector<std::vector<std::vector<double>>> bstage(s);
  std::vector<double> base(d), Hk(d);
  for (int i = 0; i < s; ++i) {
    if (!need[i]) continue;
    base.assign(y.begin(), y.end());
    for (int j = 0; j < s; ++j)
      if (v.A1[i][j] != 0.0) axpy(base, v.A1[i][j] * h, astage[j]);

    bool row_coupled = false;
    for (int j = 0; j < i; ++j) row_coupled |= v.B1[i][j] != 0.0;

    bstage[i].assign(m, {});
    const double ti = t + v.c1[i] * h;
    for (int k = 0; k < m; ++k) {
      std::span<const double> state;
      if (row_coupled) {
        Hk.assign(base.begin(), base.end());
        for (int j = 0; j < i; ++j) {
          if (v.B1[i][j] == 0.0) continue;
          for (int l = 0; l < m; ++l)
            axpy(Hk, v.B1[i][j] * ctx.iterated->at(l, k), bstage[j][l]);
        }
        state = Hk;
      } else {
        state = base;
      }
      bstage[i][k].assign(d, 0.0);
      p.diffusion(ti, state, k, bstage[i][k]);
      if (counters) ++counters->diffusion_calls;
    }
  }

  std::copy(y.begin(), y.end(), out.begin());
  for (int j = 0; j < s; ++j)
    if (v.alpha[j] != 0.0) axpy(out, v.alpha[j] * h, astage[j]);
  for (int i = 0; i < s; ++i) {
    if (!need[i]) continue;
    for (int k = 0; k < m; ++k) {
      const double wgt = v.beta1[i] * w.dw[k] + v.beta2[i];
      if (wgt != 0.0) axpy(out, wgt, bstage[i][k]);
    }
  }
}

void additive_step(const SchemeInstance& scheme, const SdeProblem& p,
                   const StepContext& ctx, std::span<const double> y,
                   std::span<double> out, EvalCounters* counters,
                   const ImplicitOptions& opts) {
  const auto& v = scheme.view;
  const int m = p.m;
  check_step_inputs(scheme, p, ctx, y, out, false);
  if (p.noise_class != NoiseClass::additive)
    throw std::invalid_argument(scheme.name +
                                " requires an additive-noise problem");
  const WienerIncrements& w = *ctx.wiener;

  std::vector<std::vector<double>> astage;
  drift_stages(scheme, p, ctx, y, astage, counters, opts);

  std::copy(y.begin(), y.end(), out.begin());
  for (int j = 0; j < v.s; ++j)
    if (v.alpha[j] != 0.0) axpy(out, v.alpha[j] * ctx.h, astage[j]);

  std::vector<double> bk(p.d);
  for (int i = 0; i < v.s; ++i) {
    if (v.beta1[i] == 0.0) continue;
    const double ti = ctx.t + v.c1[i] * ctx.h;
    for (int k = 0; k < m; ++k) {
      bk.assign(p.d, 0.0);
      p.diffusion(ti, y, k, bk);  // additive noise ignores the state
      if (counters) ++counters->diffusion_calls;
      const double wgt = v.beta1[i] * w.dw[k];
      if (wgt != 0.0) axpy(out, wgt, bk);
    }
  }
}

void em_step(const SdeProblem& p, const StepContext& ctx,
             std::span<const double> y, std::span<double> out,
             EvalCounters* counters) {
  const int d = p.d;
  const int m = p.m;
  if (static_cast<int>(y.size()) != d || ctx.wiener == nullptr ||
      ctx.wiener->m() != m)
    throw std::invalid_argument("em_step: bad inputs");

  std::vector<double> a(d, 0.0);
  p.drift(ctx.t, y, a);
  if (counters) ++counters->drift_calls;
  std::copy(y.begin(), y.end(), out.begin());
  axpy(out, ctx.h, a);

  std::vector<double> bk(d);
  for (int k = 0; k < m; ++k) {
    bk.assign(d, 0.0);
    p.diffusion(ctx.t, y, k, bk);
    if (counters) ++counters->diffusion_calls;
    const double wgt = ctx.wiener->dw[k];
    if (wgt != 0.0) axpy(out, wgt, bk);
  }
}

void milstein_step(const SdeProblem& p, const StepContext& ctx,
                   std::span<const double> y, std::span<double> out,
                   EvalCounters* counters) {
  const int d = p.d;
  const int m = p.m;
  if (ctx.iterated == nullptr || ctx.iterated->m != m)
    throw std::invalid_argument("milstein_step: iterated integrals missing");
  if (p.calculus != Calculus::ito || !ito_family(ctx.iterated->mode))
    throw std::invalid_argument("milstein_step: needs Ito problem and "
                                "Ito-mode integrals");

  std::vector<double> a(d, 0.0);
  p.drift(ctx.t, y, a);
  if (counters) ++counters->drift_calls;
  std::copy(y.begin(), y.end(), out.begin());
  axpy(out, ctx.h, a);

  std::vector<std::vector<double>> b(m, std::vector<double>(d, 0.0));
  for (int k = 0; k < m; ++k) {
    p.diffusion(ctx.t, y, k, b[k]);
    if (counters) ++counters->diffusion_calls;
    const double wgt = ctx.wiener->dw[k];
    if (wgt != 0.0) axpy(out, wgt, b[k]);
  }

  std::vector<double> vk(d), corr(d);
  for (int k = 0; k < m; ++k) {
    const std::vector<double> jac = diffusion_jacobian_or_fd(p, ctx.t, y, k);
    if (counters) ++counters->jacobian_calls;
    // vk = sum_j b^j * I(j,k), then the correction (d b^k) vk.
    vk.assign(d, 0.0);
    for (int j = 0; j < m; ++j) axpy(vk, ctx.iterated->at(j, k), b[j]);
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int q = 0; q < d; ++q) acc += jac[i * d + q] * vk[q];
      corr[i] = acc;
    }
    axpy(out, 1.0, corr);
  }
}

void spli_step(const SdeProblem& p, const StepContext& ctx,
               std::span<const double> y, std::span<double> out,
               EvalCounters* counters) {
  const int d = p.d;
  const int m = p.m;
  if (ctx.iterated == nullptr || ctx.iterated->m != m)
    throw std::invalid_argument("spli_step: iterated integrals missing");
  const bool want_ito = p.calculus == Calculus::ito;
  if (want_ito != ito_family(ctx.iterated->mode))
    throw std::invalid_argument("spli_step: integral mode/calculus mismatch");

  std::vector<double> a(d, 0.0);
  p.drift(ctx.t, y, a);
  if (counters) ++counters->drift_calls;
  std::copy(y.begin(), y.end(), out.begin());
  axpy(out, ctx.h, a);

  std::vector<std::vector<double>> b(m, std::vector<double>(d, 0.0));
  for (int k = 0; k < m; ++k) {
    p.diffusion(ctx.t, y, k, b[k]);
    if (counters) ++counters->diffusion_calls;
    const double wgt = ctx.wiener->dw[k];
    if (wgt != 0.0) axpy(out, wgt, b[k]);
  }

  // Supporting values Ybar_j = y + a h + b^j sqrt(h); forward differences of
  // the diffusion at those points replace the Jacobian contractions.
  const double sqh = std::sqrt(ctx.h);
  const double inv_sqh = 1.0 / sqh;
  std::vector<double> ybar(d), bsup(d), diff(d);
  for (int j = 0; j < m; ++j) {
    ybar.assign(y.begin(), y.end());
    axpy(ybar, ctx.h, a);
    axpy(ybar, sqh, b[j]);
    for (int k = 0; k < m; ++k) {
      bsup.assign(d, 0.0);
      p.diffusion(ctx.t, ybar, k, bsup);
      if (counters) ++counters->diffusion_calls;
      for (int i = 0; i < d; ++i) diff[i] = bsup[i] - b[k][i];
      const double wgt = ctx.iterated->at(j, k) * inv_sqh;
      if (wgt != 0.0) axpy(out, wgt, diff);
    }
  }
}

void scheme_step(const SchemeInstance& scheme, const SdeProblem& p,
                 const StepContext& ctx, std::span<const double> y,
                 std::span<double> out, EvalCounters* counters,
                 const ImplicitOptions& opts) {
  if (scheme.required_calculus() != p.calculus)
    throw std::invalid_argument(
        scheme.name + " requires a " +
        to_string(scheme.required_calculus()) +
        "-calculus problem; convert the problem first");
  switch (scheme.kind) {
    case SchemeKind::em:
      em_step(p, ctx, y, out, counters);
      return;
    case SchemeKind::milstein:
      milstein_step(p, ctx, y, out, counters);
      return;
    case SchemeKind::spli:
      spli_step(p, ctx, y, out, counters);
      return;
    case SchemeKind::srk:
      if (scheme.selector == Selector::additive)
        additive_step(scheme, p, ctx, y, out, counters, opts);
      else
        srk_step(scheme, p, ctx, y, out, counters, opts);
      return;
  }
  throw std::logic_error("unreachable scheme kind");
}

namespace {

SchemeInstance make_instance(std::string name, SchemeKind kind,
                             Selector selector, const std::string& tabname) {
  SchemeInstance s;
  s.name = std::move(name);
  s.kind = kind;
  s.selector = selector;
  s.tableau = builtin_tableau(tabname);
  s.view = make_view(s.tableau);
  return s;
}

const std::map<std::string, SchemeInstance>& registry() {
  static const std::map<std::string, SchemeInstance> reg = [] {
    std::map<std::string, SchemeInstance> r;
    auto put = [&](const char* n, SchemeKind k, Selector sel,
                   const char* tab) {
      r.emplace(n, make_instance(n, k, sel, tab));
    };
    put("EM", SchemeKind::em, Selector::none, "EM");
    put("SSBE", SchemeKind::srk, Selector::none, "SSBE");
    put("MIL", SchemeKind::milstein, Selector::ito_approx, "EM");
    put("SPLI", SchemeKind::spli, Selector::ito_approx, "EM");
    put("SRI2s1", SchemeKind::srk, Selector::ito_approx, "SRI2s1");
    put("SRI2s2", SchemeKind::srk, Selector::ito_approx, "SRI2s2");
    put("SRIC2s1", SchemeKind::srk, Selector::commutative_ito, "SRI2s1");
    put("SRIC2s2", SchemeKind::srk, Selector::commutative_ito, "SRI2s2");
    put("SRS2s1", SchemeKind::srk, Selector::strat_approx, "SRI2s1");
    put("SRS2s2", SchemeKind::srk, Selector::strat_approx, "SRI2s2");
    put("SRSC2s1", SchemeKind::srk, Selector::commutative_strat, "SRI2s1");
    put("SRSC2s2", SchemeKind::srk, Selector::commutative_strat, "SRI2s2");
    put("SRA2s1", SchemeKind::srk, Selector::additive, "SRA2s1");
    put("SRA2s2", SchemeKind::srk, Selector::additive, "SRA2s2");
    return r;
  }();
  return reg;
}

}  // namespace

SchemeInstance make_scheme(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) throw std::invalid_argument("unknown scheme: " + name);
  return it->second;
}

const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

bool scheme_known(const std::string& name) {
  return registry().count(name) != 0;
}

SchemeInstance make_custom_scheme(const ExtendedTableau& t, Selector selector) {
  t.validate();
  SchemeInstance s;
  s.name = t.name;
  s.kind = SchemeKind::srk;
  s.selector = selector;
  s.tableau = t;
  s.view = make_view(t);
  return s;
}

FreshPathSource::FreshPathSource(std::uint64_t master_seed,
                                 std::uint64_t path_index,
                                 std::uint64_t level_tag, int m, double h,
                                 RhoReading reading)
    : master_seed_(master_seed),
      path_index_(path_index),
      level_tag_(level_tag),
      m_(m),
      h_(h),
      reading_(reading) {
  if (m < 1 || !(h > 0.0))
    throw std::invalid_argument("FreshPathSource: bad parameters");
}

StepDraw FreshPathSource::draw(std::int64_t step, Selector sel) {
  StepDraw sd;
  {
    RngStream rng = make_stream(master_seed_, path_index_, level_tag_,
                                static_cast<std::uint64_t>(step),
                                StreamPurpose::increments);
    sd.w = sample_increments(rng, m_, h_);
  }
  sd.gaussians = static_cast<std::uint64_t>(m_);
  switch (sel) {
    case Selector::none:
    case Selector::additive:
      break;
    case Selector::ito_approx:
    case Selector::strat_approx: {
      RngStream rng = make_stream(master_seed_, path_index_, level_tag_,
                                  static_cast<std::uint64_t>(step),
                                  StreamPurpose::levy);
      const Calculus calc = sel == Selector::ito_approx
                                ? Calculus::ito
                                : Calculus::stratonovich;
      sd.iter = approx_iterated(rng, sd.w, calc, reading_);
      sd.has_iter = true;
      sd.gaussians += sd.iter.aux_gaussians;
      break;
    }
    case Selector::commutative_ito:
      sd.iter = commutative_matrix(sd.w, Calculus::ito);
      sd.has_iter = true;
      break;
    case Selector::commutative_strat:
      sd.iter = commutative_matrix(sd.w, Calculus::stratonovich);
      sd.has_iter = true;
      break;
  }
  return sd;
}

AggregatePathSource::AggregatePathSource(const WienerFineGrid& grid,
                                         std::int64_t window)
    : grid_(grid), window_(window) {
  if (window < 1 || grid.n_fine() % window != 0)
    throw std::invalid_argument(
        "AggregatePathSource: window must evenly divide the fine grid");
}

double AggregatePathSource::step_size() const {
  return static_cast<double>(window_) * grid_.h_fine();
}

StepDraw AggregatePathSource::draw(std::int64_t step, Selector sel) {
  PathStep agg = grid_.aggregate(step * window_, window_);
  StepDraw sd;
  sd.w = std::move(agg.w);
  sd.gaussians = 0;  // everything was drawn when the grid was built
  switch (sel) {
    case Selector::none:
    case Selector::additive:
      break;
    case Selector::ito_approx:
      sd.iter = std::move(agg.iter);
      sd.has_iter = true;
      break;
    case Selector::strat_approx:
      sd.iter = ito_to_strat(agg.iter);
      sd.has_iter = true;
      break;
    case Selector::commutative_ito:
      sd.iter = commutative_matrix(sd.w, Calculus::ito);
      sd.has_iter = true;
      break;
    case Selector::commutative_strat:
      sd.iter = commutative_matrix(sd.w, Calculus::stratonovich);
      sd.has_iter = true;
      break;
  }
  return sd;
}

Trajectory integrate(const SchemeInstance& scheme, const SdeProblem& p,
                     std::int64_t n_steps, PathSource& source,
                     const ImplicitOptions& opts) {
  p.validate();
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps >= 1");
  if (source.m() != p.m)
    throw std::invalid_argument("integrate: source noise dimension mismatch");
  if ((scheme.selector == Selector::commutative_ito ||
       scheme.selector == Selector::commutative_strat) &&
      p.noise_class == NoiseClass::general)
    throw std::invalid_argument(scheme.name +
                                " assumes commutative noise; problem " +
                                p.name + " is declared general");
  const double h = (p.T - p.t0) / static_cast<double>(n_steps);
  if (std::fabs(source.step_size() - h) > 1e-9 * h)
    throw std::invalid_argument(
        "integrate: path source step size does not match (T - t0)/N");

  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.w_path.reserve(n_steps + 1);

  std::vector<double> y = p.x0;
  std::vector<double> w_run(p.m, 0.0);
  std::vector<double> next(p.d);
  traj.times.push_back(p.t0);
  traj.states.push_back(y);
  traj.w_path.push_back(w_run);

  for (std::int64_t n = 0; n < n_steps; ++n) {
    StepDraw sd = source.draw(n, scheme.selector);
    StepContext ctx;
    ctx.t = p.t0 + static_cast<double>(n) * h;
    ctx.h = h;
    ctx.wiener = &sd.w;
    ctx.iterated = sd.has_iter ? &sd.iter : nullptr;
    scheme_step(scheme, p, ctx, y, next, &traj.counters, opts);
    y = next;
    for (int k = 0; k < p.m; ++k) w_run[k] += sd.w.dw[k];
    traj.counters.gaussians += static_cast<std::int64_t>(sd.gaussians);
    traj.times.push_back(p.t0 + static_cast<double>(n + 1) * h);
    traj.states.push_back(y);
    traj.w_path.push_back(w_run);
  }
  return traj;
}

}  // namespace srk
