#include "srk/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace srk {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double l2diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::string to_string(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::terminal_l2: return "terminal-l2";
    case ErrorMetric::terminal_lp: return "terminal-lp";
    case ErrorMetric::sup_grid_lp: return "sup-grid-lp";
  }
  return "?";
}

ErrorMetric metric_from_string(const std::string& s) {
  if (s == "terminal-l2") return ErrorMetric::terminal_l2;
  if (s == "terminal-lp") return ErrorMetric::terminal_lp;
  if (s == "sup-grid-lp") return ErrorMetric::sup_grid_lp;
  throw std::invalid_argument("unknown error metric: " + s);
}

void StudyConfig::validate() const {
  bool known = false;
  for (const auto& id : problem_ids()) known = known || id == problem_id;
  if (!known) throw std::invalid_argument("unknown problem id: " + problem_id);
  if (dim < 0) throw std::invalid_argument("dim must be >= 0");
  for (const auto& s : schemes)
    if (!scheme_known(s)) throw std::invalid_argument("unknown scheme: " + s);
  if (hmax_exp < 0 || hmin_exp < hmax_exp || hmin_exp > 26)
    throw std::invalid_argument(
        "step exponents need 0 <= hmax_exp <= hmin_exp <= 26");
  if (paths < 1) throw std::invalid_argument("paths must be >= 1");
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  if (fit_window < 2) throw std::invalid_argument("fit_window must be >= 2");
  if (use_reference && reference.href_exp < hmin_exp)
    throw std::invalid_argument(
        "href_exp must be >= hmin_exp so every h is a multiple of h_ref");
}

std::string StudyConfig::canonical_string() const {
  std::string s = "problem=" + problem_id;
  s += ";dim=" + std::to_string(dim);
  s += ";schemes=";
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    if (i) s += ',';
    s += schemes[i];
  }
  s += ";hmax=" + std::to_string(hmax_exp);
  s += ";hmin=" + std::to_string(hmin_exp);
  s += ";paths=" + std::to_string(paths);
  s += ";seed=" + std::to_string(seed);
  s += ";metric=" + to_string(metric);
  s += ";p=" + fmt17(p);
  s += ";use_reference=" + std::string(use_reference ? "1" : "0");
  s += ";ref_scheme=" + reference.scheme;
  s += ";href_exp=" + std::to_string(reference.href_exp);
  s += ";shared_paths=" + std::string(reference.shared_paths ? "1" : "0");
  s += ";fit_window=" + std::to_string(fit_window);
  s += ";rho=" + to_string(rho_reading);
  return s;
}

std::uint64_t StudyConfig::config_hash() const {
  // FNV-1a 64 over the canonical string; threads intentionally absent.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_string()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

// Per-step evaluation counts: cd*d + cdm*dm + cd2m*d^2m + cdm2*dm^2 + m,
// plus rho(m,h) when the scheme consumes pair integrals.
struct CostRow {
  int cd, cdm, cd2m, cdm2;
  bool pair_integrals;
};

const std::map<std::string, CostRow>& cost_rows() {
  static const std::map<std::string, CostRow> rows = {
      {"EM", {1, 1, 0, 0, false}},     {"MIL", {1, 1, 1, 0, true}},
      {"SPLI", {1, 1, 0, 1, true}},    {"SRI1", {1, 3, 0, 0, true}},
      {"SRIC1", {1, 3, 0, 0, false}},  {"SRI2s1", {1, 2, 0, 0, true}},
      {"SRI2s2", {2, 2, 0, 0, true}},  {"SRIC2s1", {1, 2, 0, 0, false}},
      {"SRIC2s2", {2, 2, 0, 0, false}}, {"SRS2s1", {1, 2, 0, 0, true}},
      {"SRS2s2", {2, 2, 0, 0, true}},  {"SRSC2s1", {1, 2, 0, 0, false}},
      {"SRSC2s2", {2, 2, 0, 0, false}}, {"SRA2s1", {1, 1, 0, 0, false}},
      {"SRA2s2", {2, 1, 0, 0, false}},
  };
  return rows;
}

}  // namespace

bool has_cost_model(const std::string& scheme) {
  return cost_rows().count(scheme) != 0;
}

const std::vector<std::string>& cost_model_names() {
  static const std::vector<std::string> names = {
      "EM",      "MIL",     "SPLI",    "SRI1",    "SRI2s1",
      "SRI2s2",  "SRIC1",   "SRIC2s1", "SRIC2s2", "SRS2s1",
      "SRS2s2",  "SRSC2s1", "SRSC2s2", "SRA2s1",  "SRA2s2"};
  return names;
}

double cost(const std::string& scheme, int d, int m, double h,
            RhoReading reading) {
  auto it = cost_rows().find(scheme);
  if (it == cost_rows().end())
    throw std::invalid_argument("no cost-model row for scheme: " + scheme);
  if (d < 1 || m < 1 || !(h > 0.0))
    throw std::invalid_argument("cost: need d, m >= 1 and h > 0");
  const CostRow& r = it->second;
  const double dd = d;
  const double dm = m;
  double c = r.cd * dd + r.cdm * dd * dm + r.cd2m * dd * dd * dm +
             r.cdm2 * dd * dm * dm + dm;
  if (r.pair_integrals) c += static_cast<double>(rho(m, h, reading));
  return c;
}

bool cost_uses_pair_integrals(const std::string& scheme) {
  auto it = cost_rows().find(scheme);
  if (it == cost_rows().end())
    throw std::invalid_argument("no cost-model row for scheme: " + scheme);
  return it->second.pair_integrals;
}

namespace {

std::vector<std::pair<double, double>> sorted_pairs(
    std::span<const std::pair<double, double>> h_err, int window) {
  std::vector<std::pair<double, double>> pts(h_err.begin(), h_err.end());
  std::sort(pts.begin(), pts.end());
  if (window > 0 && static_cast<std::size_t>(window) < pts.size())
    pts.resize(window);
  if (pts.size() < 2)
    throw std::invalid_argument("order fit: need at least 2 (h, err) pairs");
  for (const auto& [h, e] : pts)
    if (!(h > 0.0) || !(e > 0.0))
      throw std::invalid_argument("order fit: pairs must be positive");
  return pts;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("order fit: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace

double empirical_order(std::span<const std::pair<double, double>> h_err,
                       int window) {
  const auto pts = sorted_pairs(h_err, window);
  std::vector<double> x, y;
  for (const auto& [h, e] : pts) {
    x.push_back(std::log2(h));
    y.push_back(std::log2(e));
  }
  return lsq_slope(x, y);
}

EffectiveOrder effective_order(std::span<const std::pair<double, double>> h_err,
                               const std::string& scheme, int d, int m,
                               double t_span, RhoReading reading) {
  if (!(t_span > 0.0)) throw std::invalid_argument("effective_order: t_span");
  const auto pts = sorted_pairs(h_err, 0);
  // Total cost of a run at step size h: (t_span/h) steps times the per-step
  // model cost.
  auto total_cost = [&](double h) {
    return (t_span / h) * cost(scheme, d, m, h, reading);
  };
  std::vector<double> x, y;
  for (const auto& [h, e] : pts) {
    x.push_back(std::log2(total_cost(h)));
    y.push_back(std::log2(e));
  }
  EffectiveOrder eo;
  eo.lsq = -lsq_slope(x, y);
  eo.pairwise = std::fabs(y[0] - y[1]) / std::fabs(x[0] - x[1]);
  return eo;
}

ConvergenceReport run_study(const StudyConfig& cfg) {
  cfg.validate();
  SdeProblem base = make_problem(cfg.problem_id, cfg.dim);
  const double span = base.T - base.t0;
  const int L = cfg.hmin_exp - cfg.hmax_exp + 1;
  const std::int64_t M = cfg.paths;
  const bool use_ref = cfg.use_reference || !base.has_exact();
  if (use_ref && cfg.reference.href_exp < cfg.hmin_exp)
    throw std::invalid_argument(
        "href_exp must be >= hmin_exp so every h is a multiple of h_ref");

  struct Run {
    SchemeInstance scheme;
    SdeProblem prob;
  };
  std::vector<Run> runs;
  for (const std::string& name : cfg.schemes) {
    Run r{make_scheme(name), {}};
    if ((r.scheme.selector == Selector::commutative_ito ||
         r.scheme.selector == Selector::commutative_strat) &&
        base.noise_class == NoiseClass::general)
      throw std::invalid_argument(
          name + " assumes commutative noise but " + base.name +
          " is declared general; run the commutativity check first");
    r.prob = r.scheme.required_calculus() == Calculus::stratonovich
                 ? to_stratonovich(base)
                 : to_ito(base);
    runs.push_back(std::move(r));
  }
  const int S = static_cast<int>(runs.size());
  const double p_exp = cfg.metric == ErrorMetric::terminal_l2 ? 2.0 : cfg.p;

  SdeProblem refprob;
  if (use_ref) {
    SchemeInstance rs = make_scheme(cfg.reference.scheme);
    refprob = rs.required_calculus() == Calculus::stratonovich
                  ? to_stratonovich(base)
                  : to_ito(base);
  }

  // epow[s][l][path]: the path's metric value raised to p_exp. Disjoint
  // writes per path, reduced in path order afterwards, so the result does
  // not depend on the worker count.
  std::vector<std::vector<std::vector<double>>> epow(
      S, std::vector<std::vector<double>>(L, std::vector<double>(M, 0.0)));
  std::vector<std::vector<EvalCounters>> ctr0(S, std::vector<EvalCounters>(L));

  auto score = [&](const Trajectory& tr,
                   const std::vector<std::vector<double>>& truth) {
    if (cfg.metric == ErrorMetric::sup_grid_lp) {
      double worst = 0.0;
      for (std::size_t i = 0; i < tr.states.size(); ++i)
        worst = std::max(worst, l2diff(tr.states[i], truth[i]));
      return std::pow(worst, p_exp);
    }
    return std::pow(l2diff(tr.states.back(), truth.back()), p_exp);
  };

  auto exact_truth = [&](const Trajectory& tr) {
    std::vector<std::vector<double>> truth;
    if (cfg.metric == ErrorMetric::sup_grid_lp) {
      truth.assign(tr.states.size(), std::vector<double>(base.d));
      for (std::size_t i = 0; i < tr.states.size(); ++i)
        base.exact_solution(tr.times[i] - base.t0, tr.w_path[i], truth[i]);
    } else {
      truth.assign(1, std::vector<double>(base.d));
      base.exact_solution(base.T - base.t0, tr.w_path.back(), truth[0]);
    }
    return truth;
  };

  auto ref_truth = [&](const Trajectory& reftr, std::int64_t stride,
                       std::int64_t n_steps) {
    std::vector<std::vector<double>> truth;
    if (cfg.metric == ErrorMetric::sup_grid_lp) {
      truth.reserve(n_steps + 1);
      for (std::int64_t i = 0; i <= n_steps; ++i)
        truth.push_back(reftr.states[static_cast<std::size_t>(i * stride)]);
    } else {
      truth.assign(1, reftr.states.back());
    }
    return truth;
  };

  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_err;

  auto work = [&]() {
    try {
      for (;;) {
        const std::int64_t pi = next.fetch_add(1);
        if (pi >= M) return;
        const auto upath = static_cast<std::uint64_t>(pi);
        if (!use_ref) {
          for (int li = 0; li < L; ++li) {
            const int j = cfg.hmax_exp + li;
            const std::int64_t N = std::int64_t{1} << j;
            const double h = span / static_cast<double>(N);
            FreshPathSource src(cfg.seed, upath, static_cast<std::uint64_t>(j),
                                base.m, h, cfg.rho_reading);
            std::vector<std::vector<double>> truth;
            for (int si = 0; si < S; ++si) {
              Trajectory tr = integrate(runs[si].scheme, runs[si].prob, N, src);
              if (pi == 0) ctr0[si][li] = tr.counters;
              if (truth.empty()) truth = exact_truth(tr);
              epow[si][li][pi] = score(tr, truth);
            }
          }
        } else {
          ReferencePath ref = reference_trajectory(refprob, cfg.reference,
                                                   cfg.seed, upath,
                                                   cfg.rho_reading);
          for (int li = 0; li < L; ++li) {
            const int j = cfg.hmax_exp + li;
            const std::int64_t N = std::int64_t{1} << j;
            const double h = span / static_cast<double>(N);
            const std::int64_t stride = std::int64_t{1}
                                        << (cfg.reference.href_exp - j);
            const auto truth = ref_truth(ref.trajectory, stride, N);
            for (int si = 0; si < S; ++si) {
              Trajectory tr;
              if (cfg.reference.shared_paths) {
                AggregatePathSource src(ref.grid, stride);
                tr = integrate(runs[si].scheme, runs[si].prob, N, src);
              } else {
                // Diagnostics mode: coarse paths decoupled from the
                // reference increments, so errors include coupling noise.
                FreshPathSource src(cfg.seed, upath,
                                    static_cast<std::uint64_t>(j), base.m, h,
                                    cfg.rho_reading);
                tr = integrate(runs[si].scheme, runs[si].prob, N, src);
              }
              if (pi == 0) ctr0[si][li] = tr.counters;
              epow[si][li][pi] = score(tr, truth);
            }
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!first_err) first_err = std::current_exception();
      next.store(M);
    }
  };

  int nthreads = cfg.threads <= 0
                     ? static_cast<int>(
                           std::max(1u, std::thread::hardware_concurrency()))
                     : cfg.threads;
  nthreads = static_cast<int>(
      std::min<std::int64_t>(nthreads, M));
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_err) std::rethrow_exception(first_err);

  ConvergenceReport rep;
  rep.config = cfg;
  rep.rows.resize(S);
  for (int si = 0; si < S; ++si) {
    rep.rows[si].resize(L);
    for (int li = 0; li < L; ++li) {
      const int j = cfg.hmax_exp + li;
      const std::int64_t N = std::int64_t{1} << j;
      const double h = span / static_cast<double>(N);
      double sum = 0.0;
      for (std::int64_t pi = 0; pi < M; ++pi) sum += epow[si][li][pi];
      const double mean = sum / static_cast<double>(M);
      double ss = 0.0;
      for (std::int64_t pi = 0; pi < M; ++pi) {
        const double dd = epow[si][li][pi] - mean;
        ss += dd * dd;
      }
      const double var = M > 1 ? ss / static_cast<double>(M - 1) : 0.0;

      LevelResult& r = rep.rows[si][li];
      r.h_exp = j;
      r.n_steps = N;
      r.h = h;
      r.err = std::pow(mean, 1.0 / p_exp);
      // Delta method: err = mean^(1/p), so sd(err) ~ mean^(1/p - 1)/p * sd.
      r.mc_stderr = mean > 0.0
                        ? std::pow(mean, 1.0 / p_exp - 1.0) / p_exp *
                              std::sqrt(var / static_cast<double>(M))
                        : 0.0;
      if (has_cost_model(cfg.schemes[si])) {
        r.cost_per_step = cost(cfg.schemes[si], base.d, base.m, h,
                               cfg.rho_reading);
        r.total_cost = static_cast<double>(N) * r.cost_per_step;
      } else {
        r.cost_per_step = kNan;
        r.total_cost = kNan;
      }
      r.counters = ctr0[si][li];
    }
  }

  for (int si = 0; si < S; ++si) {
    SchemeSummary sm;
    sm.scheme = cfg.schemes[si];
    sm.gamma = kNan;
    sm.p_eff = kNan;
    sm.pairwise_p_eff = kNan;
    // Window: smallest h first, dropping levels whose MC noise is too large
    // to carry slope information; fall back to the unfiltered tail if the
    // filter leaves fewer than two points.
    std::vector<int> chosen;
    for (int li = L - 1;
         li >= 0 && static_cast<int>(chosen.size()) < cfg.fit_window; --li) {
      const LevelResult& r = rep.rows[si][li];
      if (r.err > 0.0 && r.mc_stderr <= 0.2 * r.err) chosen.push_back(li);
    }
    if (chosen.size() < 2) {
      chosen.clear();
      for (int li = L - 1;
           li >= 0 && static_cast<int>(chosen.size()) < cfg.fit_window; --li)
        if (rep.rows[si][li].err > 0.0) chosen.push_back(li);
    }
    if (chosen.size() >= 2) {
      std::vector<std::pair<double, double>> pairs;
      for (int li : chosen)
        pairs.emplace_back(rep.rows[si][li].h, rep.rows[si][li].err);
      sm.gamma = empirical_order(pairs);
      if (has_cost_model(sm.scheme)) {
        const EffectiveOrder eo = effective_order(
            pairs, sm.scheme, base.d, base.m, span, cfg.rho_reading);
        sm.p_eff = eo.lsq;
        sm.pairwise_p_eff = eo.pairwise;
      }
      for (int li : chosen) sm.fit_exps.push_back(rep.rows[si][li].h_exp);
      std::sort(sm.fit_exps.begin(), sm.fit_exps.end());
    }
    rep.summaries.push_back(std::move(sm));
  }
  return rep;
}

}  // namespace srk
