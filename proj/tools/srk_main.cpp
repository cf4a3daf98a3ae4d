// srk: benchmark front end for the strong SDE solver library.
// Subcommands: bench, check-tableau, simulate, cost, selftest.
// Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 check failed.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "srk/bench.hpp"
#include "srk/report.hpp"
#include "srk/rng.hpp"
#include "srk/sde.hpp"
#include "srk/solver.hpp"
#include "srk/tableau.hpp"
#include "srk/testeqs.hpp"
#include "srk/wiener.hpp"

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t nxt = s.find(',', pos);
    if (nxt == std::string::npos) {
      if (pos < s.size()) out.push_back(s.substr(pos));
      break;
    }
    if (nxt > pos) out.push_back(s.substr(pos, nxt - pos));
    pos = nxt + 1;
  }
  return out;
}

int usage_error(const std::string& msg) {
  std::fprintf(stderr, "srk: %s\n", msg.c_str());
  return 2;
}

// ---------------------------------------------------------------- bench

int apply_config_file(srk::StudyConfig& cfg, const std::string& path,
                      std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot read config file: " + path;
    return 2;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    err = "config file " + path + ": " + e.what();
    return 2;
  }
  if (!j.is_object()) {
    err = "config file " + path + ": expected a JSON object";
    return 2;
  }
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "problem") cfg.problem_id = val.get<std::string>();
      else if (key == "dim") cfg.dim = val.get<int>();
      else if (key == "schemes") cfg.schemes = val.get<std::vector<std::string>>();
      else if (key == "hmax_exp") cfg.hmax_exp = val.get<int>();
      else if (key == "hmin_exp") cfg.hmin_exp = val.get<int>();
      else if (key == "paths") cfg.paths = val.get<std::int64_t>();
      else if (key == "seed")
        cfg.seed = val.is_string()
                       ? std::strtoull(val.get<std::string>().c_str(), nullptr, 10)
                       : val.get<std::uint64_t>();
      else if (key == "metric") cfg.metric = srk::metric_from_string(val.get<std::string>());
      else if (key == "p") cfg.p = val.get<double>();
      else if (key == "use_reference") cfg.use_reference = val.get<bool>();
      else if (key == "ref_scheme") cfg.reference.scheme = val.get<std::string>();
      else if (key == "href_exp") cfg.reference.href_exp = val.get<int>();
      else if (key == "shared_paths") cfg.reference.shared_paths = val.get<bool>();
      else if (key == "fit_window") cfg.fit_window = val.get<int>();
      else if (key == "rho_reading")
        cfg.rho_reading = srk::rho_reading_from_string(val.get<std::string>());
      else if (key == "threads") cfg.threads = val.get<int>();
      else {
        err = "unknown config key: " + key;
        return 2;
      }
    }
  } catch (const std::exception& e) {
    err = "config file " + path + ": " + e.what();
    return 2;
  }
  return 0;
}

int write_report_file(const srk::ConvergenceReport& rep,
                      const std::string& path) {
  const std::string text = path.ends_with(".json") ? srk::report_to_json(rep)
                                                   : srk::report_to_csv(rep);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    std::fprintf(stderr, "srk bench: cannot write %s\n", path.c_str());
    return 1;
  }
  return 0;
}

int run_bench(const srk::StudyConfig& cfg, const std::vector<std::string>& outs,
              bool skip_comm_check) {
  if (cfg.schemes.empty())
    return usage_error("no schemes selected; pass --schemes or a config file");
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }

  bool wants_commutative = false;
  for (const auto& name : cfg.schemes) {
    const srk::SchemeInstance s = srk::make_scheme(name);
    wants_commutative = wants_commutative ||
                        s.selector == srk::Selector::commutative_ito ||
                        s.selector == srk::Selector::commutative_strat;
  }
  if (wants_commutative && !skip_comm_check) {
    const srk::SdeProblem p = srk::make_problem(cfg.problem_id, cfg.dim);
    const srk::CommutativityReport cr = srk::check_commutativity(p);
    if (!cr.commutative) {
      std::fprintf(stderr,
                   "srk bench: %s does not have commutative noise (max scaled "
                   "violation %.3g over %d probes, tolerance %.3g); pass "
                   "--skip-commutativity-check to force\n",
                   cfg.problem_id.c_str(), cr.max_violation, cr.probes,
                   cr.tolerance);
      return 1;
    }
    std::printf("commutativity check: %s ok (max scaled violation %.3g)\n",
                cfg.problem_id.c_str(), cr.max_violation);
  }

  const srk::ConvergenceReport rep = srk::run_study(cfg);
  for (const auto& path : outs) {
    const int rc = write_report_file(rep, path);
    if (rc != 0) return rc;
    std::printf("wrote %s\n", path.c_str());
  }

  std::printf("problem %s  paths %" PRId64 "  h = 2^-%d .. 2^-%d  seed %llu\n",
              cfg.problem_id.c_str(), cfg.paths, cfg.hmax_exp, cfg.hmin_exp,
              static_cast<unsigned long long>(cfg.seed));
  for (std::size_t si = 0; si < rep.rows.size(); ++si) {
    std::printf("%s\n", rep.summaries[si].scheme.c_str());
    for (const srk::LevelResult& r : rep.rows[si])
      std::printf("  h=2^-%-2d  err=%-13.6e stderr=%-10.3e cost/step=%-10g "
                  "total=%g\n",
                  r.h_exp, r.err, r.mc_stderr, r.cost_per_step, r.total_cost);
  }
  std::printf("%-10s %9s %9s %9s  %s\n", "scheme", "gamma", "p_eff",
              "pairwise", "fit window");
  for (const srk::SchemeSummary& sm : rep.summaries) {
    std::string window = "-";
    if (!sm.fit_exps.empty())
      window = "2^-" + std::to_string(sm.fit_exps.front()) + " .. 2^-" +
               std::to_string(sm.fit_exps.back());
    std::printf("%-10s %9.4f %9.4f %9.4f  %s\n", sm.scheme.c_str(), sm.gamma,
                sm.p_eff, sm.pairwise_p_eff, window.c_str());
  }
  return 0;
}

// --------------------------------------------------------- check-tableau

int run_check_tableau(const std::string& path, const std::string& mode_name) {
  srk::TableauMode mode;
  try {
    mode = srk::tableau_mode_from_string(mode_name);
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }
  std::ifstream in(path);
  if (!in) return usage_error("cannot read tableau file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  srk::ExtendedTableau t;
  try {
    t = srk::parse_tableau(buf.str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "srk check-tableau: %s\n", e.what());
    return 2;
  }
  const srk::OrderReport rep = srk::check_order_conditions(t, mode);
  std::printf("tableau %s (s=%d), mode %s\n", t.name.c_str(), t.s,
              srk::to_string(rep.mode).c_str());
  for (const srk::ConditionResult& c : rep.conditions)
    std::printf("  %-16s lhs=%-22.17g required=%-8.17g %s%s\n", c.id.c_str(),
                c.lhs, c.required, c.satisfied ? "ok" : "FAILED",
                c.exact ? " (exact)" : "");
  std::printf("p_D = %d, p_S = %g%s\n", srk::det_order_value(rep.pd),
              srk::stoch_order_value(rep.ps),
              rep.all_exact ? " (all conditions exact)" : "");
  if (rep.ps != srk::StochOrder::one) {
    std::printf("order 1 conditions not met\n");
    return 3;
  }
  return 0;
}

// -------------------------------------------------------------- simulate

int run_simulate(const std::string& problem, int dim,
                 const std::string& scheme_name, std::int64_t steps,
                 std::uint64_t seed, std::uint64_t path_index,
                 const std::string& out_path, const std::string& dump_path,
                 srk::RhoReading reading) {
  if (!srk::scheme_known(scheme_name))
    return usage_error("unknown scheme: " + scheme_name);
  if (steps < 1) return usage_error("--steps must be >= 1");
  srk::SdeProblem base;
  try {
    base = srk::make_problem(problem, dim);
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }
  const srk::SchemeInstance scheme = srk::make_scheme(scheme_name);
  const srk::SdeProblem prob =
      scheme.required_calculus() == srk::Calculus::stratonovich
          ? srk::to_stratonovich(base)
          : srk::to_ito(base);

  const double h = (base.T - base.t0) / static_cast<double>(steps);
  const srk::WienerFineGrid grid(seed, path_index, base.m, steps, h, reading);
  srk::AggregatePathSource src(grid, 1);
  const srk::Trajectory tr = srk::integrate(scheme, prob, steps, src);

  std::string csv = "# t";
  for (int i = 1; i <= base.d; ++i) csv += ",y" + std::to_string(i);
  csv += "\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    csv += fmt17(tr.times[i]);
    for (double v : tr.states[i]) csv += "," + fmt17(v);
    csv += "\n";
  }
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << csv)) {
      std::fprintf(stderr, "srk simulate: cannot write %s\n", out_path.c_str());
      return 1;
    }
    std::printf("wrote %s\n", out_path.c_str());
  }
  if (!dump_path.empty()) {
    std::ofstream out(dump_path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "srk simulate: cannot write %s\n",
                   dump_path.c_str());
      return 1;
    }
    grid.dump(out);
    std::printf("wrote %s\n", dump_path.c_str());
  }
  return 0;
}

// ------------------------------------------------------------------ cost

int run_cost(const std::string& scheme, int d, int m, double h,
             srk::RhoReading reading) {
  if (d < 1 || m < 1 || !(h > 0.0))
    return usage_error("cost needs --d >= 1, --m >= 1, --h > 0");
  std::vector<std::string> names;
  if (scheme.empty()) {
    names = srk::cost_model_names();
  } else {
    if (!srk::has_cost_model(scheme))
      return usage_error("no cost-model row for scheme: " + scheme);
    names.push_back(scheme);
  }
  const std::int64_t rho_budget = srk::rho(m, h, reading);
  std::printf("d=%d m=%d h=%.17g rho=%" PRId64 " (%s reading)\n", d, m, h,
              rho_budget, srk::to_string(reading).c_str());
  std::printf("%-10s %14s %12s %10s %14s\n", "scheme", "det evals",
              "increments", "pair aux", "cost per step");
  for (const auto& name : names) {
    const double total = srk::cost(name, d, m, h, reading);
    const double aux = srk::cost_uses_pair_integrals(name)
                           ? static_cast<double>(rho_budget)
                           : 0.0;
    std::printf("%-10s %14g %12d %10g %14g\n", name.c_str(),
                total - m - aux, m, aux, total);
  }
  return 0;
}

// -------------------------------------------------------------- selftest

struct Battery {
  int failures = 0;
  void check(bool ok, const std::string& name, const std::string& detail = "") {
    if (ok) {
      std::printf("[ok] %s\n", name.c_str());
    } else {
      ++failures;
      std::printf("[FAIL] %s%s%s\n", name.c_str(), detail.empty() ? "" : ": ",
                  detail.c_str());
    }
  }
};

srk::SdeProblem linear_scalar_problem(double lambda) {
  srk::SdeProblem p;
  p.d = 1;
  p.m = 1;
  p.noise_class = srk::NoiseClass::scalar;
  p.x0 = {1.0};
  p.name = "linear";
  p.drift = [lambda](double, std::span<const double> x, std::span<double> out) {
    out[0] = -lambda * x[0];
  };
  p.diffusion = [](double, std::span<const double>, int, std::span<double> out) {
    out[0] = 0.0;
  };
  p.diffusion_jacobian = [](double, std::span<const double>, int,
                            std::span<double> out) { out[0] = 0.0; };
  return p;
}

srk::SdeProblem identity_diffusion_problem() {
  srk::SdeProblem p;
  p.d = 1;
  p.m = 1;
  p.noise_class = srk::NoiseClass::scalar;
  p.x0 = {1.0};
  p.name = "b(x)=x";
  p.drift = [](double, std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
  };
  p.diffusion = [](double, std::span<const double> x, int,
                   std::span<double> out) { out[0] = x[0]; };
  p.diffusion_jacobian = [](double, std::span<const double>, int,
                            std::span<double> out) { out[0] = 1.0; };
  return p;
}

int run_selftest(bool full, std::uint64_t seed) {
  using namespace srk;
  Battery B;

  // Order-condition labels of the built-in coefficient sets.
  struct Want {
    const char* name;
    TableauMode mode;
    int pd;
    double ps;
  };
  const Want wants[] = {
      {"EM", TableauMode::general_ito, 1, 0.5},
      {"SSBE", TableauMode::general_ito, 1, 0.5},
      {"SRI2s1", TableauMode::general_ito, 1, 1.0},
      {"SRI2s1", TableauMode::commutative_ito, 1, 1.0},
      {"SRI2s1", TableauMode::general_strat, 1, 1.0},
      {"SRI2s1", TableauMode::commutative_strat, 1, 1.0},
      {"SRI2s2", TableauMode::general_ito, 2, 1.0},
      {"SRA2s1", TableauMode::additive, 1, 1.0},
      {"SRA2s2", TableauMode::additive, 2, 1.0},
  };
  for (const Want& w : wants) {
    const OrderReport rep = check_order_conditions(builtin_tableau(w.name), w.mode);
    const bool ok = det_order_value(rep.pd) == w.pd &&
                    stoch_order_value(rep.ps) == w.ps && rep.all_exact;
    B.check(ok, std::string("order labels ") + w.name + " " + to_string(w.mode));
  }
  {
    ExtendedTableau t = builtin_tableau("SRI2s1");
    for (auto& row : t.B1)
      for (auto& e : row) e = Rational(0);
    const OrderReport rep = check_order_conditions(t, TableauMode::general_ito);
    bool only_b1 = rep.ps == StochOrder::half;
    for (const ConditionResult& c : rep.conditions) {
      if (c.id == "alpha^T e (det)" || c.id == "alpha^T c0") continue;
      if (c.id == "beta2^T B1 e")
        only_b1 = only_b1 && !c.satisfied;
      else
        only_b1 = only_b1 && c.satisfied;
    }
    B.check(only_b1, "zeroed coupling demotes stochastic order to 1/2");
  }

  // Auxiliary-draw budget, both readings.
  {
    const bool ok = rho(1, 0.25) == 0 && rho(2, 1.0) == 4 &&
                    rho(2, 0.25) == 5 && rho(2, 1.0 / 64) == 8 &&
                    rho(2, std::ldexp(1.0, -12)) == 37 &&
                    rho(2, 1.0 / 64, RhoReading::sqrt3_h) == 37 &&
                    rho(4, std::ldexp(1.0, -12)) == 105 &&
                    rho(10, 1.0 / 64) == 102;
    B.check(ok, "rho budget pinned values");
  }

  // Pair-integral moments, reduced sample counts.
  {
    const int n = full ? 200000 : 20000;
    const double h = 0.25;
    double mi2 = 0, mihat = 0, mihat2 = 0, mj = 0;
    for (int i = 0; i < n; ++i) {
      RngStream inc = make_stream(seed, i, 0, 0, StreamPurpose::increments);
      const WienerIncrements w = sample_increments(inc, 2, h);
      RngStream lev = make_stream(seed, i, 0, 0, StreamPurpose::levy);
      const IteratedIntegrals it = approx_iterated(lev, w, Calculus::ito);
      const IteratedIntegrals js = ito_to_strat(it);
      mi2 += w.dw[0] * w.dw[0];
      mihat += it.at(0, 1);
      mihat2 += it.at(0, 1) * it.at(0, 1);
      mj += js.at(0, 0);
    }
    mi2 /= n;
    mihat /= n;
    mihat2 /= n;
    mj /= n;
    const double sd_ihat = h / std::sqrt(2.0 * n);
    B.check(std::fabs(mi2 - h) <= 0.04 * h, "E[I_(k)^2] = h",
            fmt17(mi2));
    B.check(std::fabs(mihat) <= 4.5 * sd_ihat, "E[I_(1,2)] = 0", fmt17(mihat));
    B.check(std::fabs(mihat2 - h * h / 2) <= 0.08 * h * h / 2,
            "E[I_(1,2)^2] = h^2/2", fmt17(mihat2));
    B.check(std::fabs(mj - h / 2) <= 0.04 * h, "E[J_(k,k)] = h/2", fmt17(mj));
  }

  // Composition identities.
  {
    const WienerFineGrid grid(seed, 7, 2, 256, 1.0 / 256);
    const PathStep agg = grid.aggregate(0, 256);
    bool diag_ok = true;
    for (int k = 0; k < 2; ++k) {
      const double expect = (agg.w.dw[k] * agg.w.dw[k] - 1.0) / 2.0;
      diag_ok = diag_ok && std::fabs(agg.iter.at(k, k) - expect) <=
                               1e-12 * std::max(1.0, std::fabs(expect));
    }
    B.check(diag_ok, "composed diagonal equals (dW^2 - h)/2");

    const int triples = full ? 1000 : 200;
    double worst = 0.0;
    for (int i = 0; i < triples; ++i) {
      PathStep abc[3];
      for (int t = 0; t < 3; ++t) {
        RngStream inc = make_stream(seed, i, 10 + t, 0, StreamPurpose::increments);
        abc[t].w = sample_increments(inc, 2, 0.5);
        RngStream lev = make_stream(seed, i, 10 + t, 0, StreamPurpose::levy);
        abc[t].iter = approx_iterated(lev, abc[t].w, Calculus::ito);
      }
      const PathStep left = compose(compose(abc[0], abc[1]), abc[2]);
      const PathStep right = compose(abc[0], compose(abc[1], abc[2]));
      for (int l = 0; l < 2; ++l)
        for (int k = 0; k < 2; ++k) {
          const double scale = std::max(1.0, std::fabs(left.iter.at(l, k)));
          worst = std::max(worst,
                           std::fabs(left.iter.at(l, k) - right.iter.at(l, k)) /
                               scale);
        }
    }
    B.check(worst <= 1e-12, "composition associativity", fmt17(worst));
  }

  // Single-step oracles.
  {
    const SdeProblem p = identity_diffusion_problem();
    const SchemeInstance sri = make_scheme("SRI2s1");
    const double cases[][2] = {{0.5, 0.25}, {1.0, 0.25}};
    bool ok_closed = true, ok_mil = true;
    for (const auto& c : cases) {
      const double dw = c[0], h = c[1];
      WienerIncrements w{h, {dw}};
      IteratedIntegrals it;
      it.m = 1;
      it.h = h;
      it.mode = IntegralMode::ito_approx;
      it.values = {(dw * dw - h) / 2.0};
      StepContext ctx{0.0, h, &w, &it};
      double y = 1.0, out_srk = 0.0, out_mil = 0.0;
      srk_step(sri, p, ctx, std::span<const double>(&y, 1),
               std::span<double>(&out_srk, 1));
      milstein_step(p, ctx, std::span<const double>(&y, 1),
                    std::span<double>(&out_mil, 1));
      const double closed = 1.0 + dw + (dw * dw - h) / 2.0;
      ok_closed = ok_closed && out_srk == closed;
      ok_mil = ok_mil && out_srk == out_mil;
    }
    B.check(ok_closed, "two-stage step matches 1 + dW + (dW^2 - h)/2 exactly");
    B.check(ok_mil, "two-stage step bit-equal to Milstein on b(x) = x");
  }
  {
    const double lambda = 1.0, h = 0.5;
    const SdeProblem p = linear_scalar_problem(lambda);
    const SchemeInstance ssbe = make_scheme("SSBE");
    WienerIncrements w{h, {0.3}};
    StepContext ctx{0.0, h, &w, nullptr};
    double y = 1.0, out = 0.0;
    scheme_step(ssbe, p, ctx, std::span<const double>(&y, 1),
                std::span<double>(&out, 1));
    const double expect = y / (1.0 + lambda * h);
    B.check(std::fabs(out - expect) <= 1e-12, "implicit stage solves y/(1+lambda h)",
            fmt17(out));
  }
  {
    const SdeProblem p = eq2();
    const SchemeInstance em = make_scheme("EM");
    const SchemeInstance em_tab = make_custom_scheme(builtin_tableau("EM"),
                                                     Selector::none);
    const std::int64_t N = 16;
    FreshPathSource s1(seed, 3, 0, p.m, 1.0 / N);
    FreshPathSource s2(seed, 3, 0, p.m, 1.0 / N);
    const Trajectory t1 = integrate(em, p, N, s1);
    const Trajectory t2 = integrate(em_tab, p, N, s2);
    B.check(t1.terminal() == t2.terminal(),
            "tableau-driven Euler bit-equal to the dedicated step");
  }
  {
    // Additive noise collapses EM, MIL, SPLI and the one-stage additive
    // method onto the same update.
    const SdeProblem p = eq3(2);
    const std::int64_t N = 8;
    std::vector<double> terminals;
    for (const char* name : {"EM", "MIL", "SPLI", "SRA2s1"}) {
      FreshPathSource src(seed, 11, 0, p.m, 1.0 / N);
      terminals.push_back(
          integrate(make_scheme(name), p, N, src).terminal()[0]);
    }
    const bool ok = terminals[0] == terminals[1] &&
                    terminals[0] == terminals[2] &&
                    terminals[0] == terminals[3];
    B.check(ok, "additive noise collapses EM / MIL / SPLI / SRA2s1");
  }

  // Observed counters against the cost-model rows.
  {
    struct Row {
      const char* name;
      const char* problem;
      int drift, diffusion, jacobian;
    };
    const int m = 2;
    const Row rows[] = {
        {"EM", "eq4", 1, m, 0},
        {"MIL", "eq4", 1, m, m},
        {"SPLI", "eq4", 1, m + m * m, 0},
        {"SRI2s1", "eq4", 1, 2 * m, 0},
        {"SRI2s2", "eq4", 2, 2 * m, 0},
        {"SRIC2s1", "eq4", 1, 2 * m, 0},
        {"SRIC2s2", "eq4", 2, 2 * m, 0},
        {"SRA2s1", "eq3", 1, m, 0},
        {"SRA2s2", "eq3", 2, m, 0},
    };
    const std::int64_t N = 8;
    const double h = 1.0 / N;
    bool ok = true;
    std::string detail;
    for (const Row& r : rows) {
      const SdeProblem p = make_problem(r.problem, m);
      FreshPathSource src(seed, 0, 0, p.m, h);
      const Trajectory tr = integrate(make_scheme(r.name), p, N, src);
      const double det_cost =
          cost(r.name, p.d, p.m, h) - p.m -
          (cost_uses_pair_integrals(r.name) ? static_cast<double>(rho(p.m, h))
                                            : 0.0);
      const bool row_ok =
          tr.counters.drift_calls == N * r.drift &&
          tr.counters.diffusion_calls == N * r.diffusion &&
          tr.counters.jacobian_calls == N * r.jacobian &&
          tr.counters.scalar_evals(p.d) ==
              N * static_cast<std::int64_t>(det_cost);
      if (!row_ok && detail.empty()) detail = r.name;
      ok = ok && row_ok;
    }
    B.check(ok, "observed counters match the cost-model rows", detail);
  }

  // Report round trip.
  {
    StudyConfig sc;
    sc.problem_id = "eq1";
    sc.schemes = {"EM"};
    sc.hmax_exp = 2;
    sc.hmin_exp = 4;
    sc.paths = 4;
    sc.seed = seed;
    sc.fit_window = 2;
    const ConvergenceReport rep = run_study(sc);
    const std::string csv = report_to_csv(rep);
    const ConvergenceReport r2 = report_from_csv(csv);
    const std::string json_text = report_to_json(r2);
    const ConvergenceReport r3 = report_from_json(json_text);
    B.check(report_to_csv(r3) == csv && report_to_json(r3) == json_text,
            "report csv/json round trip is lossless");
  }

  if (B.failures == 0) {
    std::printf("selftest: all checks passed\n");
    return 0;
  }
  std::printf("selftest: %d check(s) failed\n", B.failures);
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"srk: strong-approximation SDE solver benchmark tool"};
  app.require_subcommand(1);
  const std::vector<std::string>& names = srk::scheme_names();
  std::string footer = "schemes: ";
  for (std::size_t i = 0; i < names.size(); ++i)
    footer += (i ? ", " : "") + names[i];
  footer += "\nproblems: eq1 (scalar, arctan closed form), eq2 (scalar, tanh "
            "type), eq3 (additive noise, --dim = m), eq4 (linear system, "
            "--dim = d = m), eq5 (torus flow, no closed form), eq6 "
            "(Lotka-Volterra, --dim = d = m, no closed form)";
  footer += "\nmetrics: terminal-l2, terminal-lp, sup-grid-lp";
  app.footer(footer);

  std::uint64_t seed = 0;
  if (const char* env = std::getenv("SRK_SEED"))
    seed = std::strtoull(env, nullptr, 10);
  std::string rho_name = "sqrt-3h";
  int threads = 1;

  // bench
  auto* cmd_bench = app.add_subcommand("bench", "Run a convergence study");
  std::string b_problem = "eq1", b_schemes, b_metric = "terminal-l2",
              b_ref_scheme = "MIL", b_config;
  std::vector<std::string> b_outs;
  int b_dim = 0, b_hmax = 4, b_hmin = 12, b_fit = 4, b_href = 14;
  std::int64_t b_paths = 2000;
  double b_p = 2.0;
  bool b_use_ref = false, b_no_shared = false, b_skip_comm = false;
  auto* o_problem = cmd_bench->add_option("--problem", b_problem, "Problem id (eq1..eq6)");
  auto* o_dim = cmd_bench->add_option("--dim", b_dim, "Problem dimension parameter (0 = default)");
  auto* o_schemes = cmd_bench->add_option("--schemes", b_schemes, "Comma-separated scheme list");
  auto* o_hmax = cmd_bench->add_option("--hmax", b_hmax, "Largest step: h = 2^-hmax");
  auto* o_hmin = cmd_bench->add_option("--hmin", b_hmin, "Smallest step: h = 2^-hmin");
  auto* o_paths = cmd_bench->add_option("--paths", b_paths, "Number of Monte Carlo paths");
  auto* o_metric = cmd_bench->add_option("--metric", b_metric, "terminal-l2 | terminal-lp | sup-grid-lp");
  auto* o_p = cmd_bench->add_option("--p", b_p, "Lp exponent for the lp metrics");
  auto* o_use_ref = cmd_bench->add_flag("--use-reference", b_use_ref, "Force reference-solution mode");
  auto* o_ref_scheme = cmd_bench->add_option("--ref-scheme", b_ref_scheme, "Reference scheme");
  auto* o_href = cmd_bench->add_option("--href-exp", b_href, "Reference step: h_ref = 2^-href_exp");
  auto* o_no_shared = cmd_bench->add_flag("--no-shared-paths", b_no_shared, "Decouple coarse runs from the reference increments (diagnostics)");
  auto* o_fit = cmd_bench->add_option("--fit-window", b_fit, "Number of smallest h in the order fit");
  cmd_bench->add_option("--out", b_outs, "Output file; .json gets JSON, anything else CSV; repeatable");
  cmd_bench->add_option("--config", b_config, "JSON file with StudyConfig keys; flags override");
  cmd_bench->add_flag("--skip-commutativity-check", b_skip_comm, "Skip the numerical commutativity probe");
  auto* ob_seed = cmd_bench->add_option("--seed", seed, "Master seed (env SRK_SEED)");
  auto* ob_threads = cmd_bench->add_option("--threads", threads, "Worker threads (<= 0 = hardware)");
  auto* ob_rho = cmd_bench->add_option("--rho-reading", rho_name, "sqrt-3h | sqrt3-h");

  // check-tableau
  auto* cmd_check = app.add_subcommand("check-tableau", "Verify order conditions of a tableau file");
  std::string c_file, c_mode = "general-ito";
  cmd_check->add_option("file", c_file, "Tableau file")->required();
  cmd_check->add_option("--mode", c_mode, "general-ito | general-strat | commutative-ito | commutative-strat | additive");

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Integrate one path and write its trajectory CSV");
  std::string s_problem = "eq1", s_scheme = "EM", s_out, s_dump;
  int s_dim = 0;
  std::int64_t s_steps = 64;
  std::uint64_t s_path = 0;
  cmd_sim->add_option("--problem", s_problem, "Problem id");
  cmd_sim->add_option("--dim", s_dim, "Problem dimension parameter");
  cmd_sim->add_option("--scheme", s_scheme, "Scheme name");
  cmd_sim->add_option("--steps", s_steps, "Step count");
  cmd_sim->add_option("--path", s_path, "Path index");
  cmd_sim->add_option("--out", s_out, "Trajectory CSV (stdout when omitted)");
  cmd_sim->add_option("--dump-wiener", s_dump, "Binary dump of the path's noise grid");
  cmd_sim->add_option("--seed", seed, "Master seed (env SRK_SEED)");
  auto* os_rho = cmd_sim->add_option("--rho-reading", rho_name, "sqrt-3h | sqrt3-h");
  (void)os_rho;

  // cost
  auto* cmd_cost = app.add_subcommand("cost", "Print cost-model rows");
  // This subcommand spells the step size --h, so the help flag keeps only
  // its long form here.
  cmd_cost->set_help_flag("--help", "Print help");
  std::string k_scheme;
  int k_d = 1, k_m = 1;
  double k_h = 0.015625;
  cmd_cost->add_option("--scheme", k_scheme, "Single scheme (all rows when omitted)");
  cmd_cost->add_option("--d", k_d, "State dimension");
  cmd_cost->add_option("--m", k_m, "Noise dimension");
  cmd_cost->add_option("--h", k_h, "Step size");
  cmd_cost->add_option("--rho-reading", rho_name, "sqrt-3h | sqrt3-h");

  // selftest
  auto* cmd_self = app.add_subcommand("selftest", "Run the invariant battery");
  bool full = false;
  bool fast = false;
  cmd_self->add_flag("--full", full, "Larger sample counts");
  cmd_self->add_flag("--fast", fast, "Reduced sample counts (the default)");
  cmd_self->add_option("--seed", seed, "Master seed (env SRK_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  srk::RhoReading reading;
  try {
    reading = srk::rho_reading_from_string(rho_name);
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }

  try {
    if (*cmd_bench) {
      srk::StudyConfig cfg;
      cfg.seed = seed;
      if (!b_config.empty()) {
        std::string err;
        const int rc = apply_config_file(cfg, b_config, err);
        if (rc != 0) return usage_error(err);
      }
      if (o_problem->count()) cfg.problem_id = b_problem;
      if (o_dim->count()) cfg.dim = b_dim;
      if (o_schemes->count() || cfg.schemes.empty())
        cfg.schemes = split_commas(b_schemes);
      if (o_hmax->count()) cfg.hmax_exp = b_hmax;
      if (o_hmin->count()) cfg.hmin_exp = b_hmin;
      if (o_paths->count()) cfg.paths = b_paths;
      if (o_metric->count()) cfg.metric = srk::metric_from_string(b_metric);
      if (o_p->count()) cfg.p = b_p;
      if (o_use_ref->count()) cfg.use_reference = b_use_ref;
      if (o_ref_scheme->count()) cfg.reference.scheme = b_ref_scheme;
      if (o_href->count()) cfg.reference.href_exp = b_href;
      if (o_no_shared->count()) cfg.reference.shared_paths = !b_no_shared;
      if (o_fit->count()) cfg.fit_window = b_fit;
      if (ob_seed->count()) cfg.seed = seed;
      if (ob_threads->count()) cfg.threads = threads;
      if (ob_rho->count()) cfg.rho_reading = reading;
      return run_bench(cfg, b_outs, b_skip_comm);
    }
    if (*cmd_check) return run_check_tableau(c_file, c_mode);
    if (*cmd_sim)
      return run_simulate(s_problem, s_dim, s_scheme, s_steps, seed, s_path,
                          s_out, s_dump, reading);
    if (*cmd_cost) return run_cost(k_scheme, k_d, k_m, k_h, reading);
    if (*cmd_self) return run_selftest(full && !fast, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "srk: %s\n", e.what());
    return 1;
  }
  return 2;
}
