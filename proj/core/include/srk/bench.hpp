#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srk/solver.hpp"
#include "srk/testeqs.hpp"
#include "srk/wiener.hpp"

namespace srk {

/// How a run is scored against the truth (closed form or reference path).
/// terminal_l2 is the default: ((1/M) sum ||X_T - Y_N||^2)^(1/2).
enum class ErrorMetric { terminal_l2, terminal_lp, sup_grid_lp };

[[nodiscard]] std::string to_string(ErrorMetric m);
[[nodiscard]] ErrorMetric metric_from_string(const std::string& s);

/// A convergence study: one problem, a scheme list, a dyadic ladder of step
/// sizes h = (T - t0) * 2^-j for j in [hmax_exp, hmin_exp], M paths.
/// `threads` only controls the worker pool; results are independent of it
/// and it is excluded from the canonical string and the report files.
struct StudyConfig {
  std::string problem_id = "eq1";
  int dim = 0;  // m for eq3, d for eq4/eq6; 0 picks the problem default
  std::vector<std::string> schemes;
  int hmax_exp = 4;
  int hmin_exp = 12;
  std::int64_t paths = 2000;
  std::uint64_t seed = 0;
  ErrorMetric metric = ErrorMetric::terminal_l2;
  double p = 2.0;  // Lp exponent for the lp metrics
  bool use_reference = false;  // forced on when the problem has no closed form
  ReferenceConfig reference;
  int fit_window = 4;
  RhoReading rho_reading = RhoReading::sqrt_3h;
  int threads = 1;  // <= 0 picks hardware concurrency

  void validate() const;
  /// Canonical key=value line hashed into config_hash; excludes threads.
  [[nodiscard]] std::string canonical_string() const;
  [[nodiscard]] std::uint64_t config_hash() const;  // FNV-1a 64
};

struct LevelResult {
  int h_exp = 0;
  std::int64_t n_steps = 0;
  double h = 0.0;
  double err = 0.0;
  double mc_stderr = 0.0;
  double cost_per_step = 0.0;  // NaN when the scheme has no cost-model row
  double total_cost = 0.0;     // n_steps * cost_per_step
  EvalCounters counters;       // observed on path 0
};

struct SchemeSummary {
  std::string scheme;
  double gamma = 0.0;           // slope of log2 err vs log2 h over the window
  double p_eff = 0.0;           // -slope of log2 err vs log2 total cost
  double pairwise_p_eff = 0.0;  // two smallest window h; NaN without a cost row
  std::vector<int> fit_exps;    // h exponents the fits used
};

struct ConvergenceReport {
  StudyConfig config;
  /// rows[s][l]: scheme s (config order), level l (h descending).
  std::vector<std::vector<LevelResult>> rows;
  std::vector<SchemeSummary> summaries;
};

/// Per-step cost-model rows (drift + diffusion + Jacobian-entry evaluations
/// plus m increment Gaussians plus rho(m,h) auxiliary Gaussians where the
/// scheme consumes pair integrals). Covers the runnable schemes except SSBE,
/// plus the reference rows SRI1 / SRIC1 kept for comparison tables.
[[nodiscard]] bool has_cost_model(const std::string& scheme);
[[nodiscard]] const std::vector<std::string>& cost_model_names();
[[nodiscard]] double cost(const std::string& scheme, int d, int m, double h,
                          RhoReading reading = RhoReading::sqrt_3h);
/// Whether the scheme's row charges for the rho(m,h) auxiliary draws.
[[nodiscard]] bool cost_uses_pair_integrals(const std::string& scheme);

/// Least-squares slope of log2(err) against log2(h). `window` > 0 restricts
/// the fit to that many smallest-h pairs.
[[nodiscard]] double empirical_order(
    std::span<const std::pair<double, double>> h_err, int window = 0);

struct EffectiveOrder {
  double lsq = 0.0;       // -slope of log2 err vs log2 (N * cost per step)
  double pairwise = 0.0;  // |dlog err| / |dlog total cost|, two smallest h
};

[[nodiscard]] EffectiveOrder effective_order(
    std::span<const std::pair<double, double>> h_err,
    const std::string& scheme, int d, int m, double t_span = 1.0,
    RhoReading reading = RhoReading::sqrt_3h);

/// Runs the study: error per (scheme, h) with MC standard errors, cost-model
/// columns, and fitted orders. Deterministic in cfg (excluding threads);
/// paths are independent workers and the reduction runs in path order.
[[nodiscard]] ConvergenceReport run_study(const StudyConfig& cfg);

}  // namespace srk
