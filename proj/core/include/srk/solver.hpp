#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srk/sde.hpp"
#include "srk/tableau.hpp"
#include "srk/wiener.hpp"

namespace srk {

enum class SchemeKind { srk, em, milstein, spli };

/// Which iterated-integral flavor a scheme consumes. `none` for schemes that
/// only touch increments, `additive` for the reduced additive-noise method.
enum class Selector {
  none,
  ito_approx,
  strat_approx,
  commutative_ito,
  commutative_strat,
  additive,
};

[[nodiscard]] std::string to_string(Selector s);

struct EvalCounters {
  std::int64_t drift_calls = 0;
  std::int64_t diffusion_calls = 0;   // one per column evaluation
  std::int64_t jacobian_calls = 0;    // one per column Jacobian
  std::int64_t gaussians = 0;         // increments + auxiliary draws

  EvalCounters& operator+=(const EvalCounters& o) {
    drift_calls += o.drift_calls;
    diffusion_calls += o.diffusion_calls;
    jacobian_calls += o.jacobian_calls;
    gaussians += o.gaussians;
    return *this;
  }
  /// Scalar function evaluations: d per drift/diffusion call, d^2 per
  /// Jacobian call (the deterministic part of the cost-model rows).
  [[nodiscard]] std::int64_t scalar_evals(int d) const {
    return drift_calls * d + diffusion_calls * d +
           jacobian_calls * static_cast<std::int64_t>(d) * d;
  }
};

struct ImplicitOptions {
  double tolerance = 1e-12;  // scaled by (1 + ||Y||_inf)
  int max_iterations = 50;
};

/// A runnable scheme: public name, step kind, tableau (for srk kind), the
/// integral selector, and a double view of the coefficients for stepping.
struct SchemeInstance {
  std::string name;
  SchemeKind kind = SchemeKind::srk;
  Selector selector = Selector::none;
  ExtendedTableau tableau;

  /// Double view of the tableau, materialized once at construction.
  struct View {
    int s = 0;
    std::vector<double> c0, c1, alpha, beta1, beta2;
    std::vector<std::vector<double>> A0, A1, B1;
    bool drift_implicit = false;
    bool any_B1 = false;
  } view;

  [[nodiscard]] Calculus required_calculus() const {
    return (selector == Selector::strat_approx ||
            selector == Selector::commutative_strat)
               ? Calculus::stratonovich
               : Calculus::ito;
  }
  [[nodiscard]] bool needs_iterated() const {
    if (kind == SchemeKind::milstein || kind == SchemeKind::spli) return true;
    if (kind == SchemeKind::srk)
      return selector != Selector::none && selector != Selector::additive &&
             view.any_B1;
    return false;
  }
};

/// The scheme registry: EM, SSBE, MIL, SPLI, SRI2s1, SRI2s2, SRIC2s1,
/// SRIC2s2, SRS2s1, SRS2s2, SRSC2s1, SRSC2s2, SRA2s1, SRA2s2.
[[nodiscard]] SchemeInstance make_scheme(const std::string& name);
[[nodiscard]] const std::vector<std::string>& scheme_names();
[[nodiscard]] bool scheme_known(const std::string& name);
/// Builds an srk-kind instance around a custom tableau.
[[nodiscard]] SchemeInstance make_custom_scheme(const ExtendedTableau& t,
                                                Selector selector);

/// Everything one step needs besides the state: time, step size, increments,
/// and (when the scheme consumes them) iterated integrals whose mode matches
/// the scheme's calculus.
struct StepContext {
  double t = 0.0;
  double h = 0.0;
  const WienerIncrements* wiener = nullptr;
  const IteratedIntegrals* iterated = nullptr;
};

/// One step of the general stochastic Runge-Kutta method. Drift stages are
/// solved by fixed-point iteration when the tableau is drift-implicit.
void srk_step(const SchemeInstance& scheme, const SdeProblem& p,
              const StepContext& ctx, std::span<const double> y,
              std::span<double> out, EvalCounters* counters = nullptr,
              const ImplicitOptions& opts = {});

/// One step of the reduced additive-noise method (diffusion evaluated at
/// nodes only, no iterated integrals).
void additive_step(const SchemeInstance& scheme, const SdeProblem& p,
                   const StepContext& ctx, std::span<const double> y,
                   std::span<double> out, EvalCounters* counters = nullptr,
                   const ImplicitOptions& opts = {});

void em_step(const SdeProblem& p, const StepContext& ctx,
             std::span<const double> y, std::span<double> out,
             EvalCounters* counters = nullptr);

void milstein_step(const SdeProblem& p, const StepContext& ctx,
                   std::span<const double> y, std::span<double> out,
                   EvalCounters* counters = nullptr);

void spli_step(const SdeProblem& p, const StepContext& ctx,
               std::span<const double> y, std::span<double> out,
               EvalCounters* counters = nullptr);

/// Dispatches on scheme.kind/selector and validates the integral mode.
void scheme_step(const SchemeInstance& scheme, const SdeProblem& p,
                 const StepContext& ctx, std::span<const double> y,
                 std::span<double> out, EvalCounters* counters = nullptr,
                 const ImplicitOptions& opts = {});

/// Per-step noise data with bookkeeping of fresh Gaussians drawn.
struct StepDraw {
  WienerIncrements w;
  IteratedIntegrals iter;
  bool has_iter = false;
  std::uint64_t gaussians = 0;
};

/// Supplies each step's noise. Implementations are stateless in the sense
/// that draw(step, sel) depends only on its arguments and construction-time
/// parameters, so identical sources yield identical data in any order.
class PathSource {
 public:
  virtual ~PathSource() = default;
  [[nodiscard]] virtual StepDraw draw(std::int64_t step, Selector sel) = 0;
  [[nodiscard]] virtual int m() const = 0;
  [[nodiscard]] virtual double step_size() const = 0;
};

/// Draws fresh increments (and, per selector, iterated integrals) from
/// streams derived from (master_seed, path, level_tag, step).
class FreshPathSource final : public PathSource {
 public:
  FreshPathSource(std::uint64_t master_seed, std::uint64_t path_index,
                  std::uint64_t level_tag, int m, double h,
                  RhoReading reading = RhoReading::sqrt_3h);
  [[nodiscard]] StepDraw draw(std::int64_t step, Selector sel) override;
  [[nodiscard]] int m() const override { return m_; }
  [[nodiscard]] double step_size() const override { return h_; }

 private:
  std::uint64_t master_seed_, path_index_, level_tag_;
  int m_;
  double h_;
  RhoReading reading_;
};

/// Aggregates windows of a fine grid via Chen composition; the commutative
/// and Stratonovich selectors are rebuilt from the aggregated increments.
/// Consumes no fresh randomness.
class AggregatePathSource final : public PathSource {
 public:
  AggregatePathSource(const WienerFineGrid& grid, std::int64_t window);
  [[nodiscard]] StepDraw draw(std::int64_t step, Selector sel) override;
  [[nodiscard]] int m() const override { return grid_.m(); }
  [[nodiscard]] double step_size() const override;

 private:
  const WienerFineGrid& grid_;
  std::int64_t window_;
};

struct Trajectory {
  std::vector<double> times;                 // N+1 grid times
  std::vector<std::vector<double>> states;   // N+1 states
  std::vector<std::vector<double>> w_path;   // running Wiener sums, N+1 rows
  EvalCounters counters;
  [[nodiscard]] const std::vector<double>& terminal() const {
    return states.back();
  }
};

/// Integrates N equidistant steps from p.t0 to p.T. The source must produce
/// steps of size (T - t0)/N.
[[nodiscard]] Trajectory integrate(const SchemeInstance& scheme,
                                   const SdeProblem& p, std::int64_t n_steps,
                                   PathSource& source,
                                   const ImplicitOptions& opts = {});

}  // namespace srk
