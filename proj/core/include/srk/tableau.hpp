#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "srk/rational.hpp"

namespace srk {

/// Noise/calculus regime an order check runs under.
enum class TableauMode {
  general_ito,
  general_strat,
  commutative_ito,
  commutative_strat,
  additive,
};

[[nodiscard]] std::string to_string(TableauMode mode);
[[nodiscard]] TableauMode tableau_mode_from_string(const std::string& name);

/// Strong stochastic order certified by the condition check.
enum class StochOrder { none, half, one };
/// Deterministic order; conditions beyond order 2 are not checked, so `two`
/// means "at least 2".
enum class DetOrder { none, one, two };

[[nodiscard]] double stoch_order_value(StochOrder o);
[[nodiscard]] int det_order_value(DetOrder o);

struct ConditionResult {
  std::string id;        // e.g. "beta2^T B1 e"
  double lhs = 0.0;
  double required = 0.0;
  bool satisfied = false;
  bool exact = false;    // held with zero residual in rational arithmetic
};

struct OrderReport {
  TableauMode mode = TableauMode::general_ito;
  StochOrder ps = StochOrder::none;
  DetOrder pd = DetOrder::none;
  bool all_exact = false;  // no condition fell back to floating point
  std::vector<ConditionResult> conditions;
};

/// Coefficient set defining one stochastic Runge-Kutta scheme: drift and
/// diffusion stage matrices A0/A1 with nodes c0/c1, the strictly lower
/// triangular diffusion coupling B1, and the weight vectors alpha, beta1,
/// beta2. Entries are exact rationals; the solver materializes a double view.
struct ExtendedTableau {
  int s = 0;
  std::string name = "custom";
  std::vector<Rational> c0, c1, alpha, beta1, beta2;
  std::vector<std::vector<Rational>> A0, A1, B1;
  /// Set when a parsed document omitted beta2 (the reduced tableau used by
  /// additive-noise schemes has none).
  bool additive_hint = false;

  bool operator==(const ExtendedTableau&) const = default;

  /// Checks dimensions and strict lower triangularity of B1; throws
  /// std::invalid_argument on violation.
  void validate() const;

  /// True when A0 has an entry on or above the diagonal, i.e. the drift
  /// stages form a coupled fixed-point system.
  [[nodiscard]] bool drift_implicit() const;
};

struct TableauParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Built-in coefficient sets: EM, SSBE, SRI2s1, SRI2s2, SRA2s1, SRA2s2.
/// (The commutative and Stratonovich scheme variants reuse these with a
/// different integral selector; that choice lives in the solver.)
[[nodiscard]] const ExtendedTableau& builtin_tableau(const std::string& name);
[[nodiscard]] const std::vector<std::string>& builtin_tableau_names();

[[nodiscard]] OrderReport check_order_conditions(const ExtendedTableau& t,
                                                 TableauMode mode);

/// Text format: `key = value` lines; scalars `s` and `name`, vectors like
/// `alpha = [1/2, 1/2]`, matrices like `A0 = [[0, 0], [1, 0]]`. Entries are
/// decimal or p/q rational literals. Missing vectors/matrices default to
/// zero; a missing beta2 additionally sets additive_hint.
[[nodiscard]] ExtendedTableau parse_tableau(const std::string& text);
[[nodiscard]] std::string serialize_tableau(const ExtendedTableau& t);

}  // namespace srk
