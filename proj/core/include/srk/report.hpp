#pragma once

#include <string>

#include "srk/bench.hpp"

namespace srk {

// Study reports as text artifacts. Both formats carry the full report (meta,
// config minus the thread count, rows with observed counters, summaries), so
// csv -> report -> json -> report -> csv is lossless; doubles are written
// with 17 significant digits.

[[nodiscard]] std::string report_to_csv(const ConvergenceReport& r);
[[nodiscard]] std::string report_to_json(const ConvergenceReport& r);

[[nodiscard]] ConvergenceReport report_from_csv(const std::string& text);
[[nodiscard]] ConvergenceReport report_from_json(const std::string& text);

}  // namespace srk
