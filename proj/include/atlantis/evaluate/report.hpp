#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "atlantis/evaluate/metrics.hpp"

namespace atlantis::evaluate {

struct NamedResult {
  std::string name;
  MetricsReport metrics;
};

inline constexpr std::array<const char*, 9> kMetricColumns = {
    "RMSE", "RMSE_log", "A.Rel", "S.Rel", "log10", "SI_log",
    "delta1", "delta2", "delta3"};

/// Lower is better for the first six columns, higher for the deltas.
inline constexpr std::array<bool, 9> kLowerIsBetter = {
    true, true, true, true, true, true, false, false, false};

struct ReportTable {
  std::vector<std::string> row_names;
  std::vector<std::array<double, 9>> values;
  std::array<std::size_t, 9> best_row{};  // row index of the best value per column
};

ReportTable build_table(const std::vector<NamedResult>& results);

/// Writes report.csv (plain values, 3 decimals), report.txt (aligned table
/// with the best value per column starred) and one bar plot per metric under
/// plots/. Returns the table with best-per-column flags.
ReportTable render_report(const std::vector<NamedResult>& results,
                          const std::filesystem::path& out_dir);

std::string format_metric(double value);

std::array<double, 9> metric_values(const MetricsReport& m);

}  // namespace atlantis::evaluate
