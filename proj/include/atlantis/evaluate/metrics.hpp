#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atlantis/core/depth.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"

namespace atlantis::evaluate {

/// The nine depth metrics over a valid-pixel set.
struct MetricsReport {
  double rmse = 0.0;      // meters
  double rmse_log = 0.0;
  double a_rel = 0.0;
  double s_rel = 0.0;     // meters
  double log10 = 0.0;
  double si_log = 0.0;    // x100 scale
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_valid = 0;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

struct EvalConfig {
  double gt_min_m = 1e-3;
  std::optional<double> gt_max_m;
  bool median_scaling = false;
  uncertainty::VarianceConvention si_log_variance =
      uncertainty::VarianceConvention::population;

  void validate() const;
};

/// Computes the nine metrics over the valid set: finite gt, gt >= gt_min_m,
/// gt <= gt_max_m when set, and mask-true when a mask is given. Predictions
/// must be positive on the valid set.
MetricsReport compute_metrics(const core::MetricDepthMap& pred,
                              const core::MetricDepthMap& gt,
                              const uncertainty::ValidityMask* mask = nullptr,
                              const EvalConfig& cfg = {});

}  // namespace atlantis::evaluate
