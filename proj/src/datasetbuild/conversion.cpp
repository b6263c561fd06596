#include "atlantis/datasetbuild/conversion.hpp"

#include <algorithm>
#include <cmath>

#include "atlantis/core/error.hpp"

namespace atlantis::datasetbuild {

void ConversionConfig::validate() const {
  if (!(d_min_m > 0.0) || !(d_min_m < d_max_m))
    fail(Errc::invalid_config, "require 0 < d_min_m < d_max_m");
}

ConversionConfig::Mapping mapping_from_string(const std::string& name) {
  if (name == "inverse_linear") return ConversionConfig::Mapping::inverse_linear;
  if (name == "linear") return ConversionConfig::Mapping::linear;
  fail(Errc::invalid_config, "unknown mapping: " + name);
}

const char* to_string(ConversionConfig::Mapping mapping) {
  return mapping == ConversionConfig::Mapping::inverse_linear ? "inverse_linear"
                                                              : "linear";
}

double inverse_to_metric_value(double n, const ConversionConfig& cfg) {
  // Endpoints are exact by contract; the formula only reaches them up to
  // floating-point rounding.
  if (n == 0.0) return cfg.d_max_m;
  if (n == 1.0) return cfg.d_min_m;
  if (cfg.mapping == ConversionConfig::Mapping::linear)
    return cfg.d_max_m - n * (cfg.d_max_m - cfg.d_min_m);
  const double q = n * (1.0 / cfg.d_min_m - 1.0 / cfg.d_max_m) + 1.0 / cfg.d_max_m;
  return 1.0 / q;
}

double metric_to_inverse_value(double depth_m, const ConversionConfig& cfg) {
  if (cfg.mapping == ConversionConfig::Mapping::linear)
    return (cfg.d_max_m - depth_m) / (cfg.d_max_m - cfg.d_min_m);
  return (1.0 / depth_m - 1.0 / cfg.d_max_m) /
         (1.0 / cfg.d_min_m - 1.0 / cfg.d_max_m);
}

core::MetricDepthMap inverse_to_metric(const core::InverseRelativeDepthMap& norm_inv,
                                       const ConversionConfig& cfg) {
  cfg.validate();
  if (!norm_inv.normalized)
    fail(Errc::invalid_config, "inverse_to_metric requires a normalized map");
  core::validate(norm_inv);
  core::MetricDepthMap out = core::make_metric_depth(
      norm_inv.width, norm_inv.height, cfg.d_max_m, cfg.d_max_m);
  for (size_t i = 0; i < norm_inv.data.size(); ++i) {
    const double d = inverse_to_metric_value(norm_inv.data[i], cfg);
    // Endpoints must be exact; interior values are clamped against the
    // floating-point fringe of the reciprocal.
    out.data[i] = std::clamp(d, cfg.d_min_m, cfg.d_max_m);
  }
  return out;
}

}  // namespace atlantis::datasetbuild
