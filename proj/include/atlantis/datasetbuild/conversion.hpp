#pragma once

#include <string>

#include "atlantis/core/depth.hpp"

namespace atlantis::datasetbuild {

/// Mapping from normalized inverse depth to capped metric depth.
/// inverse_linear maps linearly in inverse-depth space and takes the
/// reciprocal; linear interpolates directly between d_max and d_min.
struct ConversionConfig {
  double d_min_m = 0.3;
  double d_max_m = 20.0;
  enum class Mapping { inverse_linear, linear };
  Mapping mapping = Mapping::inverse_linear;

  void validate() const;
};

ConversionConfig::Mapping mapping_from_string(const std::string& name);
const char* to_string(ConversionConfig::Mapping mapping);

/// n = 1 (nearest) -> d_min, n = 0 (farthest) -> d_max; strictly monotone
/// decreasing in n. Input must be flagged normalized.
core::MetricDepthMap inverse_to_metric(const core::InverseRelativeDepthMap& norm_inv,
                                       const ConversionConfig& cfg);

double inverse_to_metric_value(double n, const ConversionConfig& cfg);

/// Inverse of inverse_to_metric_value on [d_min, d_max].
double metric_to_inverse_value(double depth_m, const ConversionConfig& cfg);

}  // namespace atlantis::datasetbuild
