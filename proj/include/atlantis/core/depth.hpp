#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace atlantis::core {

/// Estimator-style inverse relative depth (larger = nearer), arbitrary scale
/// unless `normalized` is set, in which case values lie in [0,1].
struct InverseRelativeDepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  bool normalized = false;

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
};

/// Scene distance in meters, capped at cap_m.
struct MetricDepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  double cap_m = 20.0;

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
};

InverseRelativeDepthMap make_inverse_depth(int width, int height, double fill = 0.0,
                                           bool normalized = false);
MetricDepthMap make_metric_depth(int width, int height, double fill, double cap_m = 20.0);

void validate(const InverseRelativeDepthMap& map);
void validate(const MetricDepthMap& map);

InverseRelativeDepthMap hflip(const InverseRelativeDepthMap& map);

/// Min-max rescale to [0,1]; constant maps become all zeros (farthest).
/// Maps already flagged normalized pass through unchanged.
InverseRelativeDepthMap minmax_normalized(const InverseRelativeDepthMap& map);

/// Nearest-neighbor resample (used when a generator reports a downscale factor).
InverseRelativeDepthMap resample_nearest(const InverseRelativeDepthMap& map,
                                         int new_width, int new_height);

// Depth files are 16-bit grayscale PNG plus a `<path>.json` sidecar recording
// the encoding, value range and (for metric maps) the cap. Inverse maps store
// round(v * 65535) when normalized, min-max rescaled code points otherwise;
// metric maps store millimeters.
void encode_depth(const InverseRelativeDepthMap& map, const std::string& path);
void encode_depth(const MetricDepthMap& map, const std::string& path);

using DecodedDepth = std::variant<InverseRelativeDepthMap, MetricDepthMap>;
DecodedDepth decode_depth(const std::string& path);

InverseRelativeDepthMap decode_inverse_depth(const std::string& path);
MetricDepthMap decode_metric_depth(const std::string& path);

std::string depth_sidecar_path(const std::string& path);

}  // namespace atlantis::core
