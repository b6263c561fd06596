#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "atlantis/backends/backends.hpp"
#include "atlantis/core/clock.hpp"
#include "atlantis/core/depth.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/manifest.hpp"

namespace atlantis::uncertainty {

/// Per-pixel flip-consistency uncertainty, computed on normalized inverse
/// depth. Bounded by 0.25 for normalized inputs under the population
/// convention.
struct UncertaintyMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
};

struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 1 = valid (DU below threshold)
  double threshold = 0.15;

  bool at(int x, int y) const { return data[static_cast<size_t>(y) * width + x] != 0; }
  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
  double valid_fraction() const;
};

enum class VarianceConvention { population, sample };

struct UncertaintyOptions {
  VarianceConvention variance = VarianceConvention::population;
  bool normalize = true;  // min-max normalize estimates before differencing
};

/// Min-max rescale to [0,1]; constant maps become all zeros. Maps already
/// flagged normalized pass through unchanged.
core::InverseRelativeDepthMap normalize_inverse_depth(
    const core::InverseRelativeDepthMap& map);

/// Variance between the estimate on the image and the re-aligned estimate on
/// its horizontal flip, per pixel.
UncertaintyMap depth_uncertainty(const core::RgbImage& image,
                                 backends::DepthEstimatorBackend& backend,
                                 const UncertaintyOptions& opts = {});

/// Variance of the two aligned estimates directly (both already normalized).
UncertaintyMap uncertainty_between(const core::InverseRelativeDepthMap& a,
                                   const core::InverseRelativeDepthMap& b_aligned,
                                   VarianceConvention variance = VarianceConvention::population);

ValidityMask validity_mask(const UncertaintyMap& du, double threshold = 0.15);

// Masks are 1-bit-per-pixel PNG plus a `<path>.json` sidecar recording the
// threshold and valid fraction.
void encode_mask(const ValidityMask& mask, const std::string& path);
ValidityMask decode_mask(const std::string& path);

// DU maps reuse the 16-bit depth container: values in [0,1] stored as
// round(v * 65535) with an "encoding":"unit_float" sidecar.
void encode_uncertainty(const UncertaintyMap& du, const std::string& path);
UncertaintyMap decode_uncertainty(const std::string& path);

struct FilterReport {
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  double mean_valid_fraction = 0.0;
  std::vector<std::pair<std::string, std::string>> failures;  // record id -> reason
};

struct FilterOptions {
  int jobs = 1;
  core::ClockFn now = core::wall_clock();
  UncertaintyOptions uncertainty;
};

/// Computes DU and the validity mask for every image-bearing record
/// (generated_image or source_image) and appends uncertainty + mask records.
FilterReport filter_images(const core::Manifest& images_manifest,
                           backends::DepthEstimatorBackend& estimator,
                           double threshold, core::Manifest& out_manifest,
                           const FilterOptions& opts = {});

}  // namespace atlantis::uncertainty
