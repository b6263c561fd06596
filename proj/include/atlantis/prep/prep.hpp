#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "atlantis/backends/backends.hpp"
#include "atlantis/core/clock.hpp"
#include "atlantis/core/manifest.hpp"

namespace atlantis::prep {

struct Caption {
  std::string text;
};

/// Throws EmptyCaption when the text is empty after whitespace trimming.
void validate(const Caption& caption);

/// Normalized inverse relative depth from the estimator, dimension-checked.
core::InverseRelativeDepthMap pseudo_label_depth(
    const core::RgbImage& image, backends::DepthEstimatorBackend& backend);

Caption caption_image(const core::RgbImage& image, backends::CaptionBackend& backend);

struct TripletBuildReport {
  std::size_t success = 0;  // includes records skipped on resume
  std::size_t failed = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, std::string>> failures;  // file -> reason
};

struct BuildOptions {
  int jobs = 1;
  core::ClockFn now = core::wall_clock();
};

/// Builds one {image, depth, caption} triplet per readable image in the
/// directory. Failures are per-item and listed, not fatal; record ids are
/// content-derived so reruns skip existing work.
TripletBuildReport build_triplets(const std::filesystem::path& image_dir,
                                  backends::DepthEstimatorBackend& estimator,
                                  backends::CaptionBackend& captioner,
                                  const std::filesystem::path& out_manifest,
                                  const BuildOptions& opts = {});

}  // namespace atlantis::prep
