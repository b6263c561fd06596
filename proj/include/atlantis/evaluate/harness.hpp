#pragma once

#include <string>
#include <vector>

#include "atlantis/backends/backends.hpp"
#include "atlantis/core/manifest.hpp"
#include "atlantis/evaluate/metrics.hpp"

namespace atlantis::evaluate {

struct PerImageResult {
  std::string record_id;
  MetricsReport metrics;
};

struct EvalRun {
  std::vector<PerImageResult> per_image;
  MetricsReport aggregate;  // per-image mean over included images
  std::vector<std::string> excluded;  // empty valid set
  std::vector<std::string> failed;    // backend failures (non-fatal)
};

struct HarnessOptions {
  bool use_masks = true;
  bool pooled = false;  // pool valid pixels across images instead of
                        // averaging per-image metrics
  EvalConfig eval;
};

/// Runs the depth model over every dataset_pair in the manifest and averages
/// per-image metrics (or pools pixels when requested). Images with empty
/// valid sets are excluded and listed.
EvalRun evaluate_model(backends::DepthModelBackend& backend,
                       const core::Manifest& manifest,
                       const HarnessOptions& opts = {});

/// Per-image mean of the nine metrics; n_valid sums.
MetricsReport aggregate_mean(const std::vector<PerImageResult>& per_image);

}  // namespace atlantis::evaluate
