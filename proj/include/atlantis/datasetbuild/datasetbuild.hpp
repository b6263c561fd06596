#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atlantis/backends/backends.hpp"
#include "atlantis/core/clock.hpp"
#include "atlantis/core/manifest.hpp"
#include "atlantis/datasetbuild/conversion.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"

namespace atlantis::datasetbuild {

struct DatasetReport {
  std::size_t pairs = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> split_counts;  // "train"/"val"
  double mean_valid_fraction = 0.0;
  std::vector<std::size_t> depth_histogram;  // 10 bins over (0, d_max]
  std::vector<std::pair<std::string, std::string>> failures;
};

struct AssembleOptions {
  int jobs = 1;
  core::ClockFn now = core::wall_clock();
  double threshold = 0.15;
  double split_ratio = 0.9;  // train fraction, assigned by hash rank
  const core::Manifest* uncertainty_manifest = nullptr;  // reuse filter output
  uncertainty::UncertaintyOptions uncertainty;
};

/// One dataset pair per generated image: metric depth converted from the
/// conditioning depth, validity mask from DU over the generated image, and a
/// deterministic train/val split by hash rank of the pair ids.
DatasetReport assemble_dataset(const core::Manifest& gen_manifest,
                               backends::DepthEstimatorBackend& estimator,
                               const ConversionConfig& cfg,
                               core::Manifest& out_manifest,
                               const AssembleOptions& opts = {});

struct StatsReport {
  nlohmann::json machine;  // full machine-readable stats
  std::string table;       // human-readable rendering
};

StatsReport dataset_stats(const core::Manifest& dataset_manifest);

}  // namespace atlantis::datasetbuild
