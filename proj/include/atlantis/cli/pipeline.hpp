#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atlantis/backends/backends.hpp"
#include "atlantis/core/clock.hpp"
#include "atlantis/datasetbuild/conversion.hpp"
#include "atlantis/evaluate/metrics.hpp"

namespace atlantis::cli {

/// One provenance-hashable source of truth per run; flags override fields.
struct PipelineConfig {
  backends::BackendRegistry registry;
  backends::GenerationConfig generation;
  backends::TrainConfig train;
  datasetbuild::ConversionConfig conversion;
  evaluate::EvalConfig eval;
  double du_threshold = 0.15;
  double split_ratio = 0.9;
  int jobs = 1;
  bool deterministic_timestamps = false;

  core::ClockFn clock() const;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
};

/// End-to-end smoke over mock backends: prepare, train-gen, generate
/// (2 depths x 2 prompts x 2 samples), filter, build, eval with the
/// green-channel oracle. Deterministic given the seed.
int run_demo_pipeline(const std::filesystem::path& work_dir, std::int64_t seed);

/// Subcommand dispatcher. Exit 0 on full success, 1 on partial per-item
/// failures, 2 on configuration or usage errors.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace atlantis::cli
