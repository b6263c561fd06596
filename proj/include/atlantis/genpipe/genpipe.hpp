#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "atlantis/backends/backends.hpp"
#include "atlantis/core/clock.hpp"
#include "atlantis/core/manifest.hpp"

namespace atlantis::genpipe {

using backends::CheckpointRef;
using backends::GenerationConfig;
using backends::TrainConfig;

/// Injective, reproducible seed per (depth id, prompt, sample index).
std::uint64_t seed_schedule(std::int64_t base_seed, const std::string& depth_id,
                            const std::string& prompt, int sample_index);

struct ConditioningDepth {
  core::InverseRelativeDepthMap map;  // normalized
  std::string convention;             // provenance of the normalization applied
};

/// Conditioning depth records may hold normalized inverse maps, raw inverse
/// maps, or metric maps (DIODE-style); the latter two are converted to the
/// normalized inverse convention.
ConditioningDepth ingest_conditioning_depth(const core::Manifest& manifest,
                                            const core::ManifestRecord& record);

/// Trains the conditioning branch on the triplet manifest and records a
/// checkpoint entry linking the checkpoint to the manifest digest.
CheckpointRef train_generator(const core::Manifest& triplets, const TrainConfig& cfg,
                              backends::ConditionedGeneratorBackend& backend,
                              core::Manifest& out_manifest,
                              const core::ClockFn& now = core::wall_clock());

/// Single conditioned sample with the dimension contract enforced.
core::RgbImage generate_conditioned(const core::InverseRelativeDepthMap& depth,
                                    const std::string& prompt,
                                    const GenerationConfig& cfg, std::uint64_t seed,
                                    backends::ConditionedGeneratorBackend& backend,
                                    const CheckpointRef& checkpoint);

struct GenerationReport {
  std::size_t expected = 0;
  std::size_t generated = 0;
  std::size_t skipped = 0;  // already present (resume)
  std::size_t failed = 0;
  std::vector<std::pair<std::string, std::string>> failures;  // record id -> reason
};

struct GenerateOptions {
  int jobs = 1;
  core::ClockFn now = core::wall_clock();
};

/// One generated_image record per (depth, prompt, sample index), in that
/// order. Existing record ids are skipped, so interrupted runs resume to the
/// same manifest. Per-item failures are reported, not fatal.
GenerationReport generate_dataset_samples(const core::Manifest& depth_manifest,
                                          const GenerationConfig& cfg,
                                          backends::ConditionedGeneratorBackend& backend,
                                          const CheckpointRef& checkpoint,
                                          core::Manifest& out_manifest,
                                          const GenerateOptions& opts = {});

}  // namespace atlantis::genpipe
