#include "atlantis/genpipe/genpipe.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/parallel.hpp"

namespace atlantis::genpipe {

namespace {

namespace fs = std::filesystem;
using core::ManifestRecord;
using core::RecordKind;

std::string short_id(const std::string& id) { return id.substr(0, 16); }

}  // namespace

ConditioningDepth ingest_conditioning_depth(const core::Manifest& manifest,
                                            const ManifestRecord& rec) {
  const auto path = manifest.resolve(rec.paths.at("png")).string();
  auto decoded = core::decode_depth(path);
  ConditioningDepth out;
  if (auto* inv = std::get_if<core::InverseRelativeDepthMap>(&decoded)) {
    if (inv->normalized) {
      out.map = std::move(*inv);
      out.convention = "normalized";
    } else {
      out.map = core::minmax_normalized(*inv);
      out.convention = "minmax_normalized";
    }
    return out;
  }
  const auto& metric = std::get<core::MetricDepthMap>(decoded);
  core::InverseRelativeDepthMap inv;
  inv.width = metric.width;
  inv.height = metric.height;
  inv.data.resize(metric.data.size());
  for (size_t i = 0; i < metric.data.size(); ++i)
    inv.data[i] = 1.0 / std::max(metric.data[i], 1e-6);
  out.map = core::minmax_normalized(inv);
  out.convention = "reciprocal_minmax_normalized";
  return out;
}

namespace {

struct WorkItem {
  std::string record_id;
  std::string depth_id;
  int prompt_index = 0;
  int sample_index = 0;
  std::uint64_t seed = 0;
};

struct ItemResult {
  bool ok = false;
  bool skipped = false;
  std::string record_id;
  std::string reason;
  ManifestRecord record;
  core::RgbImage image;
  fs::path image_rel;
};

}  // namespace

std::uint64_t seed_schedule(std::int64_t base_seed, const std::string& depth_id,
                            const std::string& prompt, int sample_index) {
  const std::string key = std::to_string(base_seed) + "|" + depth_id + "|" + prompt +
                          "|" + std::to_string(sample_index);
  return core::sha256_u64(key);
}

CheckpointRef train_generator(const core::Manifest& triplets, const TrainConfig& cfg,
                              backends::ConditionedGeneratorBackend& backend,
                              core::Manifest& out_manifest, const core::ClockFn& now) {
  const auto report = core::manifest_validate(triplets.path());
  if (!report.consistent())
    fail(Errc::manifest_invalid, "triplet manifest has " +
                                     std::to_string(report.violations.size()) +
                                     " violations");
  size_t triplet_count = 0;
  for (const auto& rec : triplets.records())
    triplet_count += rec.kind == RecordKind::triplet;
  if (triplet_count == 0) fail(Errc::empty_triplets, triplets.path().string());

  CheckpointRef ref;
  try {
    ref = backend.train(triplets, cfg);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::backend_failure, backend.id() + ": " + e.what());
  }
  if (ref.config_hash != cfg.config_hash())
    fail(Errc::backend_failure, backend.id() + ": checkpoint config hash mismatch");

  ManifestRecord rec;
  rec.id = core::sha256_hex("checkpoint|" + ref.uri);
  rec.kind = RecordKind::checkpoint;
  rec.params = {{"backend_id", ref.backend_id},
                {"uri", ref.uri},
                {"config_hash", ref.config_hash},
                {"triplet_manifest_digest", core::manifest_file_digest(triplets.path())},
                {"triplet_count", triplet_count}};
  rec.created_at = now();
  if (!out_manifest.contains(rec.id)) out_manifest.append(rec);
  return ref;
}

core::RgbImage generate_conditioned(const core::InverseRelativeDepthMap& depth,
                                    const std::string& prompt,
                                    const GenerationConfig& cfg, std::uint64_t seed,
                                    backends::ConditionedGeneratorBackend& backend,
                                    const CheckpointRef& checkpoint) {
  cfg.validate();
  if (!depth.normalized)
    fail(Errc::invalid_config, "conditioning depth must be normalized");
  if (checkpoint.backend_id != backend.id())
    fail(Errc::checkpoint_mismatch, "checkpoint belongs to " + checkpoint.backend_id +
                                        ", not " + backend.id());
  core::RgbImage image;
  try {
    image = backend.sample(depth, prompt, cfg, seed, checkpoint);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::backend_failure, backend.id() + ": " + e.what());
  }
  const int k = backend.downscale();
  const int want_w = std::max(1, depth.width / k);
  const int want_h = std::max(1, depth.height / k);
  if (image.width != want_w || image.height != want_h)
    fail(Errc::backend_failure, backend.id() + ": sample dimension contract violated");
  return image;
}

GenerationReport generate_dataset_samples(const core::Manifest& depth_manifest,
                                          const GenerationConfig& cfg,
                                          backends::ConditionedGeneratorBackend& backend,
                                          const CheckpointRef& checkpoint,
                                          core::Manifest& out_manifest,
                                          const GenerateOptions& opts) {
  cfg.validate();
  std::vector<const ManifestRecord*> depth_records;
  for (const auto& rec : depth_manifest.records())
    if (rec.kind == RecordKind::depth) depth_records.push_back(&rec);
  if (depth_records.empty())
    fail(Errc::invalid_config, "depth manifest has no depth records");

  const std::string config_hash = cfg.config_hash();

  // Canonical item order: (depth id, prompt index, sample index).
  std::vector<WorkItem> items;
  for (const auto* depth_rec : depth_records) {
    for (size_t pi = 0; pi < cfg.prompts.size(); ++pi) {
      for (int s = 0; s < cfg.samples_per_condition; ++s) {
        WorkItem item;
        item.depth_id = depth_rec->id;
        item.prompt_index = static_cast<int>(pi);
        item.sample_index = s;
        item.seed = seed_schedule(cfg.base_seed, depth_rec->id, cfg.prompts[pi], s);
        item.record_id = core::sha256_hex(
            "generated_image|" + depth_rec->id + "|" + cfg.prompts[pi] + "|" +
            std::to_string(s) + "|" + config_hash + "|" + checkpoint.uri);
        items.push_back(std::move(item));
      }
    }
  }

  GenerationReport report;
  report.expected = items.size();
  const fs::path artifacts_rel = "artifacts";
  fs::create_directories(out_manifest.dir() / artifacts_rel);

  // Carry the conditioning depth records over (paths re-based onto this
  // manifest's directory) so the output manifest is self-contained for the
  // dataset-assembly stage.
  for (const auto* depth_rec : depth_records) {
    if (out_manifest.contains(depth_rec->id)) continue;
    ManifestRecord copy = *depth_rec;
    for (auto& [role, rel] : copy.paths) {
      const auto absolute = depth_manifest.resolve(rel);
      rel = fs::relative(absolute, out_manifest.dir()).generic_string();
    }
    out_manifest.append(copy);
  }

  std::mutex manifest_mu;

  const auto process = [&](size_t index) -> ItemResult {
    const WorkItem& item = items[index];
    ItemResult result;
    result.record_id = item.record_id;
    try {
      {
        std::lock_guard lock(manifest_mu);
        if (out_manifest.contains(item.record_id)) {
          result.ok = true;
          result.skipped = true;
          return result;
        }
      }
      const auto* depth_rec = depth_manifest.find(item.depth_id);
      const auto conditioning = ingest_conditioning_depth(depth_manifest, *depth_rec);
      const std::string& prompt = cfg.prompts[static_cast<size_t>(item.prompt_index)];
      result.image = generate_conditioned(conditioning.map, prompt, cfg, item.seed,
                                          backend, checkpoint);
      result.image_rel = artifacts_rel / ("gen_" + short_id(item.record_id) + ".png");

      ManifestRecord rec;
      rec.id = item.record_id;
      rec.kind = RecordKind::generated_image;
      rec.paths["image"] = result.image_rel.generic_string();
      rec.params = {{"depth_ref", item.depth_id},
                    {"prompt", prompt},
                    {"prompt_index", item.prompt_index},
                    {"sample_index", item.sample_index},
                    {"seed", item.seed},
                    {"guidance_scale", cfg.guidance_scale},
                    {"num_steps", cfg.num_steps},
                    {"backend_id", backend.id()},
                    {"checkpoint_uri", checkpoint.uri},
                    {"downscale", backend.downscale()},
                    {"conditioning_convention", conditioning.convention}};
      rec.created_at = opts.now();
      result.record = std::move(rec);
      result.ok = true;
    } catch (const std::exception& e) {
      result.reason = e.what();
    }
    return result;
  };

  const auto emit = [&](size_t, ItemResult& result) {
    if (!result.ok) {
      ++report.failed;
      report.failures.emplace_back(result.record_id, result.reason);
      return;
    }
    if (result.skipped) {
      ++report.skipped;
      return;
    }
    // Generated images are stored at 16 bits so the green channel survives
    // the round trip to disk exactly.
    const auto image_abs = out_manifest.dir() / result.image_rel;
    core::save_image(result.image, image_abs.string(), 16);
    result.record.sha256["image"] = core::sha256_file_hex(image_abs);
    std::lock_guard lock(manifest_mu);
    out_manifest.append(result.record);
    ++report.generated;
  };

  core::ordered_parallel_for<ItemResult>(items.size(), opts.jobs, process, emit);
  return report;
}

}  // namespace atlantis::genpipe
