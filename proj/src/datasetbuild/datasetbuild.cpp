#include "atlantis/datasetbuild/datasetbuild.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/parallel.hpp"
#include "atlantis/genpipe/genpipe.hpp"

namespace atlantis::datasetbuild {

namespace {

namespace fs = std::filesystem;
using core::ManifestRecord;
using core::RecordKind;

std::string short_id(const std::string& id) { return id.substr(0, 16); }

struct ItemResult {
  bool ok = false;
  bool skipped = false;
  std::string gen_id;
  std::string reason;
  double valid_fraction = 0.0;
  core::MetricDepthMap depth;
  uncertainty::ValidityMask mask;
  bool reuse_mask = false;
  std::string reused_mask_rel;      // path within the uncertainty manifest dir
  std::string reused_mask_sidecar;
  ManifestRecord record;
};

/// Rank-by-hash split: deterministic and exact for any ratio.
std::map<std::string, std::string> assign_splits(const std::vector<std::string>& ids,
                                                 double ratio) {
  std::vector<std::pair<std::string, std::string>> ranked;  // hash -> id
  ranked.reserve(ids.size());
  for (const auto& id : ids) ranked.emplace_back(core::sha256_hex("split|" + id), id);
  std::sort(ranked.begin(), ranked.end());
  const auto n_train = static_cast<size_t>(
      std::llround(ratio * static_cast<double>(ids.size())));
  std::map<std::string, std::string> splits;
  for (size_t i = 0; i < ranked.size(); ++i)
    splits[ranked[i].second] = i < n_train ? "train" : "val";
  return splits;
}

}  // namespace

DatasetReport assemble_dataset(const core::Manifest& gen_manifest,
                               backends::DepthEstimatorBackend& estimator,
                               const ConversionConfig& cfg,
                               core::Manifest& out_manifest,
                               const AssembleOptions& opts) {
  cfg.validate();
  if (!(opts.threshold > 0.0))
    fail(Errc::non_positive_threshold, "threshold must be > 0");
  if (opts.split_ratio < 0.0 || opts.split_ratio > 1.0)
    fail(Errc::invalid_config, "split_ratio must lie in [0,1]");

  const auto validation = core::manifest_validate(gen_manifest.path());
  if (!validation.consistent())
    fail(Errc::manifest_invalid, "generated manifest has " +
                                     std::to_string(validation.violations.size()) +
                                     " violations");

  std::vector<const ManifestRecord*> generated;
  for (const auto& rec : gen_manifest.records())
    if (rec.kind == RecordKind::generated_image) generated.push_back(&rec);

  // Pair ids are derived before any work so the split is a pure function of
  // the generated manifest and the configuration.
  std::vector<std::string> pair_ids;
  pair_ids.reserve(generated.size());
  const std::string conv_desc = std::string(to_string(cfg.mapping)) + "|" +
                                std::to_string(cfg.d_min_m) + "|" +
                                std::to_string(cfg.d_max_m);
  for (const auto* rec : generated)
    pair_ids.push_back(core::sha256_hex("dataset_pair|" + rec->id + "|" + conv_desc +
                                        "|" + std::to_string(opts.threshold) + "|" +
                                        estimator.id()));
  const auto splits = assign_splits(pair_ids, opts.split_ratio);

  // Index reusable masks from the filter stage by conditioning image id.
  std::map<std::string, const ManifestRecord*> mask_index;
  if (opts.uncertainty_manifest != nullptr) {
    for (const auto& rec : opts.uncertainty_manifest->records()) {
      if (rec.kind != RecordKind::mask) continue;
      if (rec.params.value("threshold", -1.0) != opts.threshold) continue;
      mask_index[rec.params.value("image_ref", "")] = &rec;
    }
  }

  const fs::path artifacts_rel = "artifacts";
  fs::create_directories(out_manifest.dir() / artifacts_rel);

  DatasetReport report;
  report.depth_histogram.assign(10, 0);
  std::mutex manifest_mu;
  double fraction_sum = 0.0;
  size_t fresh = 0;

  const auto process = [&](size_t index) -> ItemResult {
    const ManifestRecord& gen = *generated[index];
    const std::string& pair_id = pair_ids[index];
    ItemResult result;
    result.gen_id = gen.id;
    try {
      {
        std::lock_guard lock(manifest_mu);
        if (out_manifest.contains(pair_id)) {
          result.ok = true;
          result.skipped = true;
          return result;
        }
      }
      const std::string depth_ref = gen.params.value("depth_ref", "");
      const auto* depth_rec = gen_manifest.find(depth_ref);
      if (depth_rec == nullptr || !depth_rec->paths.count("png"))
        fail(Errc::missing_conditioning_depth, gen.id);
      auto conditioning = genpipe::ingest_conditioning_depth(gen_manifest, *depth_rec).map;

      const auto image =
          core::load_image(gen_manifest.resolve(gen.paths.at("image")).string());
      if (image.width != conditioning.width || image.height != conditioning.height)
        conditioning =
            core::resample_nearest(conditioning, image.width, image.height);

      result.depth = inverse_to_metric(conditioning, cfg);

      if (auto it = mask_index.find(gen.id); it != mask_index.end()) {
        result.reuse_mask = true;
        result.reused_mask_rel = it->second->paths.at("mask");
        result.reused_mask_sidecar = it->second->paths.at("sidecar");
        result.valid_fraction = it->second->params.value("valid_fraction", 0.0);
      } else {
        const auto du = uncertainty::depth_uncertainty(image, estimator, opts.uncertainty);
        result.mask = uncertainty::validity_mask(du, opts.threshold);
        result.valid_fraction = result.mask.valid_fraction();
      }

      ManifestRecord rec;
      rec.id = pair_id;
      rec.kind = RecordKind::dataset_pair;
      // The image stays with the generated manifest; the pair references it by a path
      // re-based onto this manifest's directory.
      rec.paths["image"] =
          fs::relative(gen_manifest.resolve(gen.paths.at("image")), out_manifest.dir())
              .generic_string();
      rec.sha256["image"] = gen.sha256.at("image");
      rec.params = {{"image_ref", gen.id},
                    {"source_depth_ref", depth_ref},
                    {"prompt", gen.params.value("prompt", "")},
                    {"seed", gen.params.value("seed", 0ull)},
                    {"split", splits.at(pair_id)},
                    {"threshold", opts.threshold},
                    {"estimator_id", estimator.id()},
                    {"d_min_m", cfg.d_min_m},
                    {"d_max_m", cfg.d_max_m},
                    {"mapping", to_string(cfg.mapping)},
                    {"valid_fraction", result.valid_fraction}};
      rec.created_at = opts.now();
      result.record = std::move(rec);
      result.ok = true;
    } catch (const Error& e) {
      if (e.code() == Errc::missing_conditioning_depth) throw;
      result.reason = e.what();
    } catch (const std::exception& e) {
      result.reason = e.what();
    }
    return result;
  };

  const auto emit = [&](size_t, ItemResult& result) {
    if (!result.ok) {
      ++report.failed;
      report.failures.emplace_back(result.gen_id, result.reason);
      return;
    }
    if (result.skipped) {
      ++report.skipped;
      ++report.pairs;
      const auto* existing = out_manifest.find(result.record.id);
      if (existing != nullptr)
        ++report.split_counts[existing->params.value("split", "train")];
      return;
    }
    ManifestRecord& rec = result.record;
    const fs::path depth_rel =
        artifacts_rel / ("pair_" + short_id(rec.id) + "_depth.png");
    core::encode_depth(result.depth, (out_manifest.dir() / depth_rel).string());
    rec.paths["depth"] = depth_rel.generic_string();
    rec.paths["depth_sidecar"] = depth_rel.generic_string() + ".json";
    rec.sha256["depth"] = core::sha256_file_hex(out_manifest.dir() / depth_rel);
    rec.sha256["depth_sidecar"] =
        core::sha256_file_hex((out_manifest.dir() / depth_rel).string() + ".json");

    const fs::path mask_rel = artifacts_rel / ("pair_" + short_id(rec.id) + "_mask.png");
    const auto mask_abs = out_manifest.dir() / mask_rel;
    if (result.reuse_mask) {
      fs::copy_file(opts.uncertainty_manifest->resolve(result.reused_mask_rel),
                    mask_abs, fs::copy_options::overwrite_existing);
      fs::copy_file(opts.uncertainty_manifest->resolve(result.reused_mask_sidecar),
                    fs::path(mask_abs.string() + ".json"),
                    fs::copy_options::overwrite_existing);
    } else {
      uncertainty::encode_mask(result.mask, mask_abs.string());
    }
    rec.paths["mask"] = mask_rel.generic_string();
    rec.paths["mask_sidecar"] = mask_rel.generic_string() + ".json";
    rec.sha256["mask"] = core::sha256_file_hex(mask_abs);
    rec.sha256["mask_sidecar"] = core::sha256_file_hex(mask_abs.string() + ".json");

    for (double v : result.depth.data) {
      const int bin = std::clamp(
          static_cast<int>(v / result.depth.cap_m * 10.0), 0, 9);
      ++report.depth_histogram[static_cast<size_t>(bin)];
    }

    std::lock_guard lock(manifest_mu);
    out_manifest.append(rec);
    ++report.pairs;
    ++report.split_counts[rec.params.value("split", "train")];
    fraction_sum += result.valid_fraction;
    ++fresh;
  };

  core::ordered_parallel_for<ItemResult>(generated.size(), opts.jobs, process, emit);

  report.mean_valid_fraction =
      fresh > 0 ? fraction_sum / static_cast<double>(fresh) : 0.0;
  return report;
}

StatsReport dataset_stats(const core::Manifest& dataset_manifest) {
  const auto validation = core::manifest_validate(dataset_manifest.path());
  if (!validation.consistent())
    fail(Errc::manifest_invalid, "dataset manifest has " +
                                     std::to_string(validation.violations.size()) +
                                     " violations");

  nlohmann::json machine;
  std::map<std::string, size_t> split_counts;
  std::map<std::string, size_t> prompt_counts;
  std::vector<double> valid_fractions;
  nlohmann::json per_image = nlohmann::json::array();

  for (const auto& rec : dataset_manifest.records()) {
    if (rec.kind != RecordKind::dataset_pair) continue;
    ++split_counts[rec.params.value("split", "train")];
    ++prompt_counts[rec.params.value("prompt", "")];
    valid_fractions.push_back(rec.params.value("valid_fraction", 0.0));

    const auto depth = core::decode_metric_depth(
        dataset_manifest.resolve(rec.paths.at("depth")).string());
    double lo = depth.data[0], hi = depth.data[0], sum = 0.0;
    for (double v : depth.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    per_image.push_back({{"id", rec.id},
                         {"depth_min", lo},
                         {"depth_max", hi},
                         {"depth_mean", sum / static_cast<double>(depth.data.size())},
                         {"valid_fraction", rec.params.value("valid_fraction", 0.0)},
                         {"split", rec.params.value("split", "train")}});
  }

  double vf_min = 1.0, vf_max = 0.0, vf_sum = 0.0;
  for (double f : valid_fractions) {
    vf_min = std::min(vf_min, f);
    vf_max = std::max(vf_max, f);
    vf_sum += f;
  }
  const double vf_mean =
      valid_fractions.empty() ? 0.0 : vf_sum / static_cast<double>(valid_fractions.size());

  machine["pair_count"] = valid_fractions.size();
  machine["split_counts"] = split_counts;
  machine["prompt_counts"] = prompt_counts;
  machine["valid_fraction"] = {{"min", valid_fractions.empty() ? 0.0 : vf_min},
                               {"max", valid_fractions.empty() ? 0.0 : vf_max},
                               {"mean", vf_mean}};
  machine["per_image"] = per_image;

  std::ostringstream table;
  table << "pairs: " << valid_fractions.size() << "\n";
  table << "splits:";
  for (const auto& [split, count] : split_counts)
    table << "  " << split << "=" << count;
  table << "\nvalid fraction: mean=" << vf_mean;
  if (!valid_fractions.empty()) table << " min=" << vf_min << " max=" << vf_max;
  table << "\nprompts:\n";
  for (const auto& [prompt, count] : prompt_counts)
    table << "  " << count << "  " << prompt << "\n";

  StatsReport report;
  report.machine = std::move(machine);
  report.table = table.str();
  return report;
}

}  // namespace atlantis::datasetbuild
