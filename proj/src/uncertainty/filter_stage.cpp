#include <mutex>

#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/parallel.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"

namespace atlantis::uncertainty {

namespace {

namespace fs = std::filesystem;
using core::ManifestRecord;
using core::RecordKind;

std::string short_id(const std::string& id) { return id.substr(0, 16); }

struct ItemResult {
  bool ok = false;
  bool skipped = false;
  std::string image_id;
  std::string reason;
  double valid_fraction = 0.0;
  UncertaintyMap du;
  ValidityMask mask;
  ManifestRecord du_rec;
  ManifestRecord mask_rec;
};

}  // namespace

FilterReport filter_images(const core::Manifest& images_manifest,
                           backends::DepthEstimatorBackend& estimator,
                           double threshold, core::Manifest& out_manifest,
                           const FilterOptions& opts) {
  if (!(threshold > 0.0)) fail(Errc::non_positive_threshold, "threshold must be > 0");

  std::vector<const ManifestRecord*> image_records;
  for (const auto& rec : images_manifest.records()) {
    if (rec.kind != RecordKind::generated_image && rec.kind != RecordKind::source_image)
      continue;
    if (rec.paths.count("image")) image_records.push_back(&rec);
  }

  const fs::path artifacts_rel = "artifacts";
  fs::create_directories(out_manifest.dir() / artifacts_rel);

  const std::string variance_name =
      opts.uncertainty.variance == VarianceConvention::population ? "population" : "sample";

  FilterReport report;
  std::mutex manifest_mu;
  double fraction_sum = 0.0;

  const auto process = [&](size_t index) -> ItemResult {
    const ManifestRecord& rec = *image_records[index];
    ItemResult result;
    result.image_id = rec.id;
    try {
      const std::string du_id = core::sha256_hex(
          "uncertainty|" + rec.id + "|" + estimator.id() + "|" + variance_name + "|" +
          (opts.uncertainty.normalize ? "norm" : "raw"));
      const std::string mask_id =
          core::sha256_hex("mask|" + du_id + "|" + std::to_string(threshold));
      {
        std::lock_guard lock(manifest_mu);
        if (out_manifest.contains(mask_id)) {
          result.ok = true;
          result.skipped = true;
          return result;
        }
      }
      const auto image =
          core::load_image(images_manifest.resolve(rec.paths.at("image")).string());
      result.du = depth_uncertainty(image, estimator, opts.uncertainty);
      result.mask = validity_mask(result.du, threshold);
      result.valid_fraction = result.mask.valid_fraction();

      const std::string timestamp = opts.now();
      ManifestRecord du_rec;
      du_rec.id = du_id;
      du_rec.kind = RecordKind::uncertainty;
      du_rec.paths["png"] = (artifacts_rel / ("du_" + short_id(du_id) + ".png")).generic_string();
      du_rec.paths["sidecar"] = du_rec.paths["png"] + ".json";
      du_rec.params = {{"image_ref", rec.id},
                       {"estimator_id", estimator.id()},
                       {"variance", variance_name},
                       {"normalize", opts.uncertainty.normalize}};
      du_rec.created_at = timestamp;

      ManifestRecord mask_rec;
      mask_rec.id = mask_id;
      mask_rec.kind = RecordKind::mask;
      mask_rec.paths["mask"] =
          (artifacts_rel / ("mask_" + short_id(mask_id) + ".png")).generic_string();
      mask_rec.paths["sidecar"] = mask_rec.paths["mask"] + ".json";
      mask_rec.params = {{"image_ref", rec.id},
                         {"uncertainty_ref", du_id},
                         {"threshold", threshold},
                         {"valid_fraction", result.valid_fraction}};
      mask_rec.created_at = timestamp;

      result.du_rec = std::move(du_rec);
      result.mask_rec = std::move(mask_rec);
      result.ok = true;
    } catch (const std::exception& e) {
      result.reason = e.what();
    }
    return result;
  };

  const auto emit = [&](size_t, ItemResult& result) {
    if (!result.ok) {
      ++report.failed;
      report.failures.emplace_back(result.image_id, result.reason);
      return;
    }
    if (result.skipped) {
      ++report.skipped;
      ++report.processed;
      return;
    }
    const auto du_abs = out_manifest.dir() / result.du_rec.paths.at("png");
    encode_uncertainty(result.du, du_abs.string());
    result.du_rec.sha256["png"] = core::sha256_file_hex(du_abs);
    result.du_rec.sha256["sidecar"] =
        core::sha256_file_hex(du_abs.string() + ".json");

    const auto mask_abs = out_manifest.dir() / result.mask_rec.paths.at("mask");
    encode_mask(result.mask, mask_abs.string());
    result.mask_rec.sha256["mask"] = core::sha256_file_hex(mask_abs);
    result.mask_rec.sha256["sidecar"] =
        core::sha256_file_hex(mask_abs.string() + ".json");

    std::lock_guard lock(manifest_mu);
    if (!out_manifest.contains(result.du_rec.id)) out_manifest.append(result.du_rec);
    out_manifest.append(result.mask_rec);
    ++report.processed;
    fraction_sum += result.valid_fraction;
  };

  core::ordered_parallel_for<ItemResult>(image_records.size(), opts.jobs, process, emit);

  const size_t fresh = report.processed - report.skipped;
  report.mean_valid_fraction =
      fresh > 0 ? fraction_sum / static_cast<double>(fresh) : 0.0;
  return report;
}

}  // namespace atlantis::uncertainty
