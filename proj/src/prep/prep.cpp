#include "atlantis/prep/prep.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/parallel.hpp"

namespace atlantis::prep {

namespace {

namespace fs = std::filesystem;
using core::ManifestRecord;
using core::RecordKind;

constexpr const char* kOpVersion = "v1";

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string short_id(const std::string& id) { return id.substr(0, 16); }

struct ItemResult {
  bool ok = false;
  bool skipped = false;
  std::string file;
  std::string reason;
  std::vector<ManifestRecord> records;
};

}  // namespace

void validate(const Caption& caption) {
  if (trimmed(caption.text).empty())
    fail(Errc::empty_caption, "caption is empty after trimming");
}

core::InverseRelativeDepthMap pseudo_label_depth(
    const core::RgbImage& image, backends::DepthEstimatorBackend& backend) {
  core::InverseRelativeDepthMap map;
  try {
    map = backend.estimate(image);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::backend_failure, backend.id() + ": " + e.what());
  }
  if (map.width != image.width || map.height != image.height)
    fail(Errc::backend_failure,
         backend.id() + ": estimate changed dimensions");
  return core::minmax_normalized(map);
}

Caption caption_image(const core::RgbImage& image, backends::CaptionBackend& backend) {
  Caption caption;
  try {
    caption.text = backend.caption(image);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::backend_failure, backend.id() + ": " + e.what());
  }
  validate(caption);
  return caption;
}

TripletBuildReport build_triplets(const std::filesystem::path& image_dir,
                                  backends::DepthEstimatorBackend& estimator,
                                  backends::CaptionBackend& captioner,
                                  const std::filesystem::path& out_manifest,
                                  const BuildOptions& opts) {
  if (!fs::is_directory(image_dir))
    fail(Errc::empty_input_dir, image_dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(image_dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  if (files.empty()) fail(Errc::empty_input_dir, image_dir.string());
  std::sort(files.begin(), files.end());

  core::Manifest manifest(out_manifest);
  const fs::path artifacts_rel = "artifacts";
  fs::create_directories(manifest.dir() / artifacts_rel);

  std::mutex manifest_mu;
  TripletBuildReport report;

  const auto process = [&](size_t index) -> ItemResult {
    ItemResult result;
    const fs::path& file = files[index];
    result.file = file.filename().string();
    try {
      const std::string file_digest = core::sha256_file_hex(file);
      const std::string source_id = core::sha256_hex("source_image|" + file_digest);
      const std::string depth_id = core::sha256_hex(
          "depth|" + source_id + "|" + estimator.id() + "|" + kOpVersion);
      const std::string caption_id = core::sha256_hex(
          "caption|" + source_id + "|" + captioner.id() + "|" + kOpVersion);
      const std::string triplet_id = core::sha256_hex(
          "triplet|" + source_id + "|" + depth_id + "|" + caption_id);

      {
        std::lock_guard lock(manifest_mu);
        if (manifest.contains(triplet_id)) {
          result.ok = true;
          result.skipped = true;
          return result;
        }
      }

      const auto image = core::load_image(file.string());
      const auto depth = pseudo_label_depth(image, estimator);
      const auto caption = caption_image(image, captioner);

      const std::string timestamp = opts.now();
      const std::string source_rel =
          fs::relative(file, manifest.dir()).generic_string();

      ManifestRecord source;
      source.id = source_id;
      source.kind = RecordKind::source_image;
      source.paths["image"] = source_rel;
      source.sha256["image"] = file_digest;
      source.params = {{"width", image.width}, {"height", image.height}};
      source.created_at = timestamp;

      const fs::path depth_rel = artifacts_rel / (short_id(depth_id) + ".png");
      core::encode_depth(depth, (manifest.dir() / depth_rel).string());
      ManifestRecord depth_rec;
      depth_rec.id = depth_id;
      depth_rec.kind = RecordKind::depth;
      depth_rec.paths["png"] = depth_rel.generic_string();
      depth_rec.paths["sidecar"] = depth_rel.generic_string() + ".json";
      depth_rec.sha256["png"] = core::sha256_file_hex(manifest.dir() / depth_rel);
      depth_rec.sha256["sidecar"] =
          core::sha256_file_hex(manifest.dir() / (depth_rel.string() + ".json"));
      depth_rec.params = {{"estimator_id", estimator.id()},
                          {"source_ref", source_id},
                          {"normalized", true},
                          {"convention", "minmax_normalized"}};
      depth_rec.created_at = timestamp;

      const fs::path caption_rel = artifacts_rel / (short_id(caption_id) + ".txt");
      {
        std::ofstream out(manifest.dir() / caption_rel);
        if (!out) fail(Errc::io_failure, "cannot write caption file");
        out << caption.text << "\n";
      }
      ManifestRecord caption_rec;
      caption_rec.id = caption_id;
      caption_rec.kind = RecordKind::caption;
      caption_rec.paths["text"] = caption_rel.generic_string();
      caption_rec.sha256["text"] = core::sha256_file_hex(manifest.dir() / caption_rel);
      caption_rec.params = {{"captioner_id", captioner.id()}, {"source_ref", source_id}};
      caption_rec.created_at = timestamp;

      ManifestRecord triplet;
      triplet.id = triplet_id;
      triplet.kind = RecordKind::triplet;
      triplet.params = {{"image_ref", source_id},
                        {"depth_ref", depth_id},
                        {"caption_ref", caption_id},
                        {"estimator_id", estimator.id()},
                        {"captioner_id", captioner.id()}};
      triplet.created_at = timestamp;

      result.records = {source, depth_rec, caption_rec, triplet};
      result.ok = true;
    } catch (const std::exception& e) {
      result.reason = e.what();
    }
    return result;
  };

  const auto emit = [&](size_t, ItemResult& result) {
    if (!result.ok) {
      ++report.failed;
      report.failures.emplace_back(result.file, result.reason);
      return;
    }
    ++report.success;
    if (result.skipped) {
      ++report.skipped;
      return;
    }
    std::lock_guard lock(manifest_mu);
    for (auto& rec : result.records)
      if (!manifest.contains(rec.id)) manifest.append(rec);
  };

  core::ordered_parallel_for<ItemResult>(files.size(), opts.jobs, process, emit);
  return report;
}

}  // namespace atlantis::prep
