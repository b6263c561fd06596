#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "atlantis/backends/mocks.hpp"
#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/prep/prep.hpp"
#include "support/test_util.hpp"

using namespace atlantis;
using testutil::TempDir;

namespace {

struct EmptyCaptioner : backends::CaptionBackend {
  std::string id_ = "empty-captioner";
  const std::string& id() const override { return id_; }
  std::string caption(const core::RgbImage&) override { return "   "; }
};

void write_images(const std::filesystem::path& dir, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const auto img = testutil::random_image(rng, 6, 4);
    core::save_image(img, (dir / ("img_" + std::to_string(i) + ".png")).string());
  }
}

}  // namespace

TEST_CASE("pseudo_label_depth normalizes estimator output") {
  backends::MockDepthEstimator estimator;
  auto image = core::make_image(2, 1);
  image.at(0, 0, 0) = 1.0;
  const auto map = prep::pseudo_label_depth(image, estimator);
  CHECK(map.normalized);
  CHECK(map.data[0] == 1.0);
  CHECK(map.data[1] == 0.0);

  const auto constant = prep::pseudo_label_depth(core::make_image(3, 3, 0.5), estimator);
  for (double v : constant.data) CHECK(v == 0.0);
}

TEST_CASE("caption_image surfaces contract violations") {
  backends::MockCaptioner good;
  const auto image = core::make_image(2, 2, 1.0);
  CHECK(prep::caption_image(image, good).text == "a scene with mean luminance 1.00");
  CHECK(prep::caption_image(image, good).text == prep::caption_image(image, good).text);

  EmptyCaptioner bad;
  CHECK_THROWS_WITH_AS(prep::caption_image(image, bad), doctest::Contains("EmptyCaption"),
                       Error);
}

TEST_CASE("build_triplets over a clean directory") {
  TempDir dir("prep");
  const auto images = dir.path / "images";
  std::filesystem::create_directories(images);
  write_images(images, 3, 42);

  backends::MockDepthEstimator estimator;
  backends::MockCaptioner captioner;
  prep::BuildOptions opts;
  opts.now = core::fixed_clock();

  const auto report = prep::build_triplets(images, estimator, captioner,
                                           dir.path / "m.jsonl", opts);
  CHECK(report.success == 3);
  CHECK(report.failed == 0);

  core::Manifest manifest(dir.path / "m.jsonl");
  size_t triplets = 0;
  for (const auto& rec : manifest.records()) {
    if (rec.kind != core::RecordKind::triplet) continue;
    ++triplets;
    // Depth dimensions must equal image dimensions.
    const auto* depth_rec = manifest.find(rec.params["depth_ref"].get<std::string>());
    const auto* source_rec = manifest.find(rec.params["image_ref"].get<std::string>());
    REQUIRE(depth_rec != nullptr);
    REQUIRE(source_rec != nullptr);
    const auto depth =
        core::decode_inverse_depth(manifest.resolve(depth_rec->paths.at("png")).string());
    CHECK(depth.width == source_rec->params["width"].get<int>());
    CHECK(depth.height == source_rec->params["height"].get<int>());
  }
  CHECK(triplets == 3);
  CHECK(core::manifest_validate(dir.path / "m.jsonl").consistent());
}

TEST_CASE("build_triplets tolerates corrupt files") {
  TempDir dir("prepbad");
  const auto images = dir.path / "images";
  std::filesystem::create_directories(images);
  write_images(images, 2, 1);
  std::ofstream(images / "broken.png") << "junk";

  backends::MockDepthEstimator estimator;
  backends::MockCaptioner captioner;
  const auto report =
      prep::build_triplets(images, estimator, captioner, dir.path / "m.jsonl");
  CHECK(report.success == 2);
  CHECK(report.failed == 1);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].first == "broken.png");
}

TEST_CASE("build_triplets cardinality conservation on random corpora") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 3; ++iter) {
    TempDir dir("prepcard");
    const auto images = dir.path / "images";
    std::filesystem::create_directories(images);
    const int good = 1 + static_cast<int>(rng() % 4);
    const int bad = static_cast<int>(rng() % 3);
    write_images(images, good, rng());
    for (int i = 0; i < bad; ++i)
      std::ofstream(images / ("bad_" + std::to_string(i) + ".bin")) << "x";

    backends::MockDepthEstimator estimator;
    backends::MockCaptioner captioner;
    const auto report =
        prep::build_triplets(images, estimator, captioner, dir.path / "m.jsonl");
    CHECK(report.success + report.failed == static_cast<size_t>(good + bad));
    CHECK(report.failed == static_cast<size_t>(bad));
  }
}

TEST_CASE("build_triplets is idempotent and parallel-stable") {
  TempDir dir("prepidem");
  const auto images = dir.path / "images";
  std::filesystem::create_directories(images);
  write_images(images, 4, 7);

  backends::MockDepthEstimator estimator;
  backends::MockCaptioner captioner;
  prep::BuildOptions opts;
  opts.now = core::fixed_clock();

  prep::build_triplets(images, estimator, captioner, dir.path / "a.jsonl", opts);
  const auto digest_a = core::manifest_file_digest(dir.path / "a.jsonl");

  // Rerun over the same manifest: everything is skipped, nothing changes.
  const auto rerun =
      prep::build_triplets(images, estimator, captioner, dir.path / "a.jsonl", opts);
  CHECK(rerun.skipped == 4);
  CHECK(core::manifest_file_digest(dir.path / "a.jsonl") == digest_a);

  // A fresh parallel run produces the identical manifest.
  opts.jobs = 4;
  prep::build_triplets(images, estimator, captioner, dir.path / "b.jsonl", opts);
  CHECK(core::manifest_file_digest(dir.path / "b.jsonl") == digest_a);
}

TEST_CASE("build_triplets requires a nonempty directory") {
  TempDir dir("prepempty");
  const auto images = dir.path / "images";
  std::filesystem::create_directories(images);
  backends::MockDepthEstimator estimator;
  backends::MockCaptioner captioner;
  CHECK_THROWS_WITH_AS(
      prep::build_triplets(images, estimator, captioner, dir.path / "m.jsonl"),
      doctest::Contains("EmptyInputDir"), Error);
}

// Paper-scale cardinality: 700 source images -> 700 triplets. Run with
// `atlantis_tests --no-skip`.
TEST_CASE("prep at 700-image scale" * doctest::skip()) {
  TempDir dir("prep700");
  const auto images = dir.path / "images";
  std::filesystem::create_directories(images);
  std::mt19937_64 rng(700);
  for (int i = 0; i < 700; ++i) {
    const auto img = testutil::random_image(rng, 2, 2);
    char name[32];
    std::snprintf(name, sizeof(name), "u_%03d.png", i);
    core::save_image(img, (images / name).string());
  }
  backends::MockDepthEstimator estimator;
  backends::MockCaptioner captioner;
  prep::BuildOptions opts;
  opts.jobs = 4;
  const auto report =
      prep::build_triplets(images, estimator, captioner, dir.path / "m.jsonl", opts);
  CHECK(report.success == 700);
  CHECK(report.failed == 0);
  size_t triplets = 0;
  for (const auto& rec : core::manifest_read(dir.path / "m.jsonl"))
    triplets += rec.kind == core::RecordKind::triplet;
  CHECK(triplets == 700);
}
