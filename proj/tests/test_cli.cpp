#include <doctest.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "atlantis/cli/pipeline.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/depth.hpp"
#include "atlantis/core/manifest.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"
#include "support/test_util.hpp"

using namespace atlantis;
using testutil::TempDir;

namespace {

int run(std::initializer_list<std::string> args) {
  return atlantis::cli::run_cli(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("help exits zero for every subcommand") {
  CHECK(run({"--help"}) == 0);
  for (const char* sub : {"prepare", "train-gen", "generate", "filter", "build",
                          "train-depth", "eval", "report", "enhance", "synth",
                          "validate", "stats", "demo"})
    CHECK(run({sub, "--help"}) == 0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({"no-such-subcommand"}) == 2);
  CHECK(run({"validate", "--definitely-not-a-flag"}) == 2);
  CHECK(run({"validate"}) == 2);  // missing required --manifest
  CHECK(run({}) == 2);
}

TEST_CASE("validate subcommand exit codes") {
  TempDir dir("clivalidate");
  const auto manifest = dir.path / "m.jsonl";
  {
    core::Manifest m(manifest);
    core::ManifestRecord rec;
    rec.id = "ok";
    rec.kind = core::RecordKind::caption;
    rec.created_at = "1970-01-01T00:00:00Z";
    m.append(rec);
  }
  CHECK(run({"validate", "--manifest", manifest.string()}) == 0);

  // A record pointing at a missing file flips the exit code.
  {
    core::Manifest m(manifest);
    core::ManifestRecord rec;
    rec.id = "broken";
    rec.kind = core::RecordKind::source_image;
    rec.paths["image"] = "gone.png";
    rec.created_at = "1970-01-01T00:00:00Z";
    m.append(rec);
  }
  CHECK(run({"validate", "--manifest", manifest.string()}) == 1);
}

TEST_CASE("demo subcommand runs the mock pipeline") {
  TempDir dir("clidemo");
  CHECK(run({"demo", "--work", (dir.path / "w").string(), "--seed", "3"}) == 0);
  CHECK(std::filesystem::exists(dir.path / "w" / "dataset.jsonl"));

  // Unwritable work location: IO error reported, nonzero exit.
  std::ofstream(dir.path / "blocker") << "file";
  CHECK(run({"demo", "--work", (dir.path / "blocker" / "w").string()}) != 0);
}

TEST_CASE("full pipeline through the CLI with a fault-injected generator") {
  TempDir dir("clipipe");
  const auto work = dir.path;

  // Source images.
  std::filesystem::create_directories(work / "images");
  std::mt19937_64 rng(77);
  for (int i = 0; i < 2; ++i)
    core::save_image(testutil::random_image(rng, 8, 6),
                     (work / "images" / ("s" + std::to_string(i) + ".png")).string());

  // Pipeline config: deterministic clocks plus a flaky generator.
  const auto config = work / "config.json";
  std::ofstream(config) << R"({
    "deterministic_timestamps": true,
    "backends": {
      "flaky-gen": {"adapter": "mock-generator", "params": {"fail_calls": [2]}}
    }
  })";

  const auto triplets = (work / "triplets.jsonl").string();
  CHECK(run({"prepare", "--images", (work / "images").string(), "--estimator",
             "mock-estimator", "--captioner", "mock-captioner", "--out", triplets,
             "--config", config.string()}) == 0);

  const auto ckpt = (work / "ckpt.jsonl").string();
  CHECK(run({"train-gen", "--triplets", triplets, "--backend", "flaky-gen",
             "--config", config.string(), "--out", ckpt}) == 0);

  // 2 depths x 2 prompts x 1 sample = 4 items; call #2 fails -> exit 1, 3 records.
  const auto generated = (work / "generated.jsonl").string();
  CHECK(run({"generate", "--depths", triplets, "--backend", "flaky-gen",
             "--checkpoint", ckpt, "--samples", "1", "--seed", "9", "--out", generated,
             "--config", config.string()}) == 1);
  {
    size_t gen_records = 0;
    for (const auto& rec : core::manifest_read(generated))
      gen_records += rec.kind == core::RecordKind::generated_image;
    CHECK(gen_records == 3);
  }

  // Rerun: the three finished records are skipped before any sampling, so
  // the single remaining item lands on call 0 and succeeds.
  CHECK(run({"generate", "--depths", triplets, "--backend", "flaky-gen",
             "--checkpoint", ckpt, "--samples", "1", "--seed", "9", "--out", generated,
             "--config", config.string()}) == 0);

  const auto unc = (work / "unc.jsonl").string();
  CHECK(run({"filter", "--images", generated, "--estimator", "mock-estimator",
             "--threshold", "0.15", "--out", unc, "--config", config.string()}) == 0);

  const auto dataset = (work / "dataset.jsonl").string();
  CHECK(run({"build", "--generated", generated, "--estimator", "mock-estimator",
             "--threshold", "0.15", "--dmin", "0.3", "--dmax", "20", "--mapping",
             "inverse_linear", "--split", "0.75", "--uncertainty", unc, "--out",
             dataset, "--config", config.string()}) == 0);

  const auto depth_ckpt = (work / "depth_ckpt.jsonl").string();
  CHECK(run({"train-depth", "--dataset", dataset, "--backend", "mock-depth-model",
             "--config", config.string(), "--out", depth_ckpt}) == 0);

  const auto eval_dir = (work / "eval").string();
  CHECK(run({"eval", "--backend", "mock-depth-model", "--checkpoint", depth_ckpt,
             "--testset", dataset, "--out", eval_dir, "--config", config.string()}) == 0);
  CHECK(std::filesystem::exists(work / "eval" / "aggregate.json"));

  const auto report_dir = (work / "report").string();
  CHECK(run({"report", "--results", eval_dir, "--out", report_dir}) == 0);
  CHECK(std::filesystem::exists(work / "report" / "report.csv"));

  CHECK(run({"validate", "--manifest", dataset}) == 0);

  CHECK(run({"stats", "--dataset", dataset, "--out",
             (work / "stats.json").string()}) == 0);
  CHECK(std::filesystem::exists(work / "stats.json"));
}

TEST_CASE("synth and enhance round trip through files") {
  TempDir dir("cliphys");
  std::mt19937_64 rng(31);

  const auto scene = testutil::random_image(rng, 12, 10);
  const auto scene_path = (dir.path / "scene.png").string();
  core::save_image(scene, scene_path, 16);

  auto depth = core::make_metric_depth(12, 10, 0.0, 30.0);
  depth.data = testutil::smooth_field(rng, 12, 10, 0.5, 9.0);
  const auto depth_path = (dir.path / "depth.png").string();
  core::encode_depth(depth, depth_path);

  const auto wet_path = (dir.path / "wet.png").string();
  CHECK(run({"synth", "--image", scene_path, "--depth", depth_path, "--water",
             "oceanic-III", "--out", wet_path}) == 0);
  CHECK(std::filesystem::exists(wet_path));

  const auto dry_path = (dir.path / "dry.png").string();
  CHECK(run({"enhance", "--image", wet_path, "--depth", depth_path, "--bins", "8",
             "--percentile", "0.2", "--out", dry_path}) == 0);
  CHECK(std::filesystem::exists(dry_path));

  CHECK(run({"synth", "--image", scene_path, "--depth", depth_path, "--water",
             "lava", "--out", wet_path}) == 2);

  // Presets can also come from a water_types.json file.
  CHECK(run({"synth", "--image", scene_path, "--depth", depth_path, "--water",
             "coastal-5C", "--water-file",
             std::string(ATLANTIS_REPO_DATA_DIR) + "/water_types.json", "--out",
             wet_path}) == 0);
}

TEST_CASE("pipeline config parsing errors exit 2") {
  TempDir dir("clicfg");
  const auto bad = dir.path / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run({"prepare", "--images", dir.path.string(), "--out",
             (dir.path / "m.jsonl").string(), "--config", bad.string()}) == 2);
}

TEST_CASE("eval over precomputed prediction directories") {
  TempDir dir("clipred");
  std::filesystem::create_directories(dir.path / "pred");
  std::filesystem::create_directories(dir.path / "gt");
  std::mt19937_64 rng(41);
  for (int i = 0; i < 3; ++i) {
    const auto gt = testutil::random_metric_depth(rng, 4, 4, 0.5, 15.0);
    auto pred = gt;
    pred.cap_m = 20.0;  // headroom for the scaled values
    for (auto& v : pred.data) v *= 1.1;  // 10% high: inside delta1
    const std::string name = "scene" + std::to_string(i) + ".png";
    core::encode_depth(gt, (dir.path / "gt" / name).string());
    core::encode_depth(pred, (dir.path / "pred" / name).string());
  }
  const auto out = (dir.path / "out").string();
  CHECK(run({"eval", "--pred", (dir.path / "pred").string(), "--gt",
             (dir.path / "gt").string(), "--out", out}) == 0);

  std::ifstream agg(dir.path / "out" / "aggregate.json");
  REQUIRE(agg.good());
  nlohmann::json j;
  agg >> j;
  CHECK(j["images"] == 3);
  CHECK(j["metrics"]["delta1"].get<double>() == 1.0);
  CHECK(j["metrics"]["a_rel"].get<double>() == doctest::Approx(0.1).epsilon(1e-3));

  // Masks shrink the valid set per image.
  std::filesystem::create_directories(dir.path / "mask");
  for (int i = 0; i < 3; ++i) {
    uncertainty::ValidityMask mask;
    mask.width = 4;
    mask.height = 4;
    mask.data.assign(16, 0);
    mask.data[0] = 1;
    const std::string name = "scene" + std::to_string(i) + ".png";
    uncertainty::encode_mask(mask, (dir.path / "mask" / name).string());
  }
  const auto masked_out = (dir.path / "masked").string();
  CHECK(run({"eval", "--pred", (dir.path / "pred").string(), "--gt",
             (dir.path / "gt").string(), "--mask", (dir.path / "mask").string(),
             "--out", masked_out}) == 0);
  std::ifstream masked_agg(dir.path / "masked" / "aggregate.json");
  nlohmann::json mj;
  masked_agg >> mj;
  CHECK(mj["metrics"]["n_valid"] == 3);  // one pixel per image
}

TEST_CASE("generate accepts a prompts file") {
  TempDir dir("cliprompts");
  std::filesystem::create_directories(dir.path / "images");
  std::mt19937_64 rng(43);
  core::save_image(testutil::random_image(rng, 4, 4),
                   (dir.path / "images" / "a.png").string());

  const auto triplets = (dir.path / "t.jsonl").string();
  CHECK(run({"prepare", "--images", (dir.path / "images").string(), "--out", triplets}) ==
        0);
  const auto ckpt = (dir.path / "c.jsonl").string();
  CHECK(run({"train-gen", "--triplets", triplets, "--backend", "mock-generator",
             "--out", ckpt}) == 0);

  const auto prompts = dir.path / "prompts.txt";
  std::ofstream(prompts) << "a kelp forest\nsunken ruins\nreef at dusk\n";
  const auto generated = (dir.path / "g.jsonl").string();
  CHECK(run({"generate", "--depths", triplets, "--backend", "mock-generator",
             "--checkpoint", ckpt, "--samples", "2", "--prompts", prompts.string(),
             "--out", generated}) == 0);

  size_t records = 0;
  for (const auto& rec : core::manifest_read(generated))
    records += rec.kind == core::RecordKind::generated_image;
  CHECK(records == 6);  // 1 depth x 3 prompts x 2 samples
}
