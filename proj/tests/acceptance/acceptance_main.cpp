// Acceptance suite: one timed pass/fail line per criterion, nonzero exit if
// any fail. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atlantis/backends/mocks.hpp"
#include "atlantis/cli/pipeline.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/manifest.hpp"
#include "atlantis/datasetbuild/conversion.hpp"
#include "atlantis/evaluate/metrics.hpp"
#include "atlantis/evaluate/report.hpp"
#include "atlantis/genpipe/genpipe.hpp"
#include "atlantis/physics/physics.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"
#include "support/metrics_oracle.hpp"
#include "support/test_util.hpp"

using namespace atlantis;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  std::string name;
  std::function<std::string()> run;  // returns "" on pass, reason on fail
  double time_limit_s = 0.0;         // 0 = no limit
};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string digest_tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files)
    acc += fs::relative(f, root).generic_string() + ":" + core::sha256_file_hex(f) + "\n";
  return core::sha256_hex(acc);
}

core::MetricDepthMap map_of(const std::vector<double>& values, int w, int h) {
  core::MetricDepthMap map;
  map.width = w;
  map.height = h;
  map.cap_m = 1e9;
  map.data = values;
  return map;
}

// --- criterion implementations -------------------------------------------

std::string metrics_oracle_equivalence() {
  std::mt19937_64 rng(20240001);
  std::uniform_real_distribution<double> value(0.1, 20.0);
  std::uniform_int_distribution<int> size(1, 16);
  for (int iter = 0; iter < 1000; ++iter) {
    const int w = size(rng), h = size(rng);
    std::vector<double> pred(static_cast<size_t>(w) * h), gt(pred.size());
    for (auto& v : pred) v = value(rng);
    for (auto& v : gt) v = value(rng);

    const auto got = evaluate::compute_metrics(map_of(pred, w, h), map_of(gt, w, h));
    const auto want =
        oracle::compute(oracle::collect(pred, gt, nullptr, 1e-3, nullptr));

    const std::pair<double, double> checks[] = {
        {got.rmse, want.rmse},     {got.rmse_log, want.rmse_log},
        {got.a_rel, want.a_rel},   {got.s_rel, want.s_rel},
        {got.log10, want.log10},   {got.si_log, want.si_log},
        {got.delta1, want.delta1}, {got.delta2, want.delta2},
        {got.delta3, want.delta3}};
    for (const auto& [a, b] : checks)
      if (!close_rel(a, b, 1e-9))
        return "metric mismatch at iteration " + std::to_string(iter) + ": " +
               std::to_string(a) + " vs " + std::to_string(b);
  }
  return "";
}

std::string metrics_hand_cases() {
  const double tol = 1e-4;
  const auto one = evaluate::compute_metrics(map_of({2.0}, 1, 1), map_of({1.0}, 1, 1));
  if (std::abs(one.rmse - 1.0) > tol) return "rmse([2],[1])";
  if (std::abs(one.rmse_log - 0.6931) > tol) return "rmse_log([2],[1])";
  if (std::abs(one.a_rel - 1.0) > tol) return "a_rel([2],[1])";
  if (std::abs(one.s_rel - 1.0) > tol) return "s_rel([2],[1])";
  if (std::abs(one.log10 - 0.3010) > tol) return "log10([2],[1])";
  if (one.si_log != 0.0) return "si_log of a single pixel must be 0";
  if (one.delta1 != 0.0 || one.delta2 != 0.0 || one.delta3 != 0.0)
    return "deltas([2],[1]) must be 0 (ratio 2 > 1.25^3)";

  const auto two =
      evaluate::compute_metrics(map_of({2.0, 2.0}, 2, 1), map_of({1.0, 4.0}, 2, 1));
  if (std::abs(two.rmse - 1.5811) > tol) return "rmse([2,2],[1,4])";
  if (std::abs(two.si_log - 69.31) > 1e-2) return "si_log([2,2],[1,4])";
  if (std::abs(two.si_log - 69.314718) > tol) return "si_log([2,2],[1,4]) precise";
  if (std::abs(two.a_rel - 0.75) > tol) return "a_rel([2,2],[1,4])";
  return "";
}

std::string du_invariants() {
  std::mt19937_64 rng(20240002);
  backends::MockDepthEstimator equivariant;

  for (int iter = 0; iter < 100; ++iter) {
    const auto image = testutil::random_image(rng, 12, 9);
    const auto du = uncertainty::depth_uncertainty(image, equivariant);
    for (double v : du.data)
      if (v != 0.0) return "DU of the flip-equivariant mock must be exactly 0";
    if (uncertainty::validity_mask(du).valid_fraction() != 1.0)
      return "valid_fraction under zero DU must be 1.0";
  }

  backends::BiasedMockDepthEstimator biased(0.8);
  const auto constant = core::make_image(6, 4, 0.5);
  const auto du = uncertainty::depth_uncertainty(constant, biased);
  const auto mask = uncertainty::validity_mask(du, 0.15);
  for (int y = 0; y < du.height; ++y) {
    if (std::abs(du.at(0, y) - 0.16) > 1e-12) return "edge-column DU must be 0.16";
    if (std::abs(du.at(du.width - 1, y) - 0.16) > 1e-12)
      return "edge-column DU must be 0.16";
    if (mask.at(0, y) || mask.at(du.width - 1, y))
      return "edge columns must be invalid at threshold 0.15";
  }

  backends::BiasedMockDepthEstimator strong(2.4);
  for (int iter = 0; iter < 50; ++iter) {
    const auto image = testutil::random_image(rng, 10, 6);
    const auto bounded = uncertainty::depth_uncertainty(image, strong);
    for (double v : bounded.data)
      if (v < 0.0 || v > 0.25 + 1e-12) return "DU must lie in [0, 0.25]";
  }

  uncertainty::UncertaintyMap random_du;
  random_du.width = 10;
  random_du.height = 10;
  random_du.data.resize(100);
  std::uniform_real_distribution<double> du_value(0.0, 0.25);
  for (auto& v : random_du.data) v = du_value(rng);
  double threshold = 1e-6;
  for (int step = 0; step < 50; ++step) {
    const double next = threshold + du_value(rng) / 20.0;
    const auto low = uncertainty::validity_mask(random_du, threshold);
    const auto high = uncertainty::validity_mask(random_du, next);
    for (size_t i = 0; i < low.data.size(); ++i)
      if (low.data[i] && !high.data[i])
        return "raising the threshold invalidated a valid pixel";
    threshold = next;
  }
  return "";
}

core::Manifest write_depths(const fs::path& dir, int count, std::uint64_t seed) {
  core::Manifest manifest(dir / "depths.jsonl");
  fs::create_directories(dir / "artifacts");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    auto map = testutil::random_inverse_depth(rng, 1, 1, true);
    const std::string rel = "artifacts/d" + std::to_string(i) + ".png";
    core::encode_depth(map, (dir / rel).string());
    core::ManifestRecord rec;
    rec.id = core::sha256_hex("acc_depth|" + std::to_string(seed) + "|" + std::to_string(i));
    rec.kind = core::RecordKind::depth;
    rec.paths["png"] = rel;
    rec.paths["sidecar"] = rel + ".json";
    rec.sha256["png"] = core::sha256_file_hex(dir / rel);
    rec.sha256["sidecar"] = core::sha256_file_hex((dir / rel).string() + ".json");
    rec.created_at = "1970-01-01T00:00:00Z";
    manifest.append(rec);
  }
  return manifest;
}

std::string generation_cardinality() {
  std::mt19937_64 rng(20240003);
  backends::MockGenerator generator;
  genpipe::GenerateOptions opts;
  opts.now = core::fixed_clock();

  for (int iter = 0; iter < 20; ++iter) {
    testutil::TempDir dir("acc_card");
    const int n = 1 + static_cast<int>(rng() % 4);
    const int p = 1 + static_cast<int>(rng() % 3);
    const int s = 1 + static_cast<int>(rng() % 4);
    auto depths = write_depths(dir.path, n, rng());

    backends::TrainConfig train_cfg;
    train_cfg.backend_id = generator.id();
    const auto checkpoint = generator.train(depths, train_cfg);

    backends::GenerationConfig cfg;
    cfg.samples_per_condition = s;
    cfg.prompts.clear();
    for (int k = 0; k < p; ++k) cfg.prompts.push_back("prompt " + std::to_string(k));

    core::Manifest out(dir.path / "gen.jsonl");
    const auto report =
        genpipe::generate_dataset_samples(depths, cfg, generator, checkpoint, out, opts);
    const auto expect = static_cast<size_t>(n) * p * s;
    if (report.generated != expect || report.failed != 0)
      return "expected " + std::to_string(expect) + " records, generated " +
             std::to_string(report.generated);
  }

  // Paper-scale card: 400 depths x 2 prompts x 4 samples = 3,200 pairs.
  testutil::TempDir dir("acc_scale");
  auto depths = write_depths(dir.path, 400, 4242);
  backends::TrainConfig train_cfg;
  train_cfg.backend_id = generator.id();
  const auto checkpoint = generator.train(depths, train_cfg);
  backends::GenerationConfig cfg;  // defaults: 2 prompts, 4 samples
  core::Manifest out(dir.path / "gen.jsonl");
  const auto report =
      genpipe::generate_dataset_samples(depths, cfg, generator, checkpoint, out, opts);
  if (report.generated != 3200)
    return "paper-scale run produced " + std::to_string(report.generated) +
           " records, want 3200";

  // Resumption from a random prefix reproduces the manifest digest exactly.
  testutil::TempDir rdir("acc_resume");
  auto rdepths = write_depths(rdir.path, 3, 777);
  backends::GenerationConfig rcfg;
  rcfg.samples_per_condition = 2;  // 3 x 2 x 2 = 12 records
  const auto rckpt = generator.train(rdepths, train_cfg);
  core::Manifest ref(rdir.path / "ref.jsonl");
  genpipe::generate_dataset_samples(rdepths, rcfg, generator, rckpt, ref, opts);
  const auto want_digest = core::manifest_file_digest(rdir.path / "ref.jsonl");

  const size_t total_lines = ref.records().size();
  const size_t cut = 3 + rng() % (total_lines - 3);  // keep the depth records
  {
    std::ifstream in(rdir.path / "ref.jsonl");
    std::ofstream partial(rdir.path / "resume.jsonl");
    std::string line;
    for (size_t kept = 0; kept < cut && std::getline(in, line); ++kept)
      partial << line << "\n";
  }
  core::Manifest resumed(rdir.path / "resume.jsonl");
  genpipe::generate_dataset_samples(rdepths, rcfg, generator, rckpt, resumed, opts);
  if (core::manifest_file_digest(rdir.path / "resume.jsonl") != want_digest)
    return "resumed manifest digest differs from the uninterrupted run";
  return "";
}

std::string depth_conversion() {
  datasetbuild::ConversionConfig cfg;
  if (datasetbuild::inverse_to_metric_value(1.0, cfg) != cfg.d_min_m)
    return "n=1 must map exactly to d_min";
  if (datasetbuild::inverse_to_metric_value(0.0, cfg) != cfg.d_max_m)
    return "n=0 must map exactly to d_max";

  double previous = datasetbuild::inverse_to_metric_value(0.0, cfg);
  for (int k = 1; k <= 1000; ++k) {
    const double d = datasetbuild::inverse_to_metric_value(k / 1000.0, cfg);
    if (!(d < previous)) return "mapping must be strictly monotone decreasing";
    previous = d;
  }

  std::mt19937_64 rng(20240004);
  for (int iter = 0; iter < 500; ++iter) {
    auto map = testutil::random_inverse_depth(rng, 6, 5, true);
    map.data[0] = 0.0;
    map.data[1] = 1.0;  // pin the range so re-normalization inverts exactly
    const auto metric = datasetbuild::inverse_to_metric(map, cfg);
    for (double v : metric.data)
      if (!(v > 0.0) || v > 20.0) return "metric depth must respect the 20 m cap";

    core::InverseRelativeDepthMap back = core::make_inverse_depth(6, 5);
    for (size_t i = 0; i < metric.data.size(); ++i) back.data[i] = 1.0 / metric.data[i];
    const auto renorm = core::minmax_normalized(back);
    for (size_t i = 0; i < map.data.size(); ++i)
      if (std::abs(renorm.data[i] - map.data[i]) > 1e-9)
        return "round trip exceeded 1e-9 at iteration " + std::to_string(iter);
  }
  return "";
}

std::string physics_round_trip() {
  std::mt19937_64 rng(20240005);

  physics::RecoverOptions opts;
  opts.mode = physics::AttenuationMode::known_beta;
  for (int iter = 0; iter < 20; ++iter) {
    auto scene = core::make_image(64, 64);
    for (int c = 0; c < 3; ++c) {
      const auto field = testutil::smooth_field(rng, 64, 64, 0.3, 0.6);
      for (size_t p = 0; p < scene.pixel_count(); ++p) scene.data[p * 3 + c] = field[p];
    }
    std::array<double, 3> mean{};
    for (size_t p = 0; p < scene.pixel_count(); ++p)
      for (int c = 0; c < 3; ++c) mean[c] += scene.data[p * 3 + c];
    for (auto& m : mean) m /= static_cast<double>(scene.pixel_count());
    for (size_t p = 0; p < scene.pixel_count(); ++p)
      for (int c = 0; c < 3; ++c) scene.data[p * 3 + c] += 0.45 - mean[c];

    auto depth = core::make_metric_depth(64, 64, 1.0, 20.0);
    depth.data = testutil::smooth_field(rng, 64, 64, 0.3, 9.0);

    std::uniform_real_distribution<double> beta(0.2, 0.8);
    std::uniform_real_distribution<double> veil(0.05, 0.3);
    physics::WaterProperties water;
    for (int c = 0; c < 3; ++c) {
      const double b = beta(rng);
      water.beta_d[c] = b;  // matched rates keep the synthesis clamp-free
      water.beta_b[c] = b;
      water.b_inf[c] = veil(rng);
    }

    const auto observed = physics::synthesize_underwater(scene, depth, water);
    const auto fit = physics::exact_fit_from_water(water);
    const auto recovered = physics::recover_scene(observed, depth, fit, opts);

    double mae = 0.0;
    for (size_t i = 0; i < scene.data.size(); ++i)
      mae += std::abs(recovered.data[i] - scene.data[i]);
    mae /= static_cast<double>(scene.data.size());
    if (mae > 0.02)
      return "round-trip MAE " + std::to_string(mae) + " exceeds 2% of range";
  }

  // Backscatter estimation on noiseless model-family data.
  auto black = core::make_image(32, 24, 0.0);
  auto depth = core::make_metric_depth(32, 24, 1.0, 20.0);
  depth.data = testutil::smooth_field(rng, 32, 24, 0.4, 9.5);
  physics::WaterProperties water;
  water.beta_d = {0.6, 0.6, 0.6};
  water.beta_b = {0.5, 0.5, 0.5};
  water.b_inf = {0.2, 0.2, 0.2};
  const auto observed = physics::synthesize_underwater(black, depth, water);
  const auto fit = physics::estimate_backscatter(observed, depth, 10, 0.25);
  for (int c = 0; c < 3; ++c) {
    if (std::abs(fit.b_inf[c] - 0.2) > 1e-4)
      return "recovered b_inf off by more than 1e-4";
    if (std::abs(fit.beta_b[c] - 0.5) > 1e-3)
      return "recovered beta_b off by more than 1e-3";
  }
  return "";
}

std::string end_to_end_demo() {
  testutil::TempDir dir("acc_demo");
  const auto work_a = dir.path / "a";
  const auto work_b = dir.path / "b";
  if (cli::run_demo_pipeline(work_a, 31337) != 0) return "demo run exited nonzero";

  std::ifstream agg(work_a / "eval" / "aggregate.json");
  if (!agg) return "demo did not write eval/aggregate.json";
  nlohmann::json j;
  agg >> j;
  const auto metrics = evaluate::MetricsReport::from_json(j.at("metrics"));
  if (metrics.delta1 != 1.0) return "oracle delta1 must be 1.0";
  const double max_err = std::max({metrics.rmse, metrics.rmse_log, metrics.a_rel,
                                   metrics.s_rel, metrics.log10, metrics.si_log});
  if (max_err >= 1e-6) return "oracle error metrics must be below 1e-6";

  if (cli::run_demo_pipeline(work_b, 31337) != 0) return "second demo run failed";
  if (digest_tree(work_a) != digest_tree(work_b))
    return "same-seed demo runs are not digest-identical";
  return "";
}

std::string report_fidelity() {
  testutil::TempDir dir("acc_report");
  const auto load = [](const std::string& filename) {
    std::ifstream in(std::string(ATLANTIS_TEST_DATA_DIR) + "/" + filename);
    nlohmann::json j;
    in >> j;
    std::vector<evaluate::NamedResult> results;
    for (const auto& row : j)
      results.push_back({row.at("name").get<std::string>(),
                         evaluate::MetricsReport::from_json(row.at("metrics"))});
    return results;
  };

  const auto seathru = load("results_seathru_d3d5.json");
  const auto table1 = evaluate::render_report(seathru, dir.path / "seathru");
  std::ifstream csv(dir.path / "seathru" / "report.csv");
  std::string line;
  std::getline(csv, line);
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  if (lines.size() != 6) return "Sea-thru table must have 6 rows";
  if (lines[2] != "IDisc-Atlantis,1.371,0.354,1.630,14.279,0.109,34.654,0.553,0.850,0.955")
    return "IDisc-Atlantis row not reproduced bit-for-bit";
  if (table1.row_names[table1.best_row[0]] != "IDisc-Atlantis")
    return "IDisc-Atlantis must be best in RMSE on Sea-thru";

  const auto squid = load("results_squid.json");
  const auto table2 = evaluate::render_report(squid, dir.path / "squid");
  std::ifstream csv2(dir.path / "squid" / "report.csv");
  std::getline(csv2, line);
  lines.clear();
  while (std::getline(csv2, line)) lines.push_back(line);
  if (lines[5] != "NewCRFs-Atlantis,2.563,0.256,0.229,0.830,0.088,25.189,0.675,0.902,0.964")
    return "NewCRFs-Atlantis row not reproduced bit-for-bit";
  if (table2.row_names[table2.best_row[0]] != "NewCRFs-Atlantis")
    return "NewCRFs-Atlantis must be best in RMSE on SQUID";
  return "";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"metrics-oracle-equivalence", metrics_oracle_equivalence, 10.0},
      {"metrics-hand-cases", metrics_hand_cases, 0.0},
      {"du-invariants", du_invariants, 10.0},
      {"generation-cardinality", generation_cardinality, 30.0},
      {"depth-conversion", depth_conversion, 0.0},
      {"physics-round-trip", physics_round_trip, 60.0},
      {"end-to-end-demo", end_to_end_demo, 60.0},
      {"report-fidelity", report_fidelity, 0.0},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string reason;
    try {
      reason = criterion.run();
    } catch (const std::exception& e) {
      reason = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (reason.empty() && criterion.time_limit_s > 0.0 &&
        elapsed > criterion.time_limit_s)
      reason = "exceeded time limit of " + std::to_string(criterion.time_limit_s) + "s";
    if (reason.empty()) {
      std::printf("[PASS] %-28s (%.2fs)\n", criterion.name.c_str(), elapsed);
    } else {
      std::printf("[FAIL] %-28s (%.2fs): %s\n", criterion.name.c_str(), elapsed,
                  reason.c_str());
      ++failures;
    }
  }
  if (failures != 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
