#include <cmath>
#include <fstream>
#include <iostream>

#include "atlantis/backends/mocks.hpp"
#include "atlantis/cli/pipeline.hpp"
#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/datasetbuild/datasetbuild.hpp"
#include "atlantis/evaluate/harness.hpp"
#include "atlantis/genpipe/genpipe.hpp"
#include "atlantis/prep/prep.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"

namespace atlantis::cli {

namespace {

namespace fs = std::filesystem;

core::RgbImage demo_image(std::uint64_t seed, int width, int height) {
  core::RgbImage img = core::make_image(width, height);
  std::uint64_t state = seed;
  for (auto& v : img.data) v = core::u64_to_unit_double(core::splitmix64(state));
  return img;
}

}  // namespace

int run_demo_pipeline(const std::filesystem::path& work_dir, std::int64_t seed) {
  try {
    const auto now = core::fixed_clock();
    const fs::path sources = work_dir / "source_images";
    fs::create_directories(sources);

    // Two deterministic source images; writability is probed here so a
    // read-only work dir fails with a clear IO error.
    for (int i = 0; i < 2; ++i) {
      const auto img = demo_image(static_cast<std::uint64_t>(seed) * 1000003ull +
                                      static_cast<std::uint64_t>(i),
                                  16, 12);
      core::save_image(img, (sources / ("source_" + std::to_string(i) + ".png")).string());
    }

    backends::MockDepthEstimator estimator;
    backends::MockCaptioner captioner;

    prep::BuildOptions prep_opts;
    prep_opts.now = now;
    const auto prep_report = prep::build_triplets(
        sources, estimator, captioner, work_dir / "triplets.jsonl", prep_opts);
    if (prep_report.failed != 0 || prep_report.success != 2) {
      std::cerr << "demo: prepare stage expected 2 triplets, got "
                << prep_report.success << " with " << prep_report.failed
                << " failures\n";
      return 1;
    }

    core::Manifest triplets(work_dir / "triplets.jsonl");
    backends::MockGenerator generator;
    backends::TrainConfig train_cfg;
    train_cfg.backend_id = generator.id();
    core::Manifest checkpoints(work_dir / "checkpoints.jsonl");
    const auto checkpoint =
        genpipe::train_generator(triplets, train_cfg, generator, checkpoints, now);

    backends::GenerationConfig gen_cfg;
    gen_cfg.samples_per_condition = 2;
    gen_cfg.base_seed = seed;
    gen_cfg.validate();

    core::Manifest generated(work_dir / "generated.jsonl");
    genpipe::GenerateOptions gen_opts;
    gen_opts.now = now;
    const auto gen_report = genpipe::generate_dataset_samples(
        triplets, gen_cfg, generator, checkpoint, generated, gen_opts);
    if (gen_report.expected != 8 || gen_report.failed != 0 ||
        gen_report.generated + gen_report.skipped != 8) {
      std::cerr << "demo: generate stage expected 8 records, generated "
                << gen_report.generated << ", failed " << gen_report.failed << "\n";
      return 1;
    }

    core::Manifest uncertainty_manifest(work_dir / "uncertainty.jsonl");
    uncertainty::FilterOptions filter_opts;
    filter_opts.now = now;
    const auto filter_report = uncertainty::filter_images(
        generated, estimator, 0.15, uncertainty_manifest, filter_opts);
    if (filter_report.failed != 0 || filter_report.mean_valid_fraction != 1.0) {
      std::cerr << "demo: filter stage expected DU == 0 everywhere, mean valid "
                << filter_report.mean_valid_fraction << "\n";
      return 1;
    }

    datasetbuild::ConversionConfig conversion;
    core::Manifest dataset(work_dir / "dataset.jsonl");
    datasetbuild::AssembleOptions assemble_opts;
    assemble_opts.now = now;
    assemble_opts.threshold = 0.15;
    assemble_opts.split_ratio = 0.75;
    assemble_opts.uncertainty_manifest = &uncertainty_manifest;
    const auto dataset_report = datasetbuild::assemble_dataset(
        generated, estimator, conversion, dataset, assemble_opts);
    if (dataset_report.pairs != 8 || dataset_report.failed != 0) {
      std::cerr << "demo: build stage expected 8 pairs, got " << dataset_report.pairs
                << "\n";
      return 1;
    }

    backends::GreenChannelDepthModel oracle(conversion);
    backends::TrainConfig depth_train_cfg;
    depth_train_cfg.backend_id = oracle.id();
    oracle.load_checkpoint(oracle.train(dataset, depth_train_cfg));

    evaluate::HarnessOptions harness_opts;
    const auto eval_run = evaluate::evaluate_model(oracle, dataset, harness_opts);
    if (eval_run.per_image.size() != 8 || !eval_run.excluded.empty() ||
        !eval_run.failed.empty()) {
      std::cerr << "demo: eval stage expected 8 evaluated pairs\n";
      return 1;
    }
    const auto& agg = eval_run.aggregate;
    const double max_err = std::max({agg.rmse, agg.rmse_log, agg.a_rel, agg.s_rel,
                                     agg.log10, agg.si_log});
    if (agg.delta1 != 1.0 || max_err >= 1e-6) {
      std::cerr << "demo: oracle evaluation off target (delta1 " << agg.delta1
                << ", max error " << max_err << ")\n";
      return 1;
    }

    const fs::path eval_dir = work_dir / "eval";
    fs::create_directories(eval_dir);
    {
      std::ofstream out(eval_dir / "aggregate.json");
      out << nlohmann::json{{"name", oracle.id()}, {"metrics", agg.to_json()}}.dump(2)
          << "\n";
    }

    std::cout << "demo: ok (8 generated, 8 pairs, delta1 " << agg.delta1 << ")\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "demo: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "demo: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace atlantis::cli
