#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "atlantis/backends/mocks.hpp"
#include "atlantis/cli/pipeline.hpp"
#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"
#include "atlantis/datasetbuild/datasetbuild.hpp"
#include "atlantis/evaluate/harness.hpp"
#include "atlantis/evaluate/report.hpp"
#include "atlantis/genpipe/genpipe.hpp"
#include "atlantis/physics/physics.hpp"
#include "atlantis/prep/prep.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"

namespace atlantis::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

PipelineConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return PipelineConfig{};
  return PipelineConfig::load(config_path);
}

/// --checkpoint accepts either a checkpoint manifest (picks the newest record
/// for the backend) or a raw uri.
backends::CheckpointRef resolve_checkpoint(const std::string& ref,
                                           const std::string& backend_id) {
  backends::CheckpointRef checkpoint;
  checkpoint.backend_id = backend_id;
  if (fs::exists(ref) && fs::path(ref).extension() == ".jsonl") {
    const auto records = core::manifest_read(ref);
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
      if (it->kind != core::RecordKind::checkpoint) continue;
      if (it->params.value("backend_id", "") != backend_id) continue;
      checkpoint.uri = it->params.value("uri", "");
      checkpoint.config_hash = it->params.value("config_hash", "");
      return checkpoint;
    }
    fail(Errc::config_error, "no checkpoint for backend " + backend_id + " in " + ref);
  }
  checkpoint.uri = backends::resolve_checkpoint_uri(ref);
  return checkpoint;
}

std::vector<std::string> load_prompts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::config_error, "cannot open prompts file " + path);
  std::vector<std::string> prompts;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) prompts.push_back(line);
  if (prompts.empty()) fail(Errc::config_error, "prompts file is empty: " + path);
  return prompts;
}

void print_failures(const std::vector<std::pair<std::string, std::string>>& failures) {
  for (const auto& [item, reason] : failures)
    std::cerr << "  failed: " << item << ": " << reason << "\n";
}

uncertainty::UncertaintyOptions uncertainty_options(const std::string& variance,
                                                    const std::string& normalize) {
  uncertainty::UncertaintyOptions opts;
  if (variance == "population") {
    opts.variance = uncertainty::VarianceConvention::population;
  } else if (variance == "sample") {
    opts.variance = uncertainty::VarianceConvention::sample;
  } else {
    fail(Errc::config_error, "unknown variance convention: " + variance);
  }
  if (normalize == "on") {
    opts.normalize = true;
  } else if (normalize == "off") {
    opts.normalize = false;
  } else {
    fail(Errc::config_error, "normalize must be on or off");
  }
  return opts;
}

int cmd_prepare(const std::string& config_path, const std::string& images,
                const std::string& estimator_id, const std::string& captioner_id,
                const std::string& out, int jobs) {
  auto cfg = load_config(config_path);
  prep::BuildOptions opts;
  opts.jobs = jobs > 0 ? jobs : cfg.jobs;
  opts.now = cfg.clock();
  auto estimator = cfg.registry.estimator(estimator_id);
  auto captioner = cfg.registry.captioner(captioner_id);
  const auto report = prep::build_triplets(images, *estimator, *captioner, out, opts);
  std::cout << "prepared " << report.success << " triplets (" << report.skipped
            << " already present), " << report.failed << " failures\n";
  print_failures(report.failures);
  return report.failed == 0 ? kExitOk : kExitPartial;
}

int cmd_train_gen(const std::string& config_path, const std::string& triplets,
                  const std::string& backend_id, const std::string& out) {
  auto cfg = load_config(config_path);
  cfg.train.backend_id = backend_id;
  auto backend = cfg.registry.generator(backend_id);
  core::Manifest triplet_manifest(triplets, /*create=*/false);
  core::Manifest out_manifest(out);
  const auto ref =
      genpipe::train_generator(triplet_manifest, cfg.train, *backend, out_manifest,
                               cfg.clock());
  std::cout << "checkpoint " << ref.uri << "\n";
  return kExitOk;
}

int cmd_generate(const std::string& config_path, const std::string& depths,
                 const std::string& backend_id, const std::string& checkpoint_ref,
                 double guidance, int steps, int samples,
                 const std::string& prompts_file, std::int64_t seed,
                 const std::string& out, int jobs) {
  auto cfg = load_config(config_path);
  cfg.generation.guidance_scale = guidance;
  cfg.generation.num_steps = steps;
  cfg.generation.samples_per_condition = samples;
  cfg.generation.base_seed = seed;
  if (!prompts_file.empty()) cfg.generation.prompts = load_prompts_file(prompts_file);

  auto backend = cfg.registry.generator(backend_id);
  const auto checkpoint = resolve_checkpoint(checkpoint_ref, backend_id);
  core::Manifest depth_manifest(depths, /*create=*/false);
  core::Manifest out_manifest(out);
  genpipe::GenerateOptions opts;
  opts.jobs = jobs > 0 ? jobs : cfg.jobs;
  opts.now = cfg.clock();
  const auto report = genpipe::generate_dataset_samples(
      depth_manifest, cfg.generation, *backend, checkpoint, out_manifest, opts);
  std::cout << "generated " << report.generated << "/" << report.expected << " ("
            << report.skipped << " already present), " << report.failed
            << " failures\n";
  print_failures(report.failures);
  return report.failed == 0 ? kExitOk : kExitPartial;
}

int cmd_filter(const std::string& config_path, const std::string& images,
               const std::string& estimator_id, double threshold,
               const std::string& variance, const std::string& normalize,
               const std::string& out, int jobs) {
  auto cfg = load_config(config_path);
  auto estimator = cfg.registry.estimator(estimator_id);
  core::Manifest images_manifest(images, /*create=*/false);
  core::Manifest out_manifest(out);
  uncertainty::FilterOptions opts;
  opts.jobs = jobs > 0 ? jobs : cfg.jobs;
  opts.now = cfg.clock();
  opts.uncertainty = uncertainty_options(variance, normalize);
  const auto report =
      uncertainty::filter_images(images_manifest, *estimator, threshold, out_manifest, opts);
  std::cout << "filtered " << report.processed << " images, mean valid fraction "
            << report.mean_valid_fraction << ", " << report.failed << " failures\n";
  print_failures(report.failures);
  return report.failed == 0 ? kExitOk : kExitPartial;
}

int cmd_build(const std::string& config_path, const std::string& generated,
              const std::string& estimator_id, double threshold, double dmin,
              double dmax, const std::string& mapping, double split,
              const std::string& uncertainty_path, const std::string& out, int jobs) {
  auto cfg = load_config(config_path);
  cfg.conversion.d_min_m = dmin;
  cfg.conversion.d_max_m = dmax;
  cfg.conversion.mapping = datasetbuild::mapping_from_string(mapping);

  auto estimator = cfg.registry.estimator(estimator_id);
  core::Manifest gen_manifest(generated, /*create=*/false);
  core::Manifest out_manifest(out);
  std::optional<core::Manifest> uncertainty_manifest;
  datasetbuild::AssembleOptions opts;
  opts.jobs = jobs > 0 ? jobs : cfg.jobs;
  opts.now = cfg.clock();
  opts.threshold = threshold;
  opts.split_ratio = split;
  if (!uncertainty_path.empty()) {
    uncertainty_manifest.emplace(uncertainty_path, /*create=*/false);
    opts.uncertainty_manifest = &*uncertainty_manifest;
  }
  const auto report = datasetbuild::assemble_dataset(gen_manifest, *estimator,
                                                     cfg.conversion, out_manifest, opts);
  std::cout << "assembled " << report.pairs << " pairs";
  for (const auto& [split_name, count] : report.split_counts)
    std::cout << " " << split_name << "=" << count;
  std::cout << ", mean valid fraction " << report.mean_valid_fraction << ", "
            << report.failed << " failures\n";
  print_failures(report.failures);
  return report.failed == 0 ? kExitOk : kExitPartial;
}

int cmd_train_depth(const std::string& config_path, const std::string& dataset,
                    const std::string& backend_id, const std::string& out) {
  auto cfg = load_config(config_path);
  cfg.train.backend_id = backend_id;
  auto backend = cfg.registry.depth_model(backend_id);
  core::Manifest dataset_manifest(dataset, /*create=*/false);
  const auto validation = core::manifest_validate(dataset_manifest.path());
  if (!validation.consistent())
    fail(Errc::manifest_invalid, "dataset manifest has violations");
  const auto ref = backend->train(dataset_manifest, cfg.train);

  core::Manifest out_manifest(out);
  core::ManifestRecord rec;
  rec.id = core::sha256_hex("checkpoint|" + ref.uri);
  rec.kind = core::RecordKind::checkpoint;
  rec.params = {{"backend_id", ref.backend_id},
                {"uri", ref.uri},
                {"config_hash", ref.config_hash},
                {"dataset_manifest_digest",
                 core::manifest_file_digest(dataset_manifest.path())}};
  rec.created_at = cfg.clock()();
  if (!out_manifest.contains(rec.id)) out_manifest.append(rec);
  std::cout << "checkpoint " << ref.uri << "\n";
  return kExitOk;
}

void write_eval_outputs(const evaluate::EvalRun& run, const std::string& name,
                        const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "aggregate.json");
    out << json{{"name", name},
                {"metrics", run.aggregate.to_json()},
                {"images", run.per_image.size()},
                {"excluded", run.excluded}}
               .dump(2)
        << "\n";
  }
  std::ofstream per_image(out_dir / "per_image.csv");
  per_image << "id";
  for (const char* col : evaluate::kMetricColumns) per_image << "," << col;
  per_image << ",n_valid\n";
  for (const auto& item : run.per_image) {
    per_image << item.record_id;
    for (double v : evaluate::metric_values(item.metrics))
      per_image << "," << evaluate::format_metric(v);
    per_image << "," << item.metrics.n_valid << "\n";
  }
}

int cmd_eval_backend(const std::string& config_path, const std::string& backend_id,
                     const std::string& checkpoint_ref, const std::string& testset,
                     const std::string& out, bool median_scaling, bool pooled,
                     std::optional<double> gt_max) {
  auto cfg = load_config(config_path);
  cfg.eval.median_scaling = median_scaling || cfg.eval.median_scaling;
  if (gt_max) cfg.eval.gt_max_m = gt_max;
  auto backend = cfg.registry.depth_model(backend_id);
  const auto checkpoint = resolve_checkpoint(checkpoint_ref, backend_id);
  backend->load_checkpoint(checkpoint);
  core::Manifest testset_manifest(testset, /*create=*/false);
  evaluate::HarnessOptions opts;
  opts.eval = cfg.eval;
  opts.pooled = pooled;
  const auto run = evaluate::evaluate_model(*backend, testset_manifest, opts);
  write_eval_outputs(run, backend_id, out);

  core::Manifest eval_manifest(fs::path(out) / "eval.jsonl");
  core::ManifestRecord rec;
  rec.id = core::sha256_hex("eval_result|" + backend_id + "|" + checkpoint.uri + "|" +
                            core::manifest_file_digest(testset_manifest.path()));
  rec.kind = core::RecordKind::eval_result;
  rec.paths["aggregate"] = "aggregate.json";
  rec.paths["per_image"] = "per_image.csv";
  rec.sha256["aggregate"] = core::sha256_file_hex(fs::path(out) / "aggregate.json");
  rec.sha256["per_image"] = core::sha256_file_hex(fs::path(out) / "per_image.csv");
  rec.params = {{"backend_id", backend_id},
                {"checkpoint_uri", checkpoint.uri},
                {"testset_digest", core::manifest_file_digest(testset_manifest.path())},
                {"images", run.per_image.size()},
                {"pooled", pooled}};
  rec.created_at = cfg.clock()();
  if (!eval_manifest.contains(rec.id)) eval_manifest.append(rec);
  std::cout << "evaluated " << run.per_image.size() << " images, "
            << run.excluded.size() << " excluded, " << run.failed.size()
            << " failures\n";
  for (const auto& f : run.failed) std::cerr << "  failed: " << f << "\n";
  return run.failed.empty() ? kExitOk : kExitPartial;
}

int cmd_eval_precomputed(const std::string& pred_dir, const std::string& gt_dir,
                         const std::string& mask_dir, const std::string& out,
                         bool median_scaling, std::optional<double> gt_max) {
  evaluate::EvalConfig eval_cfg;
  eval_cfg.median_scaling = median_scaling;
  eval_cfg.gt_max_m = gt_max;

  std::vector<fs::path> pred_files;
  for (const auto& entry : fs::directory_iterator(pred_dir))
    if (entry.path().extension() == ".png") pred_files.push_back(entry.path());
  std::sort(pred_files.begin(), pred_files.end());
  if (pred_files.empty())
    fail(Errc::config_error, "no .png predictions in " + pred_dir);

  evaluate::EvalRun run;
  for (const auto& pred_path : pred_files) {
    const auto name = pred_path.filename();
    const auto gt_path = fs::path(gt_dir) / name;
    if (!fs::exists(gt_path)) {
      run.failed.push_back(name.string() + ": no matching ground truth");
      continue;
    }
    try {
      const auto pred = core::decode_metric_depth(pred_path.string());
      const auto gt = core::decode_metric_depth(gt_path.string());
      uncertainty::ValidityMask mask;
      const uncertainty::ValidityMask* mask_ptr = nullptr;
      if (!mask_dir.empty()) {
        const auto mask_path = fs::path(mask_dir) / name;
        if (fs::exists(mask_path)) {
          mask = uncertainty::decode_mask(mask_path.string());
          mask_ptr = &mask;
        }
      }
      run.per_image.push_back(
          {name.string(), evaluate::compute_metrics(pred, gt, mask_ptr, eval_cfg)});
    } catch (const Error& e) {
      if (e.code() == Errc::empty_valid_set)
        run.excluded.push_back(name.string());
      else
        run.failed.push_back(name.string() + ": " + e.what());
    }
  }
  run.aggregate = evaluate::aggregate_mean(run.per_image);
  write_eval_outputs(run, "predictions", out);
  std::cout << "evaluated " << run.per_image.size() << " images, "
            << run.excluded.size() << " excluded, " << run.failed.size()
            << " failures\n";
  return run.failed.empty() ? kExitOk : kExitPartial;
}

int cmd_report(const std::string& results_dir, const std::string& out) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(results_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<evaluate::NamedResult> results;
  for (const auto& file : files) {
    std::ifstream in(file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      fail(Errc::parse_failure, file.string() + ": " + e.what());
    }
    if (j.is_array()) {
      for (const auto& row : j)
        results.push_back({row.at("name").get<std::string>(),
                           evaluate::MetricsReport::from_json(row.at("metrics"))});
    } else {
      results.push_back({j.at("name").get<std::string>(),
                         evaluate::MetricsReport::from_json(j.at("metrics"))});
    }
  }
  evaluate::render_report(results, out);
  std::cout << "report written to " << out << "\n";
  return kExitOk;
}

int cmd_enhance(const std::string& image_path, const std::string& depth_path,
                int bins, double percentile, const std::string& attenuation,
                const std::string& out) {
  const auto image = core::load_image(image_path);
  const auto depth = core::decode_metric_depth(depth_path);
  const auto fit = physics::estimate_backscatter(image, depth, bins, percentile);
  physics::RecoverOptions opts;
  if (attenuation == "illumination") {
    opts.mode = physics::AttenuationMode::illumination_map;
  } else if (attenuation == "constant") {
    opts.mode = physics::AttenuationMode::constant_beta;
  } else if (attenuation == "known") {
    opts.mode = physics::AttenuationMode::known_beta;
  } else {
    fail(Errc::config_error, "unknown attenuation mode: " + attenuation);
  }
  const auto recovered = physics::recover_scene(image, depth, fit, opts);
  core::save_image(recovered, out);
  std::cout << "enhanced image written to " << out << " (fit rms residual "
            << fit.rms_residual << ")\n";
  return kExitOk;
}

int cmd_synth(const std::string& image_path, const std::string& depth_path,
              const std::string& water, const std::string& water_file,
              const std::string& out) {
  const auto image = core::load_image(image_path);
  const auto depth = core::decode_metric_depth(depth_path);
  physics::WaterProperties properties;
  if (water_file.empty()) {
    properties = physics::water_preset(water).properties;
  } else {
    bool found = false;
    for (const auto& preset : physics::water_presets_from_json(water_file)) {
      if (preset.name == water) {
        properties = preset.properties;
        found = true;
        break;
      }
    }
    if (!found) fail(Errc::config_error, "no preset " + water + " in " + water_file);
  }
  const auto synthesized = physics::synthesize_underwater(image, depth, properties);
  core::save_image(synthesized, out);
  std::cout << "synthesized image written to " << out << "\n";
  return kExitOk;
}

int cmd_stats(const std::string& dataset, const std::string& out) {
  core::Manifest manifest(dataset, /*create=*/false);
  const auto stats = datasetbuild::dataset_stats(manifest);
  std::cout << stats.table;
  if (!out.empty()) {
    std::ofstream file(out);
    if (!file) fail(Errc::io_failure, "cannot write " + out);
    file << stats.machine.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& manifest_path) {
  const auto report = core::manifest_validate(manifest_path);
  std::cout << "records:";
  for (const auto& [kind, count] : report.counts)
    std::cout << " " << core::to_string(kind) << "=" << count;
  std::cout << "\nviolations: " << report.violations.size() << "\n";
  for (const auto& v : report.violations)
    std::cerr << "  " << v.kind << " " << v.record_id << ": " << v.detail << "\n";
  return report.consistent() ? kExitOk : kExitPartial;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Manifest-driven pipeline for generating and evaluating underwater "
               "depth-estimation datasets"};
  app.require_subcommand(1);

  std::string config_path, images, estimator_id = "mock-estimator";
  std::string captioner_id = "mock-captioner", out, triplets, backend_id;
  std::string checkpoint_ref, depths, prompts_file, generated, uncertainty_path;
  std::string testset, pred_dir, gt_dir, mask_dir, results_dir, manifest_path;
  std::string image_path, depth_path, water, water_file, mapping = "inverse_linear";
  std::string variance = "population", normalize = "on", attenuation = "illumination";
  std::string work_dir = ".";
  double threshold = 0.15, dmin = 0.3, dmax = 20.0, split = 0.9;
  double guidance = 5.0, percentile = 0.01;
  int steps = 20, samples = 4, jobs = 0, bins = 10;
  std::int64_t seed = 0;
  bool median_scaling = false, pooled = false;
  std::optional<double> gt_max;

  auto* prepare = app.add_subcommand("prepare", "Build {image, depth, caption} triplets");
  prepare->add_option("--images", images, "Directory of source images")->required();
  prepare->add_option("--estimator", estimator_id, "Depth estimator backend id");
  prepare->add_option("--captioner", captioner_id, "Caption backend id");
  prepare->add_option("--out", out, "Output manifest")->required();
  prepare->add_option("--jobs", jobs, "Worker count");
  prepare->add_option("--config", config_path, "Pipeline config file");

  auto* train_gen = app.add_subcommand("train-gen", "Train the conditioned generator");
  train_gen->add_option("--triplets", triplets, "Triplet manifest")->required();
  train_gen->add_option("--backend", backend_id, "Generator backend id")->required();
  train_gen->add_option("--config", config_path, "Pipeline config file");
  train_gen->add_option("--out", out, "Checkpoint manifest")->required();

  auto* generate = app.add_subcommand("generate", "Generate conditioned images");
  generate->add_option("--depths", depths, "Conditioning depth manifest")->required();
  generate->add_option("--backend", backend_id, "Generator backend id")->required();
  generate->add_option("--checkpoint", checkpoint_ref, "Checkpoint manifest or uri")
      ->required();
  generate->add_option("--guidance", guidance, "Guidance scale");
  generate->add_option("--steps", steps, "Sampling steps");
  generate->add_option("--samples", samples, "Samples per prompt and depth");
  generate->add_option("--prompts", prompts_file, "Prompt file, one per line");
  generate->add_option("--seed", seed, "Base seed");
  generate->add_option("--out", out, "Output manifest")->required();
  generate->add_option("--jobs", jobs, "Worker count");
  generate->add_option("--config", config_path, "Pipeline config file");

  auto* filter = app.add_subcommand("filter", "Depth-uncertainty masks for images");
  filter->add_option("--images", images, "Image manifest")->required();
  filter->add_option("--estimator", estimator_id, "Depth estimator backend id");
  filter->add_option("--threshold", threshold, "DU validity threshold");
  filter->add_option("--variance", variance, "population|sample");
  filter->add_option("--normalize", normalize, "on|off");
  filter->add_option("--out", out, "Output manifest")->required();
  filter->add_option("--jobs", jobs, "Worker count");
  filter->add_option("--config", config_path, "Pipeline config file");

  auto* build = app.add_subcommand("build", "Assemble the metric-depth dataset");
  build->add_option("--generated", generated, "Generated image manifest")->required();
  build->add_option("--estimator", estimator_id, "Depth estimator backend id");
  build->add_option("--threshold", threshold, "DU validity threshold");
  build->add_option("--dmin", dmin, "Near depth bound, meters");
  build->add_option("--dmax", dmax, "Depth cap, meters");
  build->add_option("--mapping", mapping, "inverse_linear|linear");
  build->add_option("--split", split, "Train fraction");
  build->add_option("--uncertainty", uncertainty_path, "Filter-stage manifest to reuse");
  build->add_option("--out", out, "Output manifest")->required();
  build->add_option("--jobs", jobs, "Worker count");
  build->add_option("--config", config_path, "Pipeline config file");

  auto* train_depth = app.add_subcommand("train-depth", "Train a depth model backend");
  train_depth->add_option("--dataset", testset, "Dataset manifest")->required();
  train_depth->add_option("--backend", backend_id, "Depth model backend id")->required();
  train_depth->add_option("--config", config_path, "Pipeline config file");
  train_depth->add_option("--out", out, "Checkpoint manifest")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate depth predictions");
  eval->add_option("--backend", backend_id, "Depth model backend id");
  eval->add_option("--checkpoint", checkpoint_ref, "Checkpoint manifest or uri");
  eval->add_option("--testset", testset, "Test set manifest");
  eval->add_option("--pred", pred_dir, "Directory of predicted depth files");
  eval->add_option("--gt", gt_dir, "Directory of ground-truth depth files");
  eval->add_option("--mask", mask_dir, "Directory of validity masks");
  eval->add_option("--out", out, "Output directory")->required();
  eval->add_flag("--median-scaling", median_scaling, "Median-align predictions");
  eval->add_flag("--pooled", pooled, "Pool pixels across images for the aggregate");
  eval->add_option("--gt-max", gt_max, "Ground-truth cap filter, meters");
  eval->add_option("--config", config_path, "Pipeline config file");

  auto* report = app.add_subcommand("report", "Render metric tables and plots");
  report->add_option("--results", results_dir, "Directory of result JSON files")
      ->required();
  report->add_option("--out", out, "Output directory")->required();

  auto* enhance = app.add_subcommand("enhance", "Dewater an underwater image");
  enhance->add_option("--image", image_path, "Underwater image")->required();
  enhance->add_option("--depth", depth_path, "Metric depth file")->required();
  enhance->add_option("--bins", bins, "Depth bins for the backscatter fit");
  enhance->add_option("--percentile", percentile, "Darkest fraction per bin");
  enhance->add_option("--attenuation", attenuation, "illumination|constant|known");
  enhance->add_option("--out", out, "Output image")->required();

  auto* synth = app.add_subcommand("synth", "Apply the underwater formation model");
  synth->add_option("--image", image_path, "Scene radiance image")->required();
  synth->add_option("--depth", depth_path, "Metric depth file")->required();
  synth->add_option("--water", water, "Water preset name")->required();
  synth->add_option("--water-file", water_file, "Preset file (water_types.json schema)");
  synth->add_option("--out", out, "Output image")->required();

  auto* stats = app.add_subcommand("stats", "Summarize an assembled dataset");
  stats->add_option("--dataset", testset, "Dataset manifest")->required();
  stats->add_option("--out", out, "Optional JSON output file");

  auto* validate_cmd = app.add_subcommand("validate", "Validate a manifest");
  validate_cmd->add_option("--manifest", manifest_path, "Manifest file")->required();

  auto* demo = app.add_subcommand("demo", "End-to-end smoke run over mock backends");
  demo->add_option("--work", work_dir, "Writable work directory");
  demo->add_option("--seed", seed, "Demo seed");

  std::vector<std::string> argv_reversed(args.rbegin(), args.rend());
  try {
    app.parse(argv_reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (prepare->parsed())
      return cmd_prepare(config_path, images, estimator_id, captioner_id, out, jobs);
    if (train_gen->parsed())
      return cmd_train_gen(config_path, triplets, backend_id, out);
    if (generate->parsed())
      return cmd_generate(config_path, depths, backend_id, checkpoint_ref, guidance,
                          steps, samples, prompts_file, seed, out, jobs);
    if (filter->parsed())
      return cmd_filter(config_path, images, estimator_id, threshold, variance,
                        normalize, out, jobs);
    if (build->parsed())
      return cmd_build(config_path, generated, estimator_id, threshold, dmin, dmax,
                       mapping, split, uncertainty_path, out, jobs);
    if (train_depth->parsed())
      return cmd_train_depth(config_path, testset, backend_id, out);
    if (eval->parsed()) {
      if (!backend_id.empty() && !testset.empty())
        return cmd_eval_backend(config_path, backend_id, checkpoint_ref, testset, out,
                                median_scaling, pooled, gt_max);
      if (!pred_dir.empty() && !gt_dir.empty())
        return cmd_eval_precomputed(pred_dir, gt_dir, mask_dir, out, median_scaling,
                                    gt_max);
      std::cerr << "eval requires either --backend/--testset or --pred/--gt\n";
      return kExitUsage;
    }
    if (report->parsed()) return cmd_report(results_dir, out);
    if (enhance->parsed())
      return cmd_enhance(image_path, depth_path, bins, percentile, attenuation, out);
    if (synth->parsed())
      return cmd_synth(image_path, depth_path, water, water_file, out);
    if (stats->parsed()) return cmd_stats(testset, out);
    if (validate_cmd->parsed()) return cmd_validate(manifest_path);
    if (demo->parsed()) return run_demo_pipeline(work_dir, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace atlantis::cli
