#include <fstream>

#include "atlantis/cli/pipeline.hpp"
#include "atlantis/core/error.hpp"

namespace atlantis::cli {

namespace {
using nlohmann::json;
}

core::ClockFn PipelineConfig::clock() const {
  return deterministic_timestamps ? core::fixed_clock() : core::wall_clock();
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig cfg;
  try {
    if (j.contains("backends")) {
      for (const auto& [id, spec] : j["backends"].items()) {
        cfg.registry.configure(id, spec.at("adapter").get<std::string>(),
                               spec.value("params", json::object()));
      }
    }
    if (j.contains("generation")) {
      const auto& g = j["generation"];
      cfg.generation.guidance_scale = g.value("guidance_scale", cfg.generation.guidance_scale);
      cfg.generation.num_steps = g.value("num_steps", cfg.generation.num_steps);
      cfg.generation.samples_per_condition =
          g.value("samples_per_condition", cfg.generation.samples_per_condition);
      cfg.generation.base_seed = g.value("base_seed", cfg.generation.base_seed);
      if (g.contains("prompts"))
        cfg.generation.prompts = g["prompts"].get<std::vector<std::string>>();
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      cfg.train.backend_id = t.value("backend_id", cfg.train.backend_id);
      cfg.train.hyperparameters = t.value("hyperparameters", json::object());
    }
    if (j.contains("conversion")) {
      const auto& c = j["conversion"];
      cfg.conversion.d_min_m = c.value("d_min_m", cfg.conversion.d_min_m);
      cfg.conversion.d_max_m = c.value("d_max_m", cfg.conversion.d_max_m);
      if (c.contains("mapping"))
        cfg.conversion.mapping =
            datasetbuild::mapping_from_string(c["mapping"].get<std::string>());
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      cfg.eval.gt_min_m = e.value("gt_min_m", cfg.eval.gt_min_m);
      if (e.contains("gt_max_m") && !e["gt_max_m"].is_null())
        cfg.eval.gt_max_m = e["gt_max_m"].get<double>();
      cfg.eval.median_scaling = e.value("median_scaling", cfg.eval.median_scaling);
    }
    cfg.du_threshold = j.value("du_threshold", cfg.du_threshold);
    cfg.split_ratio = j.value("split_ratio", cfg.split_ratio);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.deterministic_timestamps =
        j.value("deterministic_timestamps", cfg.deterministic_timestamps);
  } catch (const json::exception& e) {
    fail(Errc::config_error, std::string("pipeline config: ") + e.what());
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::config_error, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(Errc::config_error, path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace atlantis::cli
