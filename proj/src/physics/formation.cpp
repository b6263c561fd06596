#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "atlantis/core/error.hpp"
#include "atlantis/physics/physics.hpp"

namespace atlantis::physics {

void WaterProperties::validate() const {
  for (int c = 0; c < 3; ++c) {
    if (!std::isfinite(beta_d[c]) || beta_d[c] < 0.0)
      fail(Errc::invalid_config, "beta_d must be finite and >= 0");
    if (!std::isfinite(beta_b[c]) || beta_b[c] < 0.0)
      fail(Errc::invalid_config, "beta_b must be finite and >= 0");
    if (!std::isfinite(b_inf[c]) || b_inf[c] < 0.0 || b_inf[c] > 1.0)
      fail(Errc::invalid_config, "b_inf must lie in [0,1]");
  }
}

const std::vector<WaterPreset>& water_type_presets() {
  static const std::vector<WaterPreset> presets = {
      {"oceanic-I", {{0.30, 0.05, 0.02}, {0.10, 0.03, 0.02}, {0.05, 0.25, 0.40}}},
      {"oceanic-IA", {{0.32, 0.07, 0.03}, {0.11, 0.04, 0.03}, {0.06, 0.27, 0.42}}},
      {"oceanic-IB", {{0.35, 0.09, 0.04}, {0.12, 0.05, 0.04}, {0.06, 0.28, 0.44}}},
      {"oceanic-II", {{0.40, 0.12, 0.07}, {0.14, 0.07, 0.06}, {0.07, 0.30, 0.45}}},
      {"oceanic-III", {{0.45, 0.18, 0.12}, {0.16, 0.10, 0.09}, {0.08, 0.32, 0.44}}},
      {"coastal-1C", {{0.45, 0.20, 0.22}, {0.18, 0.12, 0.13}, {0.10, 0.36, 0.35}}},
      {"coastal-3C", {{0.50, 0.26, 0.32}, {0.20, 0.15, 0.17}, {0.12, 0.38, 0.32}}},
      {"coastal-5C", {{0.55, 0.33, 0.45}, {0.22, 0.18, 0.22}, {0.14, 0.40, 0.28}}},
      {"coastal-7C", {{0.62, 0.42, 0.60}, {0.25, 0.22, 0.28}, {0.16, 0.42, 0.24}}},
      {"coastal-9C", {{0.70, 0.52, 0.80}, {0.28, 0.26, 0.35}, {0.18, 0.45, 0.20}}},
  };
  return presets;
}

const WaterPreset& water_preset(const std::string& name) {
  for (const auto& preset : water_type_presets())
    if (preset.name == name) return preset;
  fail(Errc::invalid_config, "unknown water preset: " + name);
}

std::vector<WaterPreset> water_presets_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_failure, path + ": " + e.what());
  }
  std::vector<WaterPreset> presets;
  try {
    for (const auto& entry : j.at("presets")) {
      WaterPreset preset;
      preset.name = entry.at("name").get<std::string>();
      preset.properties.beta_d = entry.at("beta_d").get<std::array<double, 3>>();
      preset.properties.beta_b = entry.at("beta_b").get<std::array<double, 3>>();
      preset.properties.b_inf = entry.at("b_inf").get<std::array<double, 3>>();
      preset.properties.validate();
      presets.push_back(std::move(preset));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_failure, path + ": " + e.what());
  }
  return presets;
}

void write_water_presets_json(const std::vector<WaterPreset>& presets,
                              const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& preset : presets)
    rows.push_back({{"name", preset.name},
                    {"beta_d", preset.properties.beta_d},
                    {"beta_b", preset.properties.beta_b},
                    {"b_inf", preset.properties.b_inf}});
  nlohmann::json j{
      {"note", "representative per-channel water optics; not measured values"},
      {"presets", rows}};
  std::ofstream out(path);
  if (!out) fail(Errc::io_failure, "cannot write " + path);
  out << j.dump(2) << "\n";
}

core::RgbImage synthesize_underwater(const core::RgbImage& scene,
                                     const core::MetricDepthMap& depth,
                                     const WaterProperties& water) {
  water.validate();
  if (scene.width != depth.width || scene.height != depth.height)
    fail(Errc::shape_mismatch, "scene and depth differ in shape");

  core::RgbImage out = core::make_image(scene.width, scene.height);
  for (size_t p = 0; p < scene.pixel_count(); ++p) {
    const double z = depth.data[p];
    for (int c = 0; c < 3; ++c) {
      const double direct = scene.data[p * 3 + c] * std::exp(-water.beta_d[c] * z);
      const double backscatter = water.b_inf[c] * (1.0 - std::exp(-water.beta_b[c] * z));
      out.data[p * 3 + c] = std::clamp(direct + backscatter, 0.0, 1.0);
    }
  }
  return out;
}

double BackscatterFit::backscatter_at(int channel, double z) const {
  return b_inf[channel] * (1.0 - std::exp(-beta_b[channel] * z)) +
         j_prime[channel] * std::exp(-beta_d_prime[channel] * z);
}

BackscatterFit exact_fit_from_water(const WaterProperties& water) {
  BackscatterFit fit;
  fit.b_inf = water.b_inf;
  fit.beta_b = water.beta_b;
  fit.j_prime = {0.0, 0.0, 0.0};
  fit.beta_d_prime = water.beta_d;
  return fit;
}

}  // namespace atlantis::physics
