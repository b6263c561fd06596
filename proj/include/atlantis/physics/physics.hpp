#pragma once

#include <array>
#include <string>
#include <vector>

#include "atlantis/core/depth.hpp"
#include "atlantis/core/image.hpp"

namespace atlantis::physics {

/// Per-channel (R, G, B) water optics: direct-signal attenuation, backscatter
/// growth rate, and veiling light.
struct WaterProperties {
  std::array<double, 3> beta_d{};  // 1/m
  std::array<double, 3> beta_b{};  // 1/m
  std::array<double, 3> b_inf{};   // [0,1]

  void validate() const;
};

struct WaterPreset {
  std::string name;
  WaterProperties properties;
};

/// Ten named presets spanning clear blue to turbid green water. The
/// coefficients are representative, not measured.
const std::vector<WaterPreset>& water_type_presets();
const WaterPreset& water_preset(const std::string& name);

/// Reads presets from a water_types.json file (same schema the repo ships
/// under data/).
std::vector<WaterPreset> water_presets_from_json(const std::string& path);
void write_water_presets_json(const std::vector<WaterPreset>& presets,
                              const std::string& path);

/// I_c = J_c exp(-beta_d,c z) + b_inf,c (1 - exp(-beta_b,c z)), clamped to [0,1].
core::RgbImage synthesize_underwater(const core::RgbImage& scene,
                                     const core::MetricDepthMap& depth,
                                     const WaterProperties& water);

/// Backscatter curve B(z) = b_inf (1 - e^{-beta_b z}) + j_prime e^{-beta_d' z}
/// fitted per channel to the darkest pixels of equal-width depth bins.
struct BackscatterFit {
  std::array<double, 3> b_inf{};
  std::array<double, 3> beta_b{};
  std::array<double, 3> j_prime{};
  std::array<double, 3> beta_d_prime{};
  double rms_residual = 0.0;
  std::size_t n_points = 0;

  double backscatter_at(int channel, double z) const;
};

/// Exact-parameter fit for synthetic data: backscatter from the water
/// properties, zero residual term, beta_d_prime carrying the known
/// direct-signal attenuation.
BackscatterFit exact_fit_from_water(const WaterProperties& water);

BackscatterFit estimate_backscatter(const core::RgbImage& image,
                                    const core::MetricDepthMap& depth, int n_bins = 10,
                                    double percentile = 0.01);

/// Per-channel illumination field; values may exceed 1.
struct IlluminationMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // interleaved RGB

  double at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
};

/// Ebner-style local space average color: iterate 4-neighbor averaging
/// blended with the data term until the update falls below eps, then scale
/// by f = 2. Contraction for p > 0, so it always converges.
IlluminationMap local_space_average_color(const core::RgbImage& direct, double p = 0.5,
                                          double eps = 1e-5);

enum class AttenuationMode {
  illumination_map,  // beta_d(z) = -ln(E)/z from local space average color
  constant_beta,     // per-channel constant from regressing log D on z
  known_beta,        // use fit.beta_d_prime as the direct attenuation
};

struct RecoverOptions {
  AttenuationMode mode = AttenuationMode::illumination_map;
  double lsac_p = 0.5;
  double lsac_eps = 1e-5;
  bool white_balance = true;
};

/// Removes backscatter, undoes attenuation and applies gray-world white
/// balance. Output is clamped to [0,1].
core::RgbImage recover_scene(const core::RgbImage& image,
                             const core::MetricDepthMap& depth,
                             const BackscatterFit& fit, const RecoverOptions& opts = {});

}  // namespace atlantis::physics
