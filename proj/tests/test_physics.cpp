#include <doctest.h>

#include <cmath>
#include <random>

#include "atlantis/core/error.hpp"
#include "atlantis/physics/curve_fit.hpp"
#include "atlantis/physics/physics.hpp"
#include "support/test_util.hpp"

using namespace atlantis;
using namespace atlantis::physics;
using testutil::TempDir;

namespace {

WaterProperties test_water(double bd, double bb, double binf) {
  WaterProperties w;
  w.beta_d = {bd, bd, bd};
  w.beta_b = {bb, bb, bb};
  w.b_inf = {binf, binf, binf};
  return w;
}

/// Scene with smooth per-channel content; channel means equalized so the
/// gray-world white balance is the identity on exact recoveries.
core::RgbImage smooth_scene(std::mt19937_64& rng, int w, int h) {
  auto img = core::make_image(w, h);
  for (int c = 0; c < 3; ++c) {
    const auto field = testutil::smooth_field(rng, w, h, 0.3, 0.6);
    for (size_t p = 0; p < img.pixel_count(); ++p) img.data[p * 3 + c] = field[p];
  }
  // Shift channel means to a common 0.45; the narrow field range keeps the
  // result inside [0,1] without clipping.
  std::array<double, 3> mean{};
  for (size_t p = 0; p < img.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) mean[c] += img.data[p * 3 + c];
  for (auto& m : mean) m /= static_cast<double>(img.pixel_count());
  for (size_t p = 0; p < img.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) img.data[p * 3 + c] += 0.45 - mean[c];
  return img;
}

core::MetricDepthMap smooth_depth(std::mt19937_64& rng, int w, int h, double lo,
                                  double hi) {
  auto map = core::make_metric_depth(w, h, lo, hi + 1.0);
  map.data = testutil::smooth_field(rng, w, h, lo, hi);
  return map;
}

}  // namespace

TEST_CASE("synthesize_underwater hand cases") {
  // z = 0: no water path, image passes through.
  auto scene = core::make_image(2, 2, 0.63);
  auto depth = core::make_metric_depth(2, 2, 0.0, 30.0);
  const auto clear = synthesize_underwater(scene, depth, test_water(0.5, 0.5, 0.2));
  CHECK(clear.data == scene.data);

  // Huge path length converges to the veiling light.
  for (auto& v : depth.data) v = 1e6;
  const auto veiled = synthesize_underwater(scene, depth, test_water(1.0, 1.0, 0.2));
  for (size_t p = 0; p < veiled.pixel_count(); ++p)
    CHECK(veiled.data[p * 3] == doctest::Approx(0.2).epsilon(1e-12));

  // J = 0.8, z = 2, beta = 0.5, b_inf = 0.2.
  scene = core::make_image(1, 1, 0.8);
  depth = core::make_metric_depth(1, 1, 2.0, 30.0);
  const auto mixed = synthesize_underwater(scene, depth, test_water(0.5, 0.5, 0.2));
  const double expected = 0.8 * std::exp(-1.0) + 0.2 * (1.0 - std::exp(-1.0));
  CHECK(mixed.data[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(mixed.data[0] == doctest::Approx(0.4207).epsilon(1e-4));

  auto mismatched = core::make_metric_depth(3, 1, 1.0, 30.0);
  CHECK_THROWS_WITH_AS(synthesize_underwater(scene, mismatched, test_water(0.5, 0.5, 0.2)),
                       doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("radiance decays monotonically toward the veiling light") {
  // Matched decay rates; with beta_d != beta_b the gap can be non-monotone.
  const auto water = test_water(0.7, 0.7, 0.3);
  const auto scene = core::make_image(1, 1, 0.9);
  double previous_gap = 1e9;
  for (double z = 0.0; z <= 30.0; z += 0.5) {
    auto depth = core::make_metric_depth(1, 1, z, 100.0);
    const auto out = synthesize_underwater(scene, depth, water);
    const double gap = std::abs(out.data[0] - water.b_inf[0]);
    CHECK(gap <= previous_gap + 1e-12);
    previous_gap = gap;
  }
}

TEST_CASE("levenberg_marquardt fits an exponential saturation curve") {
  CurveFitProblem problem;
  problem.lower = {0.0, 0.0};
  problem.upper = {1.0, 5.0};
  problem.model = [](double z, std::span<const double> t) {
    return t[0] * (1.0 - std::exp(-t[1] * z));
  };
  problem.gradient = [](double z, std::span<const double> t, std::span<double> g) {
    g[0] = 1.0 - std::exp(-t[1] * z);
    g[1] = t[0] * z * std::exp(-t[1] * z);
  };
  for (int i = 0; i <= 40; ++i) {
    const double z = 0.2 + i * 0.25;
    problem.x.push_back(z);
    problem.y.push_back(0.35 * (1.0 - std::exp(-0.8 * z)));
  }
  const auto result = levenberg_marquardt(problem, {0.9, 0.05});
  CHECK(result.theta[0] == doctest::Approx(0.35).epsilon(1e-6));
  CHECK(result.theta[1] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(result.sse < 1e-12);
}

TEST_CASE("estimate_backscatter recovers generating parameters") {
  std::mt19937_64 rng(161);
  // Black scene: the observed signal is pure backscatter.
  auto scene = core::make_image(24, 18, 0.0);
  auto depth = smooth_depth(rng, 24, 18, 0.4, 9.5);
  const auto water = test_water(0.6, 0.5, 0.2);
  const auto observed = synthesize_underwater(scene, depth, water);

  const auto fit = estimate_backscatter(observed, depth, 10, 0.25);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(fit.b_inf[c] - 0.2) < 1e-4);
    CHECK(std::abs(fit.beta_b[c] - 0.5) < 1e-3);
  }
  CHECK(fit.rms_residual < 1e-6);
}

TEST_CASE("estimate_backscatter residual is tiny on model-family data") {
  std::mt19937_64 rng(171);
  // Dark but nonzero scene floor: the residual term absorbs it.
  auto scene = core::make_image(20, 20, 0.0);
  for (size_t p = 0; p < scene.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) scene.data[p * 3 + c] = 0.05;
  auto depth = smooth_depth(rng, 20, 20, 0.5, 8.0);
  const auto water = test_water(0.7, 0.45, 0.25);
  const auto observed = synthesize_underwater(scene, depth, water);
  const auto fit = estimate_backscatter(observed, depth, 10, 0.3);
  CHECK(fit.rms_residual < 1e-6);
  CHECK(fit.n_points > 0);
}

TEST_CASE("estimate_backscatter degenerate and dark inputs") {
  auto scene = core::make_image(8, 8, 0.4);
  auto flat = core::make_metric_depth(8, 8, 3.0, 30.0);
  CHECK_THROWS_WITH_AS(estimate_backscatter(scene, flat), doctest::Contains("DegenerateDepth"),
                       Error);

  std::mt19937_64 rng(181);
  auto black = core::make_image(12, 12, 0.0);
  auto depth = smooth_depth(rng, 12, 12, 0.5, 7.0);
  const auto fit = estimate_backscatter(black, depth, 8, 0.3);
  for (int c = 0; c < 3; ++c) CHECK(fit.b_inf[c] < 1e-6);
  CHECK(fit.rms_residual < 1e-9);
}

TEST_CASE("local space average color fixed points") {
  // Constant image: illumination is f * v everywhere.
  const auto constant = core::make_image(6, 5, 0.37);
  const auto illum = local_space_average_color(constant, 0.5, 1e-7);
  for (double v : illum.data) CHECK(v == doctest::Approx(2.0 * 0.37).epsilon(1e-9));

  // p = 1: no spatial mixing at all.
  std::mt19937_64 rng(191);
  const auto random = testutil::random_image(rng, 5, 4);
  const auto direct = local_space_average_color(random, 1.0, 1e-7);
  for (size_t i = 0; i < random.data.size(); ++i)
    CHECK(direct.data[i] == doctest::Approx(2.0 * random.data[i]).epsilon(1e-12));
}

TEST_CASE("local space average color converges to the blend fixed point") {
  std::mt19937_64 rng(201);
  const auto image = testutil::random_image(rng, 32, 32);
  const double p = 0.5, eps = 1e-5;
  const auto illum = local_space_average_color(image, p, eps);

  // Verify the fixed-point residual from outside: a = E / f.
  const int w = image.width, h = image.height;
  double residual = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        int count = 0;
        const auto add = [&](int nx, int ny) {
          sum += illum.at(nx, ny, c) / 2.0;
          ++count;
        };
        if (x > 0) add(x - 1, y);
        if (x + 1 < w) add(x + 1, y);
        if (y > 0) add(x, y - 1);
        if (y + 1 < h) add(x, y + 1);
        const double blended = image.at(x, y, c) * p + (sum / count) * (1.0 - p);
        residual = std::max(residual, std::abs(blended - illum.at(x, y, c) / 2.0));
      }
    }
  }
  CHECK(residual < eps);
}

TEST_CASE("recover_scene round trip with exact parameters") {
  std::mt19937_64 rng(211);
  RecoverOptions opts;
  opts.mode = AttenuationMode::known_beta;
  for (int iter = 0; iter < 5; ++iter) {
    const auto scene = smooth_scene(rng, 24, 20);
    const auto depth = smooth_depth(rng, 24, 20, 0.3, 8.0);
    const auto water = test_water(0.35, 0.35, 0.2);
    const auto observed = synthesize_underwater(scene, depth, water);
    const auto fit = exact_fit_from_water(water);
    const auto recovered = recover_scene(observed, depth, fit, opts);

    double mae = 0.0;
    for (size_t i = 0; i < scene.data.size(); ++i)
      mae += std::abs(recovered.data[i] - scene.data[i]);
    mae /= static_cast<double>(scene.data.size());
    CHECK(mae <= 0.02);
  }
}

TEST_CASE("recover_scene at zero depth is the input up to white balance") {
  std::mt19937_64 rng(221);
  const auto scene = smooth_scene(rng, 10, 8);  // channel means equalized
  const auto depth = core::make_metric_depth(10, 8, 0.0, 30.0);
  const auto fit = exact_fit_from_water(test_water(0.5, 0.5, 0.2));
  RecoverOptions opts;
  opts.mode = AttenuationMode::known_beta;
  const auto recovered = recover_scene(scene, depth, fit, opts);
  for (size_t i = 0; i < scene.data.size(); ++i)
    CHECK(recovered.data[i] == doctest::Approx(scene.data[i]).epsilon(1e-9));
}

TEST_CASE("recover_scene clamps oversubtracted pixels to zero") {
  auto image = core::make_image(4, 4, 0.05);
  auto depth = core::make_metric_depth(4, 4, 10.0, 30.0);
  BackscatterFit fit;
  fit.b_inf = {0.9, 0.9, 0.9};
  fit.beta_b = {2.0, 2.0, 2.0};
  const auto recovered = recover_scene(image, depth, fit);
  for (double v : recovered.data) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("recover_scene output is always finite and in range") {
  std::mt19937_64 rng(231);
  for (const auto mode : {AttenuationMode::illumination_map,
                          AttenuationMode::constant_beta, AttenuationMode::known_beta}) {
    const auto image = testutil::random_image(rng, 9, 7);
    auto depth = testutil::random_metric_depth(rng, 9, 7, 0.0, 12.0);
    BackscatterFit fit;
    fit.b_inf = {0.2, 0.3, 0.4};
    fit.beta_b = {0.5, 0.4, 0.3};
    fit.beta_d_prime = {0.6, 0.5, 0.4};
    RecoverOptions opts;
    opts.mode = mode;
    const auto out = recover_scene(image, depth, fit, opts);
    for (double v : out.data) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("water presets") {
  const auto& presets = water_type_presets();
  CHECK(presets.size() == 10);
  for (const auto& preset : presets) {
    CHECK_NOTHROW(preset.properties.validate());
    // Blue-dominant water attenuates red hardest.
    if (preset.properties.b_inf[2] > preset.properties.b_inf[1]) {
      CHECK(preset.properties.beta_d[0] > preset.properties.beta_d[1]);
      CHECK(preset.properties.beta_d[1] > preset.properties.beta_d[2]);
    }
  }

  const auto& blue = water_preset("oceanic-I");
  const auto white = core::make_image(4, 4, 1.0);
  const auto depth = core::make_metric_depth(4, 4, 5.0, 30.0);
  const auto out = synthesize_underwater(white, depth, blue.properties);
  CHECK(out.data[2] > out.data[0]);  // blue channel above red

  CHECK_THROWS_AS(water_preset("swamp"), Error);
}

TEST_CASE("shipped water_types.json matches the builtin presets") {
  const auto from_file = water_presets_from_json(
      std::string(ATLANTIS_REPO_DATA_DIR) + "/water_types.json");
  const auto& builtin = water_type_presets();
  REQUIRE(from_file.size() == builtin.size());
  for (size_t i = 0; i < builtin.size(); ++i) {
    CHECK(from_file[i].name == builtin[i].name);
    CHECK(from_file[i].properties.beta_d == builtin[i].properties.beta_d);
    CHECK(from_file[i].properties.beta_b == builtin[i].properties.beta_b);
    CHECK(from_file[i].properties.b_inf == builtin[i].properties.b_inf);
  }
}
