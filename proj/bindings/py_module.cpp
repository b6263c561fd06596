#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "atlantis/backends/mocks.hpp"
#include "atlantis/cli/pipeline.hpp"
#include "atlantis/core/error.hpp"
#include "atlantis/datasetbuild/conversion.hpp"
#include "atlantis/evaluate/metrics.hpp"
#include "atlantis/genpipe/genpipe.hpp"
#include "atlantis/physics/physics.hpp"
#include "atlantis/uncertainty/uncertainty.hpp"

namespace py = pybind11;

namespace {

using namespace atlantis;

core::RgbImage image_from_array(const py::array_t<double>& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3)
    throw py::value_error("expected an HxWx3 array");
  core::RgbImage img = core::make_image(static_cast<int>(arr.shape(1)),
                                        static_cast<int>(arr.shape(0)));
  auto r = arr.unchecked<3>();
  for (py::ssize_t y = 0; y < arr.shape(0); ++y)
    for (py::ssize_t x = 0; x < arr.shape(1); ++x)
      for (py::ssize_t c = 0; c < 3; ++c)
        img.at(static_cast<int>(x), static_cast<int>(y), static_cast<int>(c)) = r(y, x, c);
  return img;
}

py::array_t<double> image_to_array(const core::RgbImage& img) {
  py::array_t<double> arr({img.height, img.width, 3});
  auto w = arr.mutable_unchecked<3>();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) w(y, x, c) = img.at(x, y, c);
  return arr;
}

template <typename Map>
Map map_from_array(const py::array_t<double>& arr) {
  if (arr.ndim() != 2) throw py::value_error("expected an HxW array");
  Map map;
  map.width = static_cast<int>(arr.shape(1));
  map.height = static_cast<int>(arr.shape(0));
  map.data.resize(map.pixel_count());
  auto r = arr.unchecked<2>();
  for (py::ssize_t y = 0; y < arr.shape(0); ++y)
    for (py::ssize_t x = 0; x < arr.shape(1); ++x)
      map.data[static_cast<size_t>(y) * map.width + static_cast<size_t>(x)] = r(y, x);
  return map;
}

template <typename Map>
py::array_t<double> map_to_array(const Map& map) {
  py::array_t<double> arr({map.height, map.width});
  auto w = arr.mutable_unchecked<2>();
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      w(y, x) = map.data[static_cast<size_t>(y) * map.width + static_cast<size_t>(x)];
  return arr;
}

physics::WaterProperties water_from_tuples(const std::array<double, 3>& beta_d,
                                           const std::array<double, 3>& beta_b,
                                           const std::array<double, 3>& b_inf) {
  physics::WaterProperties water;
  water.beta_d = beta_d;
  water.beta_b = beta_b;
  water.b_inf = b_inf;
  return water;
}

}  // namespace

PYBIND11_MODULE(_atlantis, m) {
  m.doc() = "Core operations of the underwater depth dataset pipeline";

  py::register_exception<atlantis::Error>(m, "PipelineError");

  m.def(
      "compute_metrics",
      [](const py::array_t<double>& pred, const py::array_t<double>& gt,
         py::object mask, double gt_min_m, py::object gt_max_m, bool median_scaling) {
        auto pred_map = map_from_array<core::MetricDepthMap>(pred);
        auto gt_map = map_from_array<core::MetricDepthMap>(gt);
        pred_map.cap_m = gt_map.cap_m = 1e9;  // caps are not enforced here
        evaluate::EvalConfig cfg;
        cfg.gt_min_m = gt_min_m;
        if (!gt_max_m.is_none()) cfg.gt_max_m = gt_max_m.cast<double>();
        cfg.median_scaling = median_scaling;
        uncertainty::ValidityMask mask_value;
        const uncertainty::ValidityMask* mask_ptr = nullptr;
        if (!mask.is_none()) {
          auto mask_arr = mask.cast<py::array_t<bool>>();
          if (mask_arr.ndim() != 2) throw py::value_error("mask must be HxW");
          mask_value.width = static_cast<int>(mask_arr.shape(1));
          mask_value.height = static_cast<int>(mask_arr.shape(0));
          mask_value.data.resize(mask_value.pixel_count());
          auto rm = mask_arr.unchecked<2>();
          for (py::ssize_t y = 0; y < mask_arr.shape(0); ++y)
            for (py::ssize_t x = 0; x < mask_arr.shape(1); ++x)
              mask_value.data[static_cast<size_t>(y) * mask_value.width +
                              static_cast<size_t>(x)] = rm(y, x) ? 1 : 0;
          mask_ptr = &mask_value;
        }
        const auto report = evaluate::compute_metrics(pred_map, gt_map, mask_ptr, cfg);
        py::dict out;
        out["rmse"] = report.rmse;
        out["rmse_log"] = report.rmse_log;
        out["a_rel"] = report.a_rel;
        out["s_rel"] = report.s_rel;
        out["log10"] = report.log10;
        out["si_log"] = report.si_log;
        out["delta1"] = report.delta1;
        out["delta2"] = report.delta2;
        out["delta3"] = report.delta3;
        out["n_valid"] = report.n_valid;
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("mask") = py::none(),
      py::arg("gt_min_m") = 1e-3, py::arg("gt_max_m") = py::none(),
      py::arg("median_scaling") = false,
      "Nine depth metrics over the valid-pixel set");

  m.def(
      "normalize_inverse_depth",
      [](const py::array_t<double>& depth) {
        auto map = map_from_array<core::InverseRelativeDepthMap>(depth);
        return map_to_array(uncertainty::normalize_inverse_depth(map));
      },
      py::arg("depth"), "Min-max normalize to [0,1]; constant maps become zeros");

  m.def(
      "depth_uncertainty",
      [](const py::array_t<double>& image, double ramp_amplitude) {
        const auto img = image_from_array(image);
        if (ramp_amplitude > 0.0) {
          backends::BiasedMockDepthEstimator estimator(ramp_amplitude);
          return map_to_array(uncertainty::depth_uncertainty(img, estimator));
        }
        backends::MockDepthEstimator estimator;
        return map_to_array(uncertainty::depth_uncertainty(img, estimator));
      },
      py::arg("image"), py::arg("ramp_amplitude") = 0.0,
      "Flip-consistency DU map under the mock estimator");

  m.def(
      "validity_mask",
      [](const py::array_t<double>& du, double threshold) {
        uncertainty::UncertaintyMap map;
        map.width = static_cast<int>(du.shape(1));
        map.height = static_cast<int>(du.shape(0));
        map.data.resize(map.pixel_count());
        auto r = du.unchecked<2>();
        for (py::ssize_t y = 0; y < du.shape(0); ++y)
          for (py::ssize_t x = 0; x < du.shape(1); ++x)
            map.data[static_cast<size_t>(y) * map.width + static_cast<size_t>(x)] =
                r(y, x);
        const auto mask = uncertainty::validity_mask(map, threshold);
        py::array_t<bool> arr({mask.height, mask.width});
        auto w = arr.mutable_unchecked<2>();
        for (int y = 0; y < mask.height; ++y)
          for (int x = 0; x < mask.width; ++x) w(y, x) = mask.at(x, y);
        return arr;
      },
      py::arg("du"), py::arg("threshold") = 0.15);

  m.def(
      "inverse_to_metric",
      [](const py::array_t<double>& normalized, double d_min_m, double d_max_m,
         const std::string& mapping) {
        auto map = map_from_array<core::InverseRelativeDepthMap>(normalized);
        map.normalized = true;
        datasetbuild::ConversionConfig cfg;
        cfg.d_min_m = d_min_m;
        cfg.d_max_m = d_max_m;
        cfg.mapping = datasetbuild::mapping_from_string(mapping);
        return map_to_array(datasetbuild::inverse_to_metric(map, cfg));
      },
      py::arg("normalized"), py::arg("d_min_m") = 0.3, py::arg("d_max_m") = 20.0,
      py::arg("mapping") = "inverse_linear");

  m.def(
      "synthesize_underwater",
      [](const py::array_t<double>& scene, const py::array_t<double>& depth,
         const std::array<double, 3>& beta_d, const std::array<double, 3>& beta_b,
         const std::array<double, 3>& b_inf) {
        const auto img = image_from_array(scene);
        auto depth_map = map_from_array<core::MetricDepthMap>(depth);
        depth_map.cap_m = 1e9;
        return image_to_array(physics::synthesize_underwater(
            img, depth_map, water_from_tuples(beta_d, beta_b, b_inf)));
      },
      py::arg("scene"), py::arg("depth"), py::arg("beta_d"), py::arg("beta_b"),
      py::arg("b_inf"));

  m.def(
      "estimate_backscatter",
      [](const py::array_t<double>& image, const py::array_t<double>& depth, int n_bins,
         double percentile) {
        const auto img = image_from_array(image);
        auto depth_map = map_from_array<core::MetricDepthMap>(depth);
        depth_map.cap_m = 1e9;
        const auto fit = physics::estimate_backscatter(img, depth_map, n_bins, percentile);
        py::dict out;
        out["b_inf"] = fit.b_inf;
        out["beta_b"] = fit.beta_b;
        out["j_prime"] = fit.j_prime;
        out["beta_d_prime"] = fit.beta_d_prime;
        out["rms_residual"] = fit.rms_residual;
        out["n_points"] = fit.n_points;
        return out;
      },
      py::arg("image"), py::arg("depth"), py::arg("n_bins") = 10,
      py::arg("percentile") = 0.01);

  m.def(
      "recover_scene",
      [](const py::array_t<double>& image, const py::array_t<double>& depth,
         const std::array<double, 3>& b_inf, const std::array<double, 3>& beta_b,
         const std::array<double, 3>& j_prime,
         const std::array<double, 3>& beta_d_prime, const std::string& mode,
         bool white_balance) {
        const auto img = image_from_array(image);
        auto depth_map = map_from_array<core::MetricDepthMap>(depth);
        depth_map.cap_m = 1e9;
        physics::BackscatterFit fit;
        fit.b_inf = b_inf;
        fit.beta_b = beta_b;
        fit.j_prime = j_prime;
        fit.beta_d_prime = beta_d_prime;
        physics::RecoverOptions opts;
        opts.white_balance = white_balance;
        if (mode == "illumination") {
          opts.mode = physics::AttenuationMode::illumination_map;
        } else if (mode == "constant") {
          opts.mode = physics::AttenuationMode::constant_beta;
        } else if (mode == "known") {
          opts.mode = physics::AttenuationMode::known_beta;
        } else {
          throw py::value_error("mode must be illumination, constant or known");
        }
        return image_to_array(physics::recover_scene(img, depth_map, fit, opts));
      },
      py::arg("image"), py::arg("depth"), py::arg("b_inf"), py::arg("beta_b"),
      py::arg("j_prime") = std::array<double, 3>{0, 0, 0},
      py::arg("beta_d_prime") = std::array<double, 3>{0, 0, 0},
      py::arg("mode") = "illumination", py::arg("white_balance") = true);

  m.def("water_type_presets", [] {
    py::list out;
    for (const auto& preset : physics::water_type_presets()) {
      py::dict entry;
      entry["name"] = preset.name;
      entry["beta_d"] = preset.properties.beta_d;
      entry["beta_b"] = preset.properties.beta_b;
      entry["b_inf"] = preset.properties.b_inf;
      out.append(entry);
    }
    return out;
  });

  m.def("seed_schedule", &genpipe::seed_schedule, py::arg("base_seed"),
        py::arg("depth_id"), py::arg("prompt"), py::arg("sample_index"),
        "Injective deterministic per-sample seed");

  m.def(
      "run_demo_pipeline",
      [](const std::string& work_dir, std::int64_t seed) {
        return cli::run_demo_pipeline(work_dir, seed);
      },
      py::arg("work_dir"), py::arg("seed") = 0,
      "End-to-end smoke over mock backends; returns the exit code");

  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli::run_cli(args); },
      py::arg("args"), "Invoke the pipeline CLI; returns the exit code");

#ifdef VERSION_INFO
#define ATLANTIS_STR_INNER(x) #x
#define ATLANTIS_STR(x) ATLANTIS_STR_INNER(x)
  m.attr("__version__") = ATLANTIS_STR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
