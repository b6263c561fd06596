#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atlantis/core/error.hpp"
#include "atlantis/physics/curve_fit.hpp"
#include "atlantis/physics/physics.hpp"

namespace atlantis::physics {

namespace {

struct ChannelSamples {
  std::vector<double> z;
  std::vector<double> intensity;
};

// Darkest `percentile` fraction per equal-width depth bin, per channel.
std::array<ChannelSamples, 3> collect_dark_samples(const core::RgbImage& image,
                                                   const core::MetricDepthMap& depth,
                                                   int n_bins, double percentile) {
  double z_min = std::numeric_limits<double>::infinity();
  double z_max = -std::numeric_limits<double>::infinity();
  for (double z : depth.data) {
    z_min = std::min(z_min, z);
    z_max = std::max(z_max, z);
  }
  if (!(z_max - z_min > 1e-9))
    fail(Errc::degenerate_depth, "depth range is degenerate; cannot bin");

  std::vector<std::vector<size_t>> bins(static_cast<size_t>(n_bins));
  const double bin_width = (z_max - z_min) / n_bins;
  for (size_t p = 0; p < depth.data.size(); ++p) {
    int b = static_cast<int>((depth.data[p] - z_min) / bin_width);
    b = std::clamp(b, 0, n_bins - 1);
    bins[static_cast<size_t>(b)].push_back(p);
  }
  size_t occupied = 0;
  for (const auto& bin : bins) occupied += !bin.empty();
  if (occupied < 2)
    fail(Errc::degenerate_depth, "all depth values fall into a single bin");

  std::array<ChannelSamples, 3> samples;
  for (auto& bin : bins) {
    if (bin.empty()) continue;
    const size_t keep = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(percentile * static_cast<double>(bin.size()))));
    for (int c = 0; c < 3; ++c) {
      std::vector<size_t> order = bin;
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep - 1),
                       order.end(), [&](size_t a, size_t b) {
                         return image.data[a * 3 + c] < image.data[b * 3 + c];
                       });
      for (size_t k = 0; k < keep; ++k) {
        samples[c].z.push_back(depth.data[order[k]]);
        samples[c].intensity.push_back(image.data[order[k] * 3 + c]);
      }
    }
  }
  return samples;
}

CurveFitResult fit_channel(const ChannelSamples& samples) {
  // theta = [b_inf, beta_b, j_prime, beta_d_prime]
  CurveFitProblem problem;
  problem.x = samples.z;
  problem.y = samples.intensity;
  problem.lower = {0.0, 0.0, 0.0, 0.0};
  problem.upper = {1.0, 5.0, 1.0, 5.0};
  problem.model = [](double z, std::span<const double> t) {
    return t[0] * (1.0 - std::exp(-t[1] * z)) + t[2] * std::exp(-t[3] * z);
  };
  problem.gradient = [](double z, std::span<const double> t, std::span<double> g) {
    const double eb = std::exp(-t[1] * z);
    const double ed = std::exp(-t[3] * z);
    g[0] = 1.0 - eb;
    g[1] = t[0] * z * eb;
    g[2] = ed;
    g[3] = -t[2] * z * ed;
  };

  const double intensity_max =
      *std::max_element(samples.intensity.begin(), samples.intensity.end());

  // Deterministic multi-start over a log-spaced beta grid; the objective is
  // nonconvex in the rate parameters.
  CurveFitResult best;
  best.sse = std::numeric_limits<double>::infinity();
  constexpr int kStarts = 8;
  for (int k = 0; k < kStarts; ++k) {
    const double beta0 = 0.03 * std::pow(4.0 / 0.03, k / double(kStarts - 1));
    std::vector<double> theta0 = {std::clamp(intensity_max, 0.0, 1.0), beta0, 0.02, beta0};
    const auto result = levenberg_marquardt(problem, std::move(theta0));
    if (result.sse < best.sse) best = result;
  }
  if (!std::isfinite(best.sse)) fail(Errc::fit_failure, "no start converged");
  return best;
}

}  // namespace

BackscatterFit estimate_backscatter(const core::RgbImage& image,
                                    const core::MetricDepthMap& depth, int n_bins,
                                    double percentile) {
  if (n_bins < 2) fail(Errc::invalid_config, "n_bins must be >= 2");
  if (!(percentile > 0.0) || percentile > 0.5)
    fail(Errc::invalid_config, "percentile must lie in (0, 0.5]");
  if (image.width != depth.width || image.height != depth.height)
    fail(Errc::shape_mismatch, "image and depth differ in shape");

  const auto samples = collect_dark_samples(image, depth, n_bins, percentile);
  BackscatterFit fit;
  double sse = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto result = fit_channel(samples[static_cast<size_t>(c)]);
    fit.b_inf[c] = result.theta[0];
    fit.beta_b[c] = result.theta[1];
    fit.j_prime[c] = result.theta[2];
    fit.beta_d_prime[c] = result.theta[3];
    sse += result.sse;
    fit.n_points += samples[static_cast<size_t>(c)].z.size();
  }
  fit.rms_residual = fit.n_points ? std::sqrt(sse / static_cast<double>(fit.n_points)) : 0.0;
  return fit;
}

IlluminationMap local_space_average_color(const core::RgbImage& direct, double p,
                                          double eps) {
  if (!(p > 0.0) || p > 1.0) fail(Errc::invalid_config, "p must lie in (0,1]");
  const int w = direct.width, h = direct.height;
  IlluminationMap illum;
  illum.width = w;
  illum.height = h;

  std::vector<double> a = direct.data;
  std::vector<double> next(a.size());
  const int max_iterations = 100000;
  for (int iter = 0; iter < max_iterations; ++iter) {
    double max_change = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) {
          double sum = 0.0;
          int count = 0;
          const auto add = [&](int nx, int ny) {
            sum += a[(static_cast<size_t>(ny) * w + nx) * 3 + c];
            ++count;
          };
          if (x > 0) add(x - 1, y);
          if (x + 1 < w) add(x + 1, y);
          if (y > 0) add(x, y - 1);
          if (y + 1 < h) add(x, y + 1);
          const size_t idx = (static_cast<size_t>(y) * w + x) * 3 + c;
          const double neighbor_mean = count ? sum / count : a[idx];
          const double blended = direct.data[idx] * p + neighbor_mean * (1.0 - p);
          max_change = std::max(max_change, std::abs(blended - a[idx]));
          next[idx] = blended;
        }
      }
    }
    a.swap(next);
    if (max_change < eps) break;
  }

  constexpr double kIlluminationScale = 2.0;  // average reflectance assumption
  illum.data.resize(a.size());
  for (size_t i = 0; i < a.size(); ++i) illum.data[i] = kIlluminationScale * a[i];
  return illum;
}

core::RgbImage recover_scene(const core::RgbImage& image,
                             const core::MetricDepthMap& depth,
                             const BackscatterFit& fit, const RecoverOptions& opts) {
  if (image.width != depth.width || image.height != depth.height)
    fail(Errc::shape_mismatch, "image and depth differ in shape");

  // Direct signal: backscatter removed, clamped against overshoot.
  core::RgbImage direct = core::make_image(image.width, image.height);
  for (size_t p = 0; p < image.pixel_count(); ++p) {
    const double z = depth.data[p];
    for (int c = 0; c < 3; ++c)
      direct.data[p * 3 + c] =
          std::max(0.0, image.data[p * 3 + c] - fit.backscatter_at(c, z));
  }

  core::RgbImage recovered = core::make_image(image.width, image.height);
  switch (opts.mode) {
    case AttenuationMode::illumination_map: {
      const auto illum = local_space_average_color(direct, opts.lsac_p, opts.lsac_eps);
      for (size_t p = 0; p < direct.pixel_count(); ++p) {
        const double z = depth.data[p];
        for (int c = 0; c < 3; ++c) {
          const double d = direct.data[p * 3 + c];
          const double e = illum.data[p * 3 + c];
          // beta_d(z) = -ln(E)/z and J = D e^{beta_d z} collapse to D / E.
          recovered.data[p * 3 + c] = (z > 0.0 && e > 1e-12) ? d / e : d;
        }
      }
      break;
    }
    case AttenuationMode::constant_beta: {
      for (int c = 0; c < 3; ++c) {
        // Least squares of log D against z; slope gives -beta_d.
        double sz = 0.0, szz = 0.0, sl = 0.0, szl = 0.0;
        size_t n = 0;
        for (size_t p = 0; p < direct.pixel_count(); ++p) {
          const double d = direct.data[p * 3 + c];
          const double z = depth.data[p];
          if (d < 1e-9 || z <= 0.0) continue;
          const double l = std::log(d);
          sz += z;
          szz += z * z;
          sl += l;
          szl += z * l;
          ++n;
        }
        double beta = 0.0;
        if (n >= 2) {
          const double denom = static_cast<double>(n) * szz - sz * sz;
          if (std::abs(denom) > 1e-12)
            beta = std::max(0.0, -(static_cast<double>(n) * szl - sz * sl) / denom);
        }
        for (size_t p = 0; p < direct.pixel_count(); ++p) {
          const double z = depth.data[p];
          recovered.data[p * 3 + c] = direct.data[p * 3 + c] * std::exp(beta * z);
        }
      }
      break;
    }
    case AttenuationMode::known_beta: {
      for (size_t p = 0; p < direct.pixel_count(); ++p) {
        const double z = depth.data[p];
        for (int c = 0; c < 3; ++c)
          recovered.data[p * 3 + c] =
              direct.data[p * 3 + c] * std::exp(fit.beta_d_prime[c] * z);
      }
      break;
    }
  }

  if (opts.white_balance) {
    std::array<double, 3> mean{};
    for (size_t p = 0; p < recovered.pixel_count(); ++p)
      for (int c = 0; c < 3; ++c) mean[c] += recovered.data[p * 3 + c];
    for (double& m : mean) m /= static_cast<double>(recovered.pixel_count());
    const double gray = (mean[0] + mean[1] + mean[2]) / 3.0;
    for (int c = 0; c < 3; ++c) {
      const double scale = mean[c] > 1e-12 ? gray / mean[c] : 1.0;
      for (size_t p = 0; p < recovered.pixel_count(); ++p)
        recovered.data[p * 3 + c] *= scale;
    }
  }

  for (double& v : recovered.data) v = std::clamp(v, 0.0, 1.0);
  return recovered;
}

}  // namespace atlantis::physics
