#include "atlantis/backends/mocks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"

namespace atlantis::backends {

core::InverseRelativeDepthMap MockDepthEstimator::estimate(const core::RgbImage& image) {
  core::InverseRelativeDepthMap map;
  map.width = image.width;
  map.height = image.height;
  map.data = core::luminance(image);
  return core::minmax_normalized(map);
}

BiasedMockDepthEstimator::BiasedMockDepthEstimator(double ramp_amplitude, std::string id)
    : id_(std::move(id)), ramp_amplitude_(ramp_amplitude) {
  if (ramp_amplitude < 0.0) fail(Errc::invalid_config, "ramp_amplitude must be >= 0");
}

core::InverseRelativeDepthMap BiasedMockDepthEstimator::estimate(
    const core::RgbImage& image) {
  core::InverseRelativeDepthMap base;
  base.width = image.width;
  base.height = image.height;
  base.data = core::luminance(image);
  base = core::minmax_normalized(base);
  if (ramp_amplitude_ == 0.0 || base.width < 2) return base;

  double hi = 0.0;
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      base.at(x, y) += ramp_amplitude_ * x / (base.width - 1);
      hi = std::max(hi, base.at(x, y));
    }
  }
  if (hi > 1.0) {
    base.normalized = false;
    return core::minmax_normalized(base);
  }
  return base;  // still within [0,1]; keep the raw asymmetry
}

std::string MockCaptioner::caption(const core::RgbImage& image) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "a scene with mean luminance %.2f",
                core::mean_luminance(image));
  return buf;
}

MockGenerator::MockGenerator(std::string id, int downscale)
    : id_(std::move(id)), downscale_(downscale) {
  if (downscale < 1) fail(Errc::invalid_config, "downscale must be >= 1");
}

CheckpointRef MockGenerator::train(const core::Manifest& triplets,
                                   const TrainConfig& cfg) {
  const auto manifest_digest = core::manifest_file_digest(triplets.path());
  CheckpointRef ref;
  ref.backend_id = id_;
  ref.config_hash = cfg.config_hash();
  ref.uri = "mock://" + core::sha256_hex(id_ + "|" + manifest_digest + "|" + ref.config_hash);
  return ref;
}

core::RgbImage MockGenerator::sample(const core::InverseRelativeDepthMap& depth,
                                     const std::string& prompt,
                                     const GenerationConfig& cfg, std::uint64_t seed,
                                     const CheckpointRef& checkpoint) {
  if (checkpoint.backend_id != id_)
    fail(Errc::checkpoint_mismatch,
         "checkpoint belongs to " + checkpoint.backend_id + ", not " + id_);
  if (!depth.normalized)
    fail(Errc::backend_failure, "mock generator requires normalized conditioning depth");
  cfg.validate();

  const std::uint64_t call = call_count_.fetch_add(1);
  if (fail_calls_.count(call))
    fail(Errc::backend_failure, "injected fault at sample call " + std::to_string(call));

  const int out_w = std::max(1, depth.width / downscale_);
  const int out_h = std::max(1, depth.height / downscale_);
  const core::InverseRelativeDepthMap cond =
      (downscale_ == 1) ? depth : core::resample_nearest(depth, out_w, out_h);

  core::RgbImage img = core::make_image(cond.width, cond.height);
  std::uint64_t state = core::fnv1a64(prompt) ^ (seed * 0x9e3779b97f4a7c15ull);
  for (size_t p = 0; p < cond.data.size(); ++p) {
    img.data[p * 3 + 1] = cond.data[p];  // green carries the conditioning depth
    img.data[p * 3 + 0] = core::u64_to_unit_double(core::splitmix64(state));
    img.data[p * 3 + 2] = core::u64_to_unit_double(core::splitmix64(state));
  }
  return img;
}

GreenChannelDepthModel::GreenChannelDepthModel(datasetbuild::ConversionConfig conversion,
                                               std::string id)
    : id_(std::move(id)), conversion_(conversion) {}

CheckpointRef GreenChannelDepthModel::train(const core::Manifest& dataset,
                                            const TrainConfig& cfg) {
  const auto manifest_digest = core::manifest_file_digest(dataset.path());
  CheckpointRef ref;
  ref.backend_id = id_;
  ref.config_hash = cfg.config_hash();
  ref.uri = "mock://" + core::sha256_hex(id_ + "|" + manifest_digest + "|" + ref.config_hash);
  return ref;
}

void GreenChannelDepthModel::load_checkpoint(const CheckpointRef& ref) {
  if (ref.backend_id != id_)
    fail(Errc::checkpoint_mismatch,
         "checkpoint belongs to " + ref.backend_id + ", not " + id_);
  checkpoint_ = ref;
}

core::MetricDepthMap GreenChannelDepthModel::predict(const core::RgbImage& image) {
  core::MetricDepthMap out = core::make_metric_depth(
      image.width, image.height, conversion_.d_max_m, conversion_.d_max_m);
  for (size_t p = 0; p < out.data.size(); ++p) {
    const double d =
        datasetbuild::inverse_to_metric_value(image.data[p * 3 + 1], conversion_);
    // Millimeter quantization mirrors the depth codec so predictions agree
    // with stored ground truth bit for bit.
    out.data[p] = std::lround(std::clamp(d, conversion_.d_min_m, conversion_.d_max_m) *
                              1000.0) / 1000.0;
  }
  return out;
}

}  // namespace atlantis::backends
