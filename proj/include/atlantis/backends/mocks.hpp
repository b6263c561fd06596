#pragma once

#include <atomic>
#include <optional>
#include <set>

#include "atlantis/backends/backends.hpp"
#include "atlantis/datasetbuild/conversion.hpp"

namespace atlantis::backends {

/// Luminance estimator: 0.299R + 0.587G + 0.114B, min-max normalized.
/// Pointwise, hence flip-equivariant by construction. Constant inputs map to
/// all zeros (farthest).
class MockDepthEstimator : public DepthEstimatorBackend {
public:
  explicit MockDepthEstimator(std::string id = "mock-estimator") : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  bool reentrant() const override { return true; }
  core::InverseRelativeDepthMap estimate(const core::RgbImage& image) override;

private:
  std::string id_;
};

/// Luminance estimator plus a left-to-right ramp, re-normalized only when the
/// sum leaves [0,1]. Deliberately not flip-equivariant for amplitude > 0 —
/// adversarial double for the uncertainty tests.
class BiasedMockDepthEstimator : public DepthEstimatorBackend {
public:
  BiasedMockDepthEstimator(double ramp_amplitude, std::string id = "mock-estimator-biased");
  const std::string& id() const override { return id_; }
  bool reentrant() const override { return true; }
  core::InverseRelativeDepthMap estimate(const core::RgbImage& image) override;

private:
  std::string id_;
  double ramp_amplitude_;
};

/// Captions every image as "a scene with mean luminance 0.XX".
class MockCaptioner : public CaptionBackend {
public:
  explicit MockCaptioner(std::string id = "mock-captioner") : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  bool reentrant() const override { return true; }
  std::string caption(const core::RgbImage& image) override;

private:
  std::string id_;
};

/// Copies the conditioning depth into the green channel and fills red/blue
/// with a pseudo-random texture keyed by (prompt hash, seed). A matching
/// estimator that reads green back recovers the conditioning depth exactly,
/// which is the end-to-end structure-consistency oracle.
class MockGenerator : public ConditionedGeneratorBackend {
public:
  explicit MockGenerator(std::string id = "mock-generator", int downscale = 1);
  const std::string& id() const override { return id_; }
  bool reentrant() const override { return true; }
  int downscale() const override { return downscale_; }
  CheckpointRef train(const core::Manifest& triplets, const TrainConfig& cfg) override;
  core::RgbImage sample(const core::InverseRelativeDepthMap& depth,
                        const std::string& prompt, const GenerationConfig& cfg,
                        std::uint64_t seed, const CheckpointRef& checkpoint) override;

  /// Fails the n-th sample call (0-based) for every n in the set.
  void fail_calls(std::set<std::uint64_t> calls) { fail_calls_ = std::move(calls); }

private:
  std::string id_;
  int downscale_;
  std::set<std::uint64_t> fail_calls_;
  std::atomic<std::uint64_t> call_count_{0};
};

/// Oracle depth model: reads the green channel as normalized inverse depth
/// and converts it to metric depth, quantized to the dataset's millimeter
/// storage precision so predictions match stored ground truth bit for bit.
class GreenChannelDepthModel : public DepthModelBackend {
public:
  explicit GreenChannelDepthModel(datasetbuild::ConversionConfig conversion = {},
                                  std::string id = "mock-depth-model");
  const std::string& id() const override { return id_; }
  bool reentrant() const override { return true; }
  CheckpointRef train(const core::Manifest& dataset, const TrainConfig& cfg) override;
  void load_checkpoint(const CheckpointRef& ref) override;
  core::MetricDepthMap predict(const core::RgbImage& image) override;

private:
  std::string id_;
  datasetbuild::ConversionConfig conversion_;
  std::optional<CheckpointRef> checkpoint_;
};

}  // namespace atlantis::backends
