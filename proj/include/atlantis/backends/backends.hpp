#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "atlantis/core/depth.hpp"
#include "atlantis/core/image.hpp"
#include "atlantis/core/manifest.hpp"

namespace atlantis::backends {

struct CheckpointRef {
  std::string backend_id;
  std::string uri;          // opaque locator, e.g. mock://<digest>
  std::string config_hash;  // hex digest of the TrainConfig used
};

struct TrainConfig {
  std::string backend_id;
  nlohmann::json hyperparameters = nlohmann::json::object();
  // Only the conditioning branch of the generator is ever trainable; the
  // base generator stays frozen.
  static constexpr const char* kTrainableScope = "conditioning_branch_only";

  std::string config_hash() const;
};

struct GenerationConfig {
  double guidance_scale = 5.0;
  int num_steps = 20;
  int samples_per_condition = 4;
  std::int64_t base_seed = 0;
  std::vector<std::string> prompts = {"an underwater view of Atlantis",
                                      "a corner of lost Atlantis"};

  void validate() const;
  std::string config_hash() const;
};

/// Monocular inverse-relative-depth estimator. Implementations must be
/// deterministic and preserve input dimensions.
class DepthEstimatorBackend {
public:
  virtual ~DepthEstimatorBackend() = default;
  virtual const std::string& id() const = 0;
  virtual bool reentrant() const { return false; }
  virtual core::InverseRelativeDepthMap estimate(const core::RgbImage& image) = 0;
};

class CaptionBackend {
public:
  virtual ~CaptionBackend() = default;
  virtual const std::string& id() const = 0;
  virtual bool reentrant() const { return false; }
  virtual std::string caption(const core::RgbImage& image) = 0;
};

/// Depth-conditioned image generator with a trainable conditioning branch.
class ConditionedGeneratorBackend {
public:
  virtual ~ConditionedGeneratorBackend() = default;
  virtual const std::string& id() const = 0;
  virtual bool reentrant() const { return false; }
  /// Outputs are produced at 1/downscale of the conditioning resolution.
  virtual int downscale() const { return 1; }
  virtual CheckpointRef train(const core::Manifest& triplets, const TrainConfig& cfg) = 0;
  virtual core::RgbImage sample(const core::InverseRelativeDepthMap& depth,
                                const std::string& prompt,
                                const GenerationConfig& cfg,
                                std::uint64_t seed,
                                const CheckpointRef& checkpoint) = 0;
};

/// Trainable metric-depth network.
class DepthModelBackend {
public:
  virtual ~DepthModelBackend() = default;
  virtual const std::string& id() const = 0;
  virtual bool reentrant() const { return false; }
  virtual CheckpointRef train(const core::Manifest& dataset, const TrainConfig& cfg) = 0;
  virtual void load_checkpoint(const CheckpointRef& ref) = 0;
  virtual core::MetricDepthMap predict(const core::RgbImage& image) = 0;
};

/// Expands a checkpoint uri with ATLANTIS_BACKEND_DIR when the uri is a bare
/// relative path (mock:// and absolute uris pass through).
std::string resolve_checkpoint_uri(const std::string& uri);

/// Id-keyed backend instances, populated from the config's registry section
/// (adapter name + params per id). Mock adapters are always available.
class BackendRegistry {
public:
  BackendRegistry();

  void configure(const std::string& id, const std::string& adapter,
                 const nlohmann::json& params);

  std::shared_ptr<DepthEstimatorBackend> estimator(const std::string& id) const;
  std::shared_ptr<CaptionBackend> captioner(const std::string& id) const;
  std::shared_ptr<ConditionedGeneratorBackend> generator(const std::string& id) const;
  std::shared_ptr<DepthModelBackend> depth_model(const std::string& id) const;

private:
  std::pair<std::string, nlohmann::json> lookup(const std::string& id) const;

  std::map<std::string, std::pair<std::string, nlohmann::json>> configured_;
  mutable std::map<std::string, std::shared_ptr<DepthEstimatorBackend>> estimators_;
  mutable std::map<std::string, std::shared_ptr<CaptionBackend>> captioners_;
  mutable std::map<std::string, std::shared_ptr<ConditionedGeneratorBackend>> generators_;
  mutable std::map<std::string, std::shared_ptr<DepthModelBackend>> depth_models_;
};

}  // namespace atlantis::backends
