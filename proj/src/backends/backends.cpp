#include "atlantis/backends/backends.hpp"

#include <cstdlib>

#include "atlantis/backends/mocks.hpp"
#include "atlantis/core/error.hpp"
#include "atlantis/core/hash.hpp"

namespace atlantis::backends {

namespace {
using nlohmann::json;
}

std::string TrainConfig::config_hash() const {
  const json j{{"backend_id", backend_id},
               {"hyperparameters", hyperparameters},
               {"trainable_scope", kTrainableScope}};
  return core::sha256_hex(j.dump());
}

void GenerationConfig::validate() const {
  if (!(guidance_scale > 0.0)) fail(Errc::invalid_config, "guidance_scale must be > 0");
  if (num_steps < 1) fail(Errc::invalid_config, "num_steps must be >= 1");
  if (samples_per_condition < 1)
    fail(Errc::invalid_config, "samples_per_condition must be >= 1");
  if (prompts.empty()) fail(Errc::invalid_config, "prompts must be nonempty");
}

std::string GenerationConfig::config_hash() const {
  const json j{{"guidance_scale", guidance_scale},
               {"num_steps", num_steps},
               {"samples_per_condition", samples_per_condition},
               {"base_seed", base_seed},
               {"prompts", prompts}};
  return core::sha256_hex(j.dump());
}

std::string resolve_checkpoint_uri(const std::string& uri) {
  if (uri.find("://") != std::string::npos || uri.starts_with("/")) return uri;
  const char* dir = std::getenv("ATLANTIS_BACKEND_DIR");
  if (dir == nullptr || *dir == '\0') return uri;
  std::string prefix(dir);
  if (!prefix.ends_with('/')) prefix += '/';
  return prefix + uri;
}

BackendRegistry::BackendRegistry() {
  configure("mock-estimator", "mock-estimator", json::object());
  configure("mock-estimator-biased", "mock-estimator-biased", json::object());
  configure("mock-captioner", "mock-captioner", json::object());
  configure("mock-generator", "mock-generator", json::object());
  configure("mock-depth-model", "mock-depth-model", json::object());
}

void BackendRegistry::configure(const std::string& id, const std::string& adapter,
                                const nlohmann::json& params) {
  configured_[id] = {adapter, params};
  estimators_.erase(id);
  captioners_.erase(id);
  generators_.erase(id);
  depth_models_.erase(id);
}

std::pair<std::string, nlohmann::json> BackendRegistry::lookup(
    const std::string& id) const {
  auto it = configured_.find(id);
  if (it == configured_.end())
    fail(Errc::backend_failure, "unregistered backend id: " + id);
  return it->second;
}

std::shared_ptr<DepthEstimatorBackend> BackendRegistry::estimator(
    const std::string& id) const {
  if (auto it = estimators_.find(id); it != estimators_.end()) return it->second;
  const auto [adapter, params] = lookup(id);
  std::shared_ptr<DepthEstimatorBackend> backend;
  if (adapter == "mock-estimator") {
    backend = std::make_shared<MockDepthEstimator>(id);
  } else if (adapter == "mock-estimator-biased") {
    backend = std::make_shared<BiasedMockDepthEstimator>(
        params.value("ramp_amplitude", 0.8), id);
  } else {
    fail(Errc::backend_failure, "no estimator adapter named " + adapter);
  }
  estimators_[id] = backend;
  return backend;
}

std::shared_ptr<CaptionBackend> BackendRegistry::captioner(const std::string& id) const {
  if (auto it = captioners_.find(id); it != captioners_.end()) return it->second;
  const auto [adapter, params] = lookup(id);
  std::shared_ptr<CaptionBackend> backend;
  if (adapter == "mock-captioner") {
    backend = std::make_shared<MockCaptioner>(id);
  } else {
    fail(Errc::backend_failure, "no caption adapter named " + adapter);
  }
  captioners_[id] = backend;
  return backend;
}

std::shared_ptr<ConditionedGeneratorBackend> BackendRegistry::generator(
    const std::string& id) const {
  if (auto it = generators_.find(id); it != generators_.end()) return it->second;
  const auto [adapter, params] = lookup(id);
  std::shared_ptr<ConditionedGeneratorBackend> backend;
  if (adapter == "mock-generator") {
    auto mock = std::make_shared<MockGenerator>(id, params.value("downscale", 1));
    if (params.contains("fail_calls")) {
      std::set<std::uint64_t> calls;
      for (const auto& v : params["fail_calls"]) calls.insert(v.get<std::uint64_t>());
      mock->fail_calls(std::move(calls));
    }
    backend = mock;
  } else {
    fail(Errc::backend_failure, "no generator adapter named " + adapter);
  }
  generators_[id] = backend;
  return backend;
}

std::shared_ptr<DepthModelBackend> BackendRegistry::depth_model(
    const std::string& id) const {
  if (auto it = depth_models_.find(id); it != depth_models_.end()) return it->second;
  const auto [adapter, params] = lookup(id);
  std::shared_ptr<DepthModelBackend> backend;
  if (adapter == "mock-depth-model") {
    datasetbuild::ConversionConfig conv;
    conv.d_min_m = params.value("d_min_m", conv.d_min_m);
    conv.d_max_m = params.value("d_max_m", conv.d_max_m);
    if (params.contains("mapping"))
      conv.mapping = datasetbuild::mapping_from_string(params["mapping"].get<std::string>());
    backend = std::make_shared<GreenChannelDepthModel>(conv, id);
  } else {
    fail(Errc::backend_failure, "no depth-model adapter named " + adapter);
  }
  depth_models_[id] = backend;
  return backend;
}

}  // namespace atlantis::backends
