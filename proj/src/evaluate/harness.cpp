#include "atlantis/evaluate/harness.hpp"

#include <cmath>

#include "atlantis/core/error.hpp"
#include "atlantis/core/image.hpp"

namespace atlantis::evaluate {

MetricsReport aggregate_mean(const std::vector<PerImageResult>& per_image) {
  MetricsReport agg;
  if (per_image.empty()) return agg;
  for (const auto& item : per_image) {
    const auto& m = item.metrics;
    agg.rmse += m.rmse;
    agg.rmse_log += m.rmse_log;
    agg.a_rel += m.a_rel;
    agg.s_rel += m.s_rel;
    agg.log10 += m.log10;
    agg.si_log += m.si_log;
    agg.delta1 += m.delta1;
    agg.delta2 += m.delta2;
    agg.delta3 += m.delta3;
    agg.n_valid += m.n_valid;
  }
  const double n = static_cast<double>(per_image.size());
  agg.rmse /= n;
  agg.rmse_log /= n;
  agg.a_rel /= n;
  agg.s_rel /= n;
  agg.log10 /= n;
  agg.si_log /= n;
  agg.delta1 /= n;
  agg.delta2 /= n;
  agg.delta3 /= n;
  return agg;
}

EvalRun evaluate_model(backends::DepthModelBackend& backend,
                       const core::Manifest& manifest, const HarnessOptions& opts) {
  EvalRun run;
  std::vector<double> pooled_pred, pooled_gt;
  for (const auto& rec : manifest.records()) {
    if (rec.kind != core::RecordKind::dataset_pair) continue;

    std::string image_rel;
    if (auto it = rec.paths.find("image"); it != rec.paths.end()) {
      image_rel = it->second;
    } else if (rec.params.contains("image_ref")) {
      const auto* gen = manifest.find(rec.params["image_ref"].get<std::string>());
      if (gen == nullptr)
        fail(Errc::manifest_invalid, "dataset pair " + rec.id + " has dangling image_ref");
      image_rel = gen->paths.at("image");
    } else {
      fail(Errc::manifest_invalid, "dataset pair " + rec.id + " lacks an image");
    }

    try {
      const auto image = core::load_image(manifest.resolve(image_rel).string());
      const auto gt = core::decode_metric_depth(manifest.resolve(rec.paths.at("depth")).string());
      uncertainty::ValidityMask mask;
      const uncertainty::ValidityMask* mask_ptr = nullptr;
      if (opts.use_masks) {
        if (auto it = rec.paths.find("mask"); it != rec.paths.end()) {
          mask = uncertainty::decode_mask(manifest.resolve(it->second).string());
          mask_ptr = &mask;
        }
      }
      const auto pred = backend.predict(image);
      run.per_image.push_back({rec.id, compute_metrics(pred, gt, mask_ptr, opts.eval)});
      if (opts.pooled) {
        for (size_t i = 0; i < gt.data.size(); ++i) {
          if (!std::isfinite(gt.data[i]) || gt.data[i] < opts.eval.gt_min_m) continue;
          if (opts.eval.gt_max_m && gt.data[i] > *opts.eval.gt_max_m) continue;
          if (mask_ptr && mask_ptr->data[i] == 0) continue;
          pooled_pred.push_back(pred.data[i]);
          pooled_gt.push_back(gt.data[i]);
        }
      }
    } catch (const Error& e) {
      if (e.code() == Errc::empty_valid_set) {
        run.excluded.push_back(rec.id);
      } else {
        run.failed.push_back(rec.id + ": " + e.what());
      }
    }
  }
  if (opts.pooled && !pooled_pred.empty()) {
    core::MetricDepthMap pred_map, gt_map;
    pred_map.width = gt_map.width = static_cast<int>(pooled_pred.size());
    pred_map.height = gt_map.height = 1;
    pred_map.cap_m = gt_map.cap_m = 1e12;
    pred_map.data = std::move(pooled_pred);
    gt_map.data = std::move(pooled_gt);
    run.aggregate = compute_metrics(pred_map, gt_map, nullptr, opts.eval);
  } else {
    run.aggregate = aggregate_mean(run.per_image);
  }
  return run;
}

}  // namespace atlantis::evaluate
