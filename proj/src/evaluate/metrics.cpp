#include "atlantis/evaluate/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "atlantis/core/error.hpp"

namespace atlantis::evaluate {

namespace {
using nlohmann::json;

double median(std::vector<double> values) {
  const size_t n = values.size();
  std::nth_element(values.begin(), values.begin() + n / 2, values.end());
  double mid = values[n / 2];
  if (n % 2 == 0) {
    std::nth_element(values.begin(), values.begin() + n / 2 - 1, values.end());
    mid = (mid + values[n / 2 - 1]) / 2.0;
  }
  return mid;
}

}  // namespace

json MetricsReport::to_json() const {
  return json{{"rmse", rmse},       {"rmse_log", rmse_log}, {"a_rel", a_rel},
              {"s_rel", s_rel},     {"log10", log10},       {"si_log", si_log},
              {"delta1", delta1},   {"delta2", delta2},     {"delta3", delta3},
              {"n_valid", n_valid}};
}

MetricsReport MetricsReport::from_json(const json& j) {
  MetricsReport r;
  r.rmse = j.at("rmse").get<double>();
  r.rmse_log = j.at("rmse_log").get<double>();
  r.a_rel = j.at("a_rel").get<double>();
  r.s_rel = j.at("s_rel").get<double>();
  r.log10 = j.at("log10").get<double>();
  r.si_log = j.at("si_log").get<double>();
  r.delta1 = j.at("delta1").get<double>();
  r.delta2 = j.at("delta2").get<double>();
  r.delta3 = j.at("delta3").get<double>();
  r.n_valid = j.value("n_valid", static_cast<std::size_t>(0));
  return r;
}

void EvalConfig::validate() const {
  if (!(gt_min_m > 0.0)) fail(Errc::invalid_config, "gt_min_m must be > 0");
  if (gt_max_m && !(*gt_max_m > gt_min_m))
    fail(Errc::invalid_config, "gt_max_m must exceed gt_min_m");
}

MetricsReport compute_metrics(const core::MetricDepthMap& pred,
                              const core::MetricDepthMap& gt,
                              const uncertainty::ValidityMask* mask,
                              const EvalConfig& cfg) {
  cfg.validate();
  if (pred.width != gt.width || pred.height != gt.height)
    fail(Errc::shape_mismatch, "prediction and ground truth differ in shape");
  if (mask && (mask->width != gt.width || mask->height != gt.height))
    fail(Errc::shape_mismatch, "mask and ground truth differ in shape");

  std::vector<double> p_vals, g_vals;
  p_vals.reserve(gt.data.size());
  g_vals.reserve(gt.data.size());
  for (size_t i = 0; i < gt.data.size(); ++i) {
    const double g = gt.data[i];
    if (!std::isfinite(g) || g < cfg.gt_min_m) continue;
    if (cfg.gt_max_m && g > *cfg.gt_max_m) continue;
    if (mask && mask->data[i] == 0) continue;
    p_vals.push_back(pred.data[i]);
    g_vals.push_back(g);
  }
  if (p_vals.empty()) fail(Errc::empty_valid_set, "no valid pixels");
  for (double p : p_vals)
    if (!(p > 0.0))
      fail(Errc::non_positive_prediction, "prediction <= 0 on valid set");

  if (cfg.median_scaling) {
    const double s = median(g_vals) / median(p_vals);
    for (double& p : p_vals) p *= s;
  }

  const size_t n = p_vals.size();
  double sq = 0.0, sq_log = 0.0, abs_rel = 0.0, sq_rel = 0.0, abs_log10 = 0.0;
  double e_sum = 0.0, e_sq_sum = 0.0;
  size_t in1 = 0, in2 = 0, in3 = 0;
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
  for (size_t i = 0; i < n; ++i) {
    const double p = p_vals[i], g = g_vals[i];
    const double diff = p - g;
    sq += diff * diff;
    const double e = std::log(p) - std::log(g);
    sq_log += e * e;
    e_sum += e;
    e_sq_sum += e * e;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    abs_log10 += std::abs(std::log10(p) - std::log10(g));
    const double ratio = std::max(p / g, g / p);
    in1 += ratio < t1;
    in2 += ratio < t2;
    in3 += ratio < t3;
  }

  const double dn = static_cast<double>(n);
  MetricsReport r;
  r.rmse = std::sqrt(sq / dn);
  r.rmse_log = std::sqrt(sq_log / dn);
  r.a_rel = abs_rel / dn;
  r.s_rel = sq_rel / dn;
  r.log10 = abs_log10 / dn;
  const double mean_e = e_sum / dn;
  double var = e_sq_sum / dn - mean_e * mean_e;
  if (cfg.si_log_variance == uncertainty::VarianceConvention::sample)
    var = n > 1 ? var * dn / (dn - 1.0) : 0.0;
  r.si_log = 100.0 * std::sqrt(std::max(0.0, var));
  r.delta1 = static_cast<double>(in1) / dn;
  r.delta2 = static_cast<double>(in2) / dn;
  r.delta3 = static_cast<double>(in3) / dn;
  r.n_valid = n;
  return r;
}

}  // namespace atlantis::evaluate
