#include "atlantis/core/depth.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "atlantis/core/error.hpp"

namespace atlantis::core {

namespace {

using nlohmann::json;

constexpr double kU16Max = 65535.0;

std::pair<double, double> min_max(const std::vector<double>& data) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

cv::Mat codes_to_mat(int width, int height, const std::vector<uint16_t>& codes) {
  cv::Mat mat(height, width, CV_16UC1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      mat.at<uint16_t>(y, x) = codes[static_cast<size_t>(y) * width + x];
  return mat;
}

cv::Mat read_u16_png(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) fail(Errc::io_failure, "cannot read " + path);
  if (mat.type() != CV_16UC1)
    fail(Errc::corrupt_sidecar, "depth file is not 16-bit single channel: " + path);
  return mat;
}

void write_png(const cv::Mat& mat, const std::string& path) {
  if (!cv::imwrite(path, mat)) fail(Errc::io_failure, "cannot write " + path);
}

json load_sidecar(const std::string& path) {
  const auto sidecar = depth_sidecar_path(path);
  if (!std::filesystem::exists(sidecar)) fail(Errc::missing_sidecar, sidecar);
  std::ifstream in(sidecar);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(Errc::corrupt_sidecar, sidecar + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("encoding"))
    fail(Errc::corrupt_sidecar, sidecar + ": missing encoding field");
  return j;
}

void write_sidecar(const std::string& path, const json& j) {
  std::ofstream out(depth_sidecar_path(path));
  if (!out) fail(Errc::io_failure, "cannot write sidecar for " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

InverseRelativeDepthMap make_inverse_depth(int width, int height, double fill,
                                           bool normalized) {
  InverseRelativeDepthMap map;
  map.width = width;
  map.height = height;
  map.normalized = normalized;
  map.data.assign(static_cast<size_t>(width) * height, fill);
  return map;
}

MetricDepthMap make_metric_depth(int width, int height, double fill, double cap_m) {
  MetricDepthMap map;
  map.width = width;
  map.height = height;
  map.cap_m = cap_m;
  map.data.assign(static_cast<size_t>(width) * height, fill);
  return map;
}

void validate(const InverseRelativeDepthMap& map) {
  if (map.width < 1 || map.height < 1)
    fail(Errc::invalid_config, "depth dimensions must be >= 1");
  if (map.data.size() != map.pixel_count())
    fail(Errc::invalid_config, "depth buffer size mismatch");
  for (double v : map.data) {
    if (!std::isfinite(v) || v < 0.0)
      fail(Errc::invalid_config, "inverse depth values must be finite and >= 0");
    if (map.normalized && v > 1.0)
      fail(Errc::invalid_config, "normalized inverse depth values must be <= 1");
  }
}

void validate(const MetricDepthMap& map) {
  if (map.width < 1 || map.height < 1)
    fail(Errc::invalid_config, "depth dimensions must be >= 1");
  if (map.data.size() != map.pixel_count())
    fail(Errc::invalid_config, "depth buffer size mismatch");
  for (double v : map.data) {
    if (!std::isfinite(v) || v <= 0.0 || v > map.cap_m)
      fail(Errc::invalid_config, "metric depth values must be finite, > 0 and <= cap");
  }
}

InverseRelativeDepthMap hflip(const InverseRelativeDepthMap& map) {
  InverseRelativeDepthMap out = map;
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      out.at(x, y) = map.at(map.width - 1 - x, y);
  return out;
}

InverseRelativeDepthMap minmax_normalized(const InverseRelativeDepthMap& map) {
  if (map.normalized) return map;
  InverseRelativeDepthMap out = map;
  out.normalized = true;
  const auto [lo, hi] = min_max(map.data);
  if (hi > lo) {
    const double range = hi - lo;
    for (auto& v : out.data) v = (v - lo) / range;
  } else {
    std::fill(out.data.begin(), out.data.end(), 0.0);
  }
  return out;
}

InverseRelativeDepthMap resample_nearest(const InverseRelativeDepthMap& map,
                                         int new_width, int new_height) {
  InverseRelativeDepthMap out =
      make_inverse_depth(new_width, new_height, 0.0, map.normalized);
  for (int y = 0; y < new_height; ++y) {
    const int sy = std::min(map.height - 1,
                            static_cast<int>((static_cast<int64_t>(y) * map.height) / new_height));
    for (int x = 0; x < new_width; ++x) {
      const int sx = std::min(map.width - 1,
                              static_cast<int>((static_cast<int64_t>(x) * map.width) / new_width));
      out.at(x, y) = map.at(sx, sy);
    }
  }
  return out;
}

std::string depth_sidecar_path(const std::string& path) { return path + ".json"; }

void encode_depth(const InverseRelativeDepthMap& map, const std::string& path) {
  validate(map);
  const auto [lo, hi] = min_max(map.data);
  std::vector<uint16_t> codes(map.pixel_count());
  if (map.normalized) {
    for (size_t i = 0; i < codes.size(); ++i)
      codes[i] = static_cast<uint16_t>(std::lround(map.data[i] * kU16Max));
  } else if (hi > lo) {
    const double scale = kU16Max / (static_cast<double>(hi) - lo);
    for (size_t i = 0; i < codes.size(); ++i)
      codes[i] = static_cast<uint16_t>(std::lround((map.data[i] - lo) * scale));
  } else {
    std::fill(codes.begin(), codes.end(), 0);
  }
  write_png(codes_to_mat(map.width, map.height, codes), path);
  write_sidecar(path, json{{"encoding", "inverse_relative"},
                           {"normalized", map.normalized},
                           {"min", lo},
                           {"max", hi},
                           {"width", map.width},
                           {"height", map.height}});
}

void encode_depth(const MetricDepthMap& map, const std::string& path) {
  validate(map);
  const auto [lo, hi] = min_max(map.data);
  std::vector<uint16_t> codes(map.pixel_count());
  for (size_t i = 0; i < codes.size(); ++i) {
    const long mm = std::lround(static_cast<double>(map.data[i]) * 1000.0);
    if (mm > 65535)
      fail(Errc::range_overflow, "metric depth exceeds 65.535 m at encode time");
    codes[i] = static_cast<uint16_t>(mm);
  }
  write_png(codes_to_mat(map.width, map.height, codes), path);
  write_sidecar(path, json{{"encoding", "metric_mm"},
                           {"cap_m", map.cap_m},
                           {"min", lo},
                           {"max", hi},
                           {"width", map.width},
                           {"height", map.height}});
}

DecodedDepth decode_depth(const std::string& path) {
  const json j = load_sidecar(path);
  const cv::Mat mat = read_u16_png(path);
  const std::string encoding = j["encoding"].get<std::string>();
  try {
    if (encoding == "inverse_relative") {
      InverseRelativeDepthMap map = make_inverse_depth(
          mat.cols, mat.rows, 0.0, j.at("normalized").get<bool>());
      const double lo = j.at("min").get<double>();
      const double hi = j.at("max").get<double>();
      for (int y = 0; y < mat.rows; ++y) {
        for (int x = 0; x < mat.cols; ++x) {
          const double code = mat.at<uint16_t>(y, x) / kU16Max;
          map.at(x, y) = map.normalized ? code : lo + code * (hi - lo);
        }
      }
      return map;
    }
    if (encoding == "metric_mm") {
      MetricDepthMap map =
          make_metric_depth(mat.cols, mat.rows, 1.0, j.at("cap_m").get<double>());
      for (int y = 0; y < mat.rows; ++y)
        for (int x = 0; x < mat.cols; ++x)
          map.at(x, y) = mat.at<uint16_t>(y, x) / 1000.0;
      return map;
    }
  } catch (const json::exception& e) {
    fail(Errc::corrupt_sidecar, depth_sidecar_path(path) + ": " + e.what());
  }
  fail(Errc::corrupt_sidecar, "unknown depth encoding: " + encoding);
}

InverseRelativeDepthMap decode_inverse_depth(const std::string& path) {
  auto decoded = decode_depth(path);
  if (auto* map = std::get_if<InverseRelativeDepthMap>(&decoded)) return std::move(*map);
  fail(Errc::corrupt_sidecar, "expected inverse-relative depth at " + path);
}

MetricDepthMap decode_metric_depth(const std::string& path) {
  auto decoded = decode_depth(path);
  if (auto* map = std::get_if<MetricDepthMap>(&decoded)) return std::move(*map);
  fail(Errc::corrupt_sidecar, "expected metric depth at " + path);
}

}  // namespace atlantis::core
