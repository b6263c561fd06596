#include "atlantis/uncertainty/uncertainty.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "atlantis/core/error.hpp"

namespace atlantis::uncertainty {

namespace {

using nlohmann::json;

struct File {
  std::FILE* fp;
  explicit File(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {}
  ~File() { if (fp) std::fclose(fp); }
};

}  // namespace

double ValidityMask::valid_fraction() const {
  if (data.empty()) return 0.0;
  size_t valid = 0;
  for (auto v : data) valid += v != 0;
  return static_cast<double>(valid) / static_cast<double>(data.size());
}

core::InverseRelativeDepthMap normalize_inverse_depth(
    const core::InverseRelativeDepthMap& map) {
  core::validate(map);
  return core::minmax_normalized(map);
}

UncertaintyMap uncertainty_between(const core::InverseRelativeDepthMap& a,
                                   const core::InverseRelativeDepthMap& b_aligned,
                                   VarianceConvention variance) {
  if (a.width != b_aligned.width || a.height != b_aligned.height)
    fail(Errc::shape_mismatch, "uncertainty inputs differ in shape");
  UncertaintyMap du;
  du.width = a.width;
  du.height = a.height;
  du.data.resize(a.pixel_count());
  // Population variance of the two values is ((a-b)/2)^2; the sample
  // convention doubles it.
  const double scale = variance == VarianceConvention::population ? 0.25 : 0.5;
  for (size_t p = 0; p < du.data.size(); ++p) {
    const double diff = a.data[p] - b_aligned.data[p];
    du.data[p] = diff * diff * scale;
  }
  return du;
}

UncertaintyMap depth_uncertainty(const core::RgbImage& image,
                                 backends::DepthEstimatorBackend& backend,
                                 const UncertaintyOptions& opts) {
  core::InverseRelativeDepthMap straight = backend.estimate(image);
  core::InverseRelativeDepthMap flipped = backend.estimate(core::hflip(image));
  if (opts.normalize) {
    straight = normalize_inverse_depth(straight);
    flipped = normalize_inverse_depth(flipped);
  }
  // Flip the second estimate back so both index the same pixel locations.
  const core::InverseRelativeDepthMap aligned = core::hflip(flipped);
  return uncertainty_between(straight, aligned, opts.variance);
}

ValidityMask validity_mask(const UncertaintyMap& du, double threshold) {
  if (!(threshold > 0.0)) fail(Errc::non_positive_threshold, "threshold must be > 0");
  ValidityMask mask;
  mask.width = du.width;
  mask.height = du.height;
  mask.threshold = threshold;
  mask.data.resize(du.pixel_count());
  for (size_t p = 0; p < mask.data.size(); ++p)
    mask.data[p] = du.data[p] < threshold ? 1 : 0;
  return mask;
}

void encode_mask(const ValidityMask& mask, const std::string& path) {
  File file(path, "wb");
  if (!file.fp) fail(Errc::io_failure, "cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::io_failure, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::io_failure, "libpng write failed for " + path);
  }
  png_init_io(png, file.fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(mask.width),
               static_cast<png_uint_32>(mask.height), 1, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const size_t stride = (static_cast<size_t>(mask.width) + 7) / 8;
  std::vector<png_byte> row(stride);
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) row[static_cast<size_t>(x) / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);

  std::ofstream sidecar(path + ".json");
  if (!sidecar) fail(Errc::io_failure, "cannot write sidecar for " + path);
  sidecar << json{{"encoding", "validity_mask"},
                  {"threshold", mask.threshold},
                  {"valid_fraction", mask.valid_fraction()},
                  {"width", mask.width},
                  {"height", mask.height}}
                 .dump(2)
          << "\n";
}

ValidityMask decode_mask(const std::string& path) {
  const std::string sidecar_path = path + ".json";
  if (!std::filesystem::exists(sidecar_path)) fail(Errc::missing_sidecar, sidecar_path);
  json j;
  try {
    std::ifstream in(sidecar_path);
    in >> j;
  } catch (const json::exception& e) {
    fail(Errc::corrupt_sidecar, sidecar_path + ": " + e.what());
  }

  cv::Mat mat = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (mat.empty()) fail(Errc::io_failure, "cannot read " + path);
  ValidityMask mask;
  mask.width = mat.cols;
  mask.height = mat.rows;
  mask.threshold = j.value("threshold", 0.15);
  mask.data.resize(mask.pixel_count());
  for (int y = 0; y < mat.rows; ++y)
    for (int x = 0; x < mat.cols; ++x)
      mask.data[static_cast<size_t>(y) * mat.cols + x] = mat.at<uchar>(y, x) > 0 ? 1 : 0;
  return mask;
}

void encode_uncertainty(const UncertaintyMap& du, const std::string& path) {
  core::InverseRelativeDepthMap carrier;
  carrier.width = du.width;
  carrier.height = du.height;
  carrier.normalized = true;
  carrier.data = du.data;
  for (double v : carrier.data)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      fail(Errc::invalid_config, "uncertainty values must lie in [0,1]");
  core::encode_depth(carrier, path);
}

UncertaintyMap decode_uncertainty(const std::string& path) {
  const auto carrier = core::decode_inverse_depth(path);
  UncertaintyMap du;
  du.width = carrier.width;
  du.height = carrier.height;
  du.data = carrier.data;
  return du;
}

}  // namespace atlantis::uncertainty
