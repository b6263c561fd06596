#include "atlantis/core/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <filesystem>

#include "atlantis/core/error.hpp"

namespace atlantis::core {

RgbImage make_image(int width, int height, double fill) {
  RgbImage img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<size_t>(width) * height * 3, fill);
  return img;
}

void validate(const RgbImage& img) {
  if (img.width < 1 || img.height < 1)
    fail(Errc::invalid_config, "image dimensions must be >= 1");
  if (img.data.size() != img.pixel_count() * 3)
    fail(Errc::invalid_config, "image buffer size mismatch");
  for (double v : img.data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      fail(Errc::invalid_config, "image values must be finite and within [0,1]");
  }
}

RgbImage load_image(const std::string& path, const LoadOptions& opts) {
  if (!std::filesystem::exists(path))
    fail(Errc::missing_file, path);
  cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (raw.empty())
    fail(Errc::unsupported_format, "cannot decode " + path);

  const int depth = raw.depth();
  if (depth != CV_8U && depth != CV_16U)
    fail(Errc::unsupported_format, "only 8/16-bit rasters supported: " + path);

  cv::Mat bgr;
  if (raw.channels() == 1) {
    if (!opts.replicate_gray)
      fail(Errc::non_rgb, "grayscale input without replicate_gray: " + path);
    cv::cvtColor(raw, bgr, cv::COLOR_GRAY2BGR);
  } else if (raw.channels() == 3) {
    bgr = raw;
  } else if (raw.channels() == 4) {
    cv::cvtColor(raw, bgr, cv::COLOR_BGRA2BGR);
  } else {
    fail(Errc::unsupported_format, "unsupported channel count: " + path);
  }

  const double scale = depth == CV_8U ? 1.0 / 255.0 : 1.0 / 65535.0;
  RgbImage img = make_image(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    for (int x = 0; x < bgr.cols; ++x) {
      double b, g, r;
      if (depth == CV_8U) {
        const auto px = bgr.at<cv::Vec3b>(y, x);
        b = px[0]; g = px[1]; r = px[2];
      } else {
        const auto px = bgr.at<cv::Vec3w>(y, x);
        b = px[0]; g = px[1]; r = px[2];
      }
      img.at(x, y, 0) = r * scale;
      img.at(x, y, 1) = g * scale;
      img.at(x, y, 2) = b * scale;
    }
  }
  return img;
}

void save_image(const RgbImage& img, const std::string& path, int bit_depth) {
  validate(img);
  if (bit_depth != 8 && bit_depth != 16)
    fail(Errc::invalid_config, "bit depth must be 8 or 16");
  const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
  cv::Mat out(img.height, img.width, bit_depth == 8 ? CV_8UC3 : CV_16UC3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const long r = std::lround(img.at(x, y, 0) * maxval);
      const long g = std::lround(img.at(x, y, 1) * maxval);
      const long b = std::lround(img.at(x, y, 2) * maxval);
      if (bit_depth == 8)
        out.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<uchar>(b), static_cast<uchar>(g), static_cast<uchar>(r));
      else
        out.at<cv::Vec3w>(y, x) = cv::Vec3w(static_cast<ushort>(b), static_cast<ushort>(g), static_cast<ushort>(r));
    }
  }
  if (!cv::imwrite(path, out))
    fail(Errc::io_failure, "cannot write " + path);
}

RgbImage hflip(const RgbImage& img) {
  RgbImage out = make_image(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
  return out;
}

std::vector<double> luminance(const RgbImage& img) {
  std::vector<double> out(img.pixel_count());
  for (size_t p = 0; p < out.size(); ++p) {
    out[p] = 0.299 * img.data[p * 3] + 0.587 * img.data[p * 3 + 1] +
             0.114 * img.data[p * 3 + 2];
  }
  return out;
}

double mean_luminance(const RgbImage& img) {
  const auto lum = luminance(img);
  double sum = 0.0;
  for (double v : lum) sum += v;
  return lum.empty() ? 0.0 : sum / static_cast<double>(lum.size());
}

}  // namespace atlantis::core
