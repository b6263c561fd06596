#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace atlantis::core {

/// Interleaved RGB raster, values in [0,1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // size == width * height * 3

  double& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  double at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  size_t pixel_count() const {
    return static_cast<size_t>(width) * static_cast<size_t>(height);
  }
};

RgbImage make_image(int width, int height, double fill = 0.0);

/// Throws InvalidConfig if dimensions or values violate the type contract.
void validate(const RgbImage& img);

struct LoadOptions {
  bool replicate_gray = false;  // expand single-channel input across RGB
};

/// Reads an 8- or 16-bit PNG/JPEG raster and scales linearly to [0,1].
RgbImage load_image(const std::string& path, const LoadOptions& opts = {});

/// Writes PNG at the requested bit depth (8 or 16), round-quantized.
void save_image(const RgbImage& img, const std::string& path, int bit_depth = 8);

RgbImage hflip(const RgbImage& img);

/// Per-pixel 0.299 R + 0.587 G + 0.114 B.
std::vector<double> luminance(const RgbImage& img);
double mean_luminance(const RgbImage& img);

}  // namespace atlantis::core
