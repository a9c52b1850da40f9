#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fewrays/math.hpp"

namespace fewrays {

/// Row-major H x W x 3 color raster. Pixel (u, v) is row u, column v.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  double& at(int u, int v, int c) { return data_[offset(u, v) + c]; }
  double at(int u, int v, int c) const { return data_[offset(u, v) + c]; }

  Vec3 pixel(int u, int v) const {
    const std::size_t o = offset(u, v);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  void set_pixel(int u, int v, const Vec3& rgb) {
    const std::size_t o = offset(u, v);
    data_[o] = rgb.x();
    data_[o + 1] = rgb.y();
    data_[o + 2] = rgb.z();
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// True when every channel lies in [0, 1].
  bool in_unit_range() const;

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int u, int v) const {
    return (static_cast<std::size_t>(u) * width_ + v) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Single-channel real raster with the same (row, column) addressing as Image.
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int u, int v) { return values[static_cast<std::size_t>(u) * width + v]; }
  double at(int u, int v) const { return values[static_cast<std::size_t>(u) * width + v]; }
};

/// Rec. 601 luma.
ScalarMap luma(const Image& image);

}  // namespace fewrays
