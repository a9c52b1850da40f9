#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fewrays/math.hpp"

namespace fewrays {

struct Aabb {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);

  bool operator==(const Aabb&) const = default;

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

struct FieldSample {
  Vec3 rgb = Vec3::Zero();
  double sigma = 0.0;
};

/// The 8 vertices enclosing a position and their trilinear weights.
/// Corner k has offsets (k & 1, (k >> 1) & 1, (k >> 2) & 1) along (x, y, z).
struct TrilinearStencil {
  std::array<std::int64_t, 8> index{};
  std::array<double, 8> weight{};
};

/// Value plus derivatives with respect to the interpolated raw parameters.
/// d value / d raw[corner k] = stencil.weight[k] * d_raw.
struct FieldSampleGrad {
  FieldSample value;
  bool inside = false;
  TrilinearStencil stencil;
  double dsigma_draw = 0.0;   // softplus'(raw) = logistic(raw)
  Vec3 drgb_draw = Vec3::Zero();  // logistic'(raw) per channel
};

/// Accumulated dL/d(raw parameter), same layout as the field.
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(std::size_t vertex_count)
      : density_(vertex_count, 0.0), rgb_(vertex_count * 3, 0.0) {}

  std::span<double> density() { return density_; }
  std::span<const double> density() const { return density_; }
  std::span<double> rgb() { return rgb_; }
  std::span<const double> rgb() const { return rgb_; }

  void zero();
  bool all_finite() const;

 private:
  std::vector<double> density_;
  std::vector<double> rgb_;
};

/// Dense D^3 vertex grid over an axis-aligned box. Each vertex stores a raw
/// density (softplus-activated) and raw RGB (logistic-activated). Color does
/// not depend on view direction.
class VoxelField {
 public:
  static constexpr double kDefaultRawDensity = -2.0;
  static constexpr double kDefaultRawRgb = 0.0;

  VoxelField() = default;
  /// Throws std::invalid_argument for resolution < 2 or an empty box.
  VoxelField(int resolution, Aabb bounds, double raw_density = kDefaultRawDensity,
             double raw_rgb = kDefaultRawRgb);

  int resolution() const { return resolution_; }
  const Aabb& bounds() const { return bounds_; }
  std::size_t vertex_count() const { return raw_density_.size(); }

  std::int64_t vertex_index(int ix, int iy, int iz) const {
    return (static_cast<std::int64_t>(iz) * resolution_ + iy) * resolution_ + ix;
  }

  std::span<double> raw_density() { return raw_density_; }
  std::span<const double> raw_density() const { return raw_density_; }
  /// Interleaved r, g, b per vertex.
  std::span<double> raw_rgb() { return raw_rgb_; }
  std::span<const double> raw_rgb() const { return raw_rgb_; }

  GradientBuffer make_gradient_buffer() const { return GradientBuffer(vertex_count()); }

  /// Fills the stencil; false when the position is outside the bounds.
  bool stencil(const Vec3& position, TrilinearStencil& out) const;

  /// Outside the bounds: sigma = 0 and rgb = 0 (the renderer supplies the background).
  FieldSample query(const Vec3& position) const;
  FieldSampleGrad query_with_grads(const Vec3& position) const;

  /// raw -= lr * grad, then zeroes the buffer. Densities move with
  /// lr * density_scale. Throws NumericError (and leaves the field untouched)
  /// if any gradient entry is non-finite.
  void sgd_step(GradientBuffer& grads, double lr, double density_scale = 1.0);

  bool operator==(const VoxelField&) const = default;

 private:
  int resolution_ = 0;
  Aabb bounds_;
  std::vector<double> raw_density_;
  std::vector<double> raw_rgb_;
};

/// Checkpoint layout, all little-endian:
///   char[4] magic "FRVG", u32 version (1), u32 resolution D,
///   f64 lo[3], f64 hi[3],
///   f64 raw_density[D^3], f64 raw_rgb[3 D^3]
/// Vertex order is x fastest, then y, then z.
void save_checkpoint(const VoxelField& field, const std::filesystem::path& path);
/// Throws DataError on a missing file, wrong magic/version or truncated data.
VoxelField load_checkpoint(const std::filesystem::path& path);

}  // namespace fewrays
