#pragma once

#include <cstdint>
#include <vector>

#include "fewrays/dataset.hpp"
#include "fewrays/field.hpp"

namespace fewrays {

enum class PrimitiveKind { Sphere, Box };

/// Constant-color, constant-density solid.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Sphere;
  Vec3 center = Vec3::Zero();
  double radius = 0.5;                       // sphere
  Vec3 half_extent = Vec3::Constant(0.25);   // box
  Vec3 rgb = Vec3(1.0, 0.0, 0.0);
  double sigma = 50.0;

  bool contains(const Vec3& p) const;
};

/// Ground-truth radiance field made of primitives. Overlapping primitives add
/// densities; color is the density-weighted mix. Empty space has sigma = 0.
class AnalyticField {
 public:
  explicit AnalyticField(std::vector<Primitive> primitives) : primitives_(std::move(primitives)) {}
  FieldSample query(const Vec3& p) const;
  const std::vector<Primitive>& primitives() const { return primitives_; }

 private:
  std::vector<Primitive> primitives_;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  Aabb bounds;                    // primitives must lie inside
  int n_train = 16;
  int n_test = 4;
  int resolution = 64;            // square images
  double camera_radius = 2.5;
  double camera_angle_x = 0.6911112070083618;
  double near = 0.1;
  double far = 4.0;
  int gt_samples = 256;
};

/// The two-primitive scene used by the benchmark and acceptance runs: a red
/// sphere and a blue box inside [-1,1]^3.
SceneSpec default_scene();

/// Renders n_train + n_test views of the analytic field with cameras on a
/// sphere looking at the origin, white background, midpoint sampling.
/// Views [0, n_train) are the train split. Deterministic in `seed`.
/// Throws std::invalid_argument for zero primitives, resolution < 8, or
/// primitives outside the bounds.
Dataset generate_scene(const SceneSpec& spec, std::uint64_t seed);

}  // namespace fewrays
