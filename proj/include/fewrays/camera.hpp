#pragma once

#include "fewrays/math.hpp"

namespace fewrays {

/// Pinhole camera. Right-handed, looking down -z in camera space, pose is
/// camera-to-world (same convention as NeRF-synthetic transforms files).
struct Camera {
  int width = 0;
  int height = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat4 pose = Mat4::Identity();
  double near = 0.1;
  double far = 4.0;

  Vec3 position() const { return pose.block<3, 1>(0, 3); }
  Mat3 rotation() const { return pose.block<3, 3>(0, 0); }

  /// Throws std::invalid_argument unless the rotation block is orthonormal
  /// (1e-6), 0 < near < far and the image size is positive.
  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = -Vec3::UnitZ();
  int u = 0;
  int v = 0;
  int view = 0;
  Vec3 target = Vec3::Zero();
};

/// Ray through the center of pixel (u, v) (row u, column v):
/// direction = normalize(R * [(v + 0.5 - cx)/fx, -(u + 0.5 - cy)/fy, -1]).
/// Throws std::out_of_range for pixels outside the image.
Ray pixel_ray(const Camera& camera, int u, int v);

/// Camera at `eye` looking at `target` with world up +z.
Camera look_at(const Vec3& eye, const Vec3& target, int width, int height, double camera_angle_x,
               double near, double far);

/// 0.5 * width / tan(0.5 * angle)
double focal_from_angle(int extent, double angle);

}  // namespace fewrays
