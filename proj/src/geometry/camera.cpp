#include "fewrays/camera.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>  // cross()

namespace fewrays {

void Camera::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be positive");
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: focal lengths must be positive");
  if (!(near > 0.0) || !(near < far)) throw std::invalid_argument("camera: need 0 < near < far");
  const Mat3 r = rotation();
  if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument("camera: rotation block is not orthonormal");
}

Ray pixel_ray(const Camera& camera, int u, int v) {
  if (u < 0 || u >= camera.height || v < 0 || v >= camera.width)
    throw std::out_of_range("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside " +
                            std::to_string(camera.height) + "x" + std::to_string(camera.width) + " image");
  const Vec3 local((v + 0.5 - camera.cx) / camera.fx, -(u + 0.5 - camera.cy) / camera.fy, -1.0);
  Ray ray;
  ray.origin = camera.position();
  ray.direction = (camera.rotation() * local).normalized();
  ray.u = u;
  ray.v = v;
  return ray;
}

double focal_from_angle(int extent, double angle) { return 0.5 * extent / std::tan(0.5 * angle); }

Camera look_at(const Vec3& eye, const Vec3& target, int width, int height, double camera_angle_x,
               double near, double far) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(forward.dot(up)) > 0.999) up = Vec3::UnitY();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 cam_up = right.cross(forward);

  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = focal_from_angle(width, camera_angle_x);
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.pose.setIdentity();
  cam.pose.block<3, 1>(0, 0) = right;
  cam.pose.block<3, 1>(0, 1) = cam_up;
  cam.pose.block<3, 1>(0, 2) = -forward;
  cam.pose.block<3, 1>(0, 3) = eye;
  cam.near = near;
  cam.far = far;
  return cam;
}

}  // namespace fewrays
