#include "fewrays/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fewrays/render.hpp"

namespace fewrays {

bool Primitive::contains(const Vec3& p) const {
  if (kind == PrimitiveKind::Sphere) return (p - center).squaredNorm() <= radius * radius;
  return ((p - center).cwiseAbs().array() <= half_extent.array()).all();
}

FieldSample AnalyticField::query(const Vec3& p) const {
  FieldSample out;
  Vec3 weighted = Vec3::Zero();
  for (const Primitive& prim : primitives_) {
    if (!prim.contains(p)) continue;
    out.sigma += prim.sigma;
    weighted += prim.sigma * prim.rgb;
  }
  if (out.sigma > 0.0) out.rgb = weighted / out.sigma;
  return out;
}

SceneSpec default_scene() {
  SceneSpec spec;
  Primitive sphere;
  sphere.kind = PrimitiveKind::Sphere;
  sphere.center = Vec3(-0.3, -0.1, 0.0);
  sphere.radius = 0.35;
  sphere.rgb = Vec3(0.9, 0.15, 0.1);
  sphere.sigma = 40.0;
  Primitive box;
  box.kind = PrimitiveKind::Box;
  box.center = Vec3(0.3, 0.2, -0.05);
  box.half_extent = Vec3(0.2, 0.25, 0.3);
  box.rgb = Vec3(0.1, 0.3, 0.85);
  box.sigma = 40.0;
  spec.primitives = {sphere, box};
  return spec;
}

namespace {

void check_inside(const Primitive& p, const Aabb& bounds) {
  const Vec3 extent = p.kind == PrimitiveKind::Sphere ? Vec3::Constant(p.radius) : p.half_extent;
  if (!bounds.contains(p.center - extent) || !bounds.contains(p.center + extent))
    throw std::invalid_argument("scene primitive extends outside the scene bounds");
  if (!(p.sigma >= 0.0)) throw std::invalid_argument("scene primitive density must be >= 0");
  if (!((p.rgb.array() >= 0.0).all() && (p.rgb.array() <= 1.0).all()))
    throw std::invalid_argument("scene primitive color must lie in [0,1]");
}

}  // namespace

Dataset generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.primitives.empty()) throw std::invalid_argument("scene spec has no primitives");
  if (spec.resolution < 8) throw std::invalid_argument("scene resolution must be >= 8");
  if (spec.n_train < 1 || spec.n_test < 1) throw std::invalid_argument("scene needs at least one train and one test view");
  if (spec.gt_samples < 256) throw std::invalid_argument("ground-truth rendering needs >= 256 samples per ray");
  for (const auto& p : spec.primitives) check_inside(p, spec.bounds);

  const AnalyticField field(spec.primitives);
  RaySampling sampling;
  sampling.n_samples = spec.gt_samples;
  sampling.near = spec.near;
  sampling.far = spec.far;
  sampling.jitter = false;
  sampling.validate();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> height(-0.6, 0.9);
  std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);

  Dataset ds;
  const int total = spec.n_train + spec.n_test;
  for (int i = 0; i < total; ++i) {
    const double z = height(rng);
    const double phi = azimuth(rng);
    const double ring = std::sqrt(1.0 - z * z);
    const Vec3 eye = spec.camera_radius * Vec3(ring * std::cos(phi), ring * std::sin(phi), z);
    Camera cam = look_at(eye, Vec3::Zero(), spec.resolution, spec.resolution, spec.camera_angle_x, spec.near, spec.far);
    ds.images.push_back(render_view(field, cam, sampling));
    ds.cameras.push_back(cam);
    (i < spec.n_train ? ds.train : ds.test).push_back(i);
  }
  return ds;
}

}  // namespace fewrays
