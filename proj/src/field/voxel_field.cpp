#include "fewrays/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fewrays/errors.hpp"

namespace fewrays {

void GradientBuffer::zero() {
  std::fill(density_.begin(), density_.end(), 0.0);
  std::fill(rgb_.begin(), rgb_.end(), 0.0);
}

bool GradientBuffer::all_finite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(density_.begin(), density_.end(), finite) && std::all_of(rgb_.begin(), rgb_.end(), finite);
}

VoxelField::VoxelField(int resolution, Aabb bounds, double raw_density, double raw_rgb)
    : resolution_(resolution), bounds_(std::move(bounds)) {
  if (resolution < 2) throw std::invalid_argument("voxel field resolution must be >= 2");
  if (!((bounds_.hi - bounds_.lo).array() > 0.0).all()) throw std::invalid_argument("voxel field bounds are empty");
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
  raw_density_.assign(n, raw_density);
  raw_rgb_.assign(3 * n, raw_rgb);
}

bool VoxelField::stencil(const Vec3& position, TrilinearStencil& out) const {
  if (!bounds_.contains(position)) return false;
  const int last_cell = resolution_ - 2;
  int cell[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double g = (position[a] - bounds_.lo[a]) / (bounds_.hi[a] - bounds_.lo[a]) * (resolution_ - 1);
    const int i = std::clamp(static_cast<int>(std::floor(g)), 0, last_cell);
    cell[a] = i;
    frac[a] = g - i;
  }
  for (int k = 0; k < 8; ++k) {
    const int ox = k & 1;
    const int oy = (k >> 1) & 1;
    const int oz = (k >> 2) & 1;
    out.index[k] = vertex_index(cell[0] + ox, cell[1] + oy, cell[2] + oz);
    out.weight[k] = (ox ? frac[0] : 1.0 - frac[0]) * (oy ? frac[1] : 1.0 - frac[1]) * (oz ? frac[2] : 1.0 - frac[2]);
  }
  return true;
}

namespace {

inline void interpolate(const TrilinearStencil& st, const std::vector<double>& density, const std::vector<double>& rgb,
                        double& raw_d, Vec3& raw_c) {
  raw_d = 0.0;
  raw_c.setZero();
  for (int k = 0; k < 8; ++k) {
    const double w = st.weight[k];
    const std::size_t i = static_cast<std::size_t>(st.index[k]);
    raw_d += w * density[i];
    raw_c.x() += w * rgb[3 * i];
    raw_c.y() += w * rgb[3 * i + 1];
    raw_c.z() += w * rgb[3 * i + 2];
  }
}

}  // namespace

FieldSample VoxelField::query(const Vec3& position) const {
  TrilinearStencil st;
  if (!stencil(position, st)) return {};
  double raw_d;
  Vec3 raw_c;
  interpolate(st, raw_density_, raw_rgb_, raw_d, raw_c);
  FieldSample s;
  s.sigma = softplus(raw_d);
  s.rgb = Vec3(logistic(raw_c.x()), logistic(raw_c.y()), logistic(raw_c.z()));
  return s;
}

FieldSampleGrad VoxelField::query_with_grads(const Vec3& position) const {
  FieldSampleGrad out;
  if (!stencil(position, out.stencil)) return out;
  out.inside = true;
  double raw_d;
  Vec3 raw_c;
  interpolate(out.stencil, raw_density_, raw_rgb_, raw_d, raw_c);
  out.value.sigma = softplus(raw_d);
  out.value.rgb = Vec3(logistic(raw_c.x()), logistic(raw_c.y()), logistic(raw_c.z()));
  out.dsigma_draw = logistic(raw_d);
  out.drgb_draw = out.value.rgb.cwiseProduct(Vec3::Ones() - out.value.rgb);
  return out;
}

void VoxelField::sgd_step(GradientBuffer& grads, double lr, double density_scale) {
  if (grads.density().size() != raw_density_.size() || grads.rgb().size() != raw_rgb_.size())
    throw std::invalid_argument("gradient buffer does not match the field");
  if (!grads.all_finite()) throw NumericError("non-finite gradient, optimizer step aborted");
  const auto gd = grads.density();
  const auto gc = grads.rgb();
  const std::int64_t n = static_cast<std::int64_t>(raw_density_.size());
  const double lr_density = lr * density_scale;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    raw_density_[i] -= lr_density * gd[i];
    raw_rgb_[3 * i] -= lr * gc[3 * i];
    raw_rgb_[3 * i + 1] -= lr * gc[3 * i + 1];
    raw_rgb_[3 * i + 2] -= lr * gc[3 * i + 2];
  }
  grads.zero();
}

}  // namespace fewrays
