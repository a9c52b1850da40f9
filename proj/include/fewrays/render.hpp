#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fewrays/camera.hpp"
#include "fewrays/field.hpp"
#include "fewrays/image.hpp"

namespace fewrays {

class AnalyticField;

enum class Background { White, Black, None };

/// Per-ray quadrature along [near, far].
struct RaySampling {
  int n_samples = 128;
  double near = 0.1;
  double far = 4.0;
  bool jitter = false;  // stratified random offsets; midpoints when off
  Background background = Background::White;

  /// Throws std::invalid_argument unless n_samples >= 2 and 0 <= near < far.
  void validate() const;
  Vec3 background_color() const;
};

/// Sample distances t_j and spacings delta_j (last delta = far - t_N).
/// With jitter, offsets are drawn from a stream seeded by `jitter_seed`.
void sample_distances(const RaySampling& sampling, std::uint64_t jitter_seed, std::span<double> t,
                      std::span<double> delta);

struct RenderResult {
  Vec3 color = Vec3::Zero();
  std::vector<double> weights;        // w_j = T_j alpha_j
  std::vector<double> transmittance;  // T_j, T_0 = 1
  double opacity = 0.0;               // sum of weights
  double residual = 1.0;              // transmittance past the last sample
};

/// Forward volume rendering with alpha compositing:
///   alpha_j = 1 - exp(-sigma_j delta_j),  T_j = prod_{k<j} (1 - alpha_k),
///   color = sum_j T_j alpha_j c_j + T_N * background.
template <class Field>
RenderResult render_ray(const Field& field, const Ray& ray, const RaySampling& sampling,
                        std::uint64_t jitter_seed = 0);

/// Same composite without keeping per-sample arrays.
template <class Field>
Vec3 render_color(const Field& field, const Ray& ray, const RaySampling& sampling, std::uint64_t jitter_seed = 0);

/// Gradient of one ray's loss w.r.t. the interpolated raw values at each
/// in-bounds sample. Scattered into a GradientBuffer by accumulate().
struct SampleGradient {
  TrilinearStencil stencil;
  double d_raw_density = 0.0;
  Vec3 d_raw_rgb = Vec3::Zero();
};

struct RayGradient {
  std::vector<SampleGradient> samples;
  void clear() { samples.clear(); }
};

struct BackwardResult {
  double loss = 0.0;  // ||color - target||^2
  Vec3 color = Vec3::Zero();
};

/// Forward pass plus exact reverse-mode gradients of ||color - target||^2.
/// The returned loss is bit-identical to ray_loss() for the same inputs.
/// Throws NumericError on a non-finite intermediate.
BackwardResult render_ray_backward(const VoxelField& field, const Ray& ray, const RaySampling& sampling,
                                   const Vec3& target, RayGradient& out, std::uint64_t jitter_seed = 0);

double ray_loss(const VoxelField& field, const Ray& ray, const RaySampling& sampling, const Vec3& target,
                std::uint64_t jitter_seed = 0);

/// grads[vertex] += weight * d_raw for every stencil corner, in sample order.
void accumulate(GradientBuffer& grads, const RayGradient& gradient, double scale = 1.0);

/// One batch of rays: per-ray backward in parallel, then a scatter into the
/// buffer in ray order, so the result does not depend on the thread count.
/// `scratch` is resized to the batch and reused between calls.
/// Returns per-ray losses through `losses`.
void batch_backward(const VoxelField& field, std::span<const Ray> rays, const RaySampling& sampling,
                    std::span<const std::uint64_t> jitter_seeds, std::vector<RayGradient>& scratch,
                    std::span<double> losses, GradientBuffer& grads);
void batch_backward_serial(const VoxelField& field, std::span<const Ray> rays, const RaySampling& sampling,
                           std::span<const std::uint64_t> jitter_seeds, std::vector<RayGradient>& scratch,
                           std::span<double> losses, GradientBuffer& grads);

/// Renders every pixel (jitter is ignored: midpoints), rows in parallel.
template <class Field>
Image render_view(const Field& field, const Camera& camera, const RaySampling& sampling);
template <class Field>
Image render_view_serial(const Field& field, const Camera& camera, const RaySampling& sampling);

/// Per-pixel accumulated opacity (midpoint sampling).
template <class Field>
ScalarMap render_opacity(const Field& field, const Camera& camera, const RaySampling& sampling);

}  // namespace fewrays
