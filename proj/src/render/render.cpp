#include "fewrays/render.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fewrays/errors.hpp"
#include "fewrays/random.hpp"
#include "fewrays/scene.hpp"

namespace fewrays {

void RaySampling::validate() const {
  if (n_samples < 2) throw std::invalid_argument("ray sampling needs at least 2 samples");
  if (!(near >= 0.0) || !(near < far)) throw std::invalid_argument("ray sampling needs 0 <= near < far");
}

Vec3 RaySampling::background_color() const {
  return background == Background::White ? Vec3::Ones() : Vec3::Zero();
}

void sample_distances(const RaySampling& sampling, std::uint64_t jitter_seed, std::span<double> t,
                      std::span<double> delta) {
  const int n = sampling.n_samples;
  const double step = (sampling.far - sampling.near) / n;
  SplitMixStream stream(jitter_seed);
  for (int j = 0; j < n; ++j) {
    const double offset = sampling.jitter ? stream.uniform() : 0.5;
    t[j] = sampling.near + (j + offset) * step;
  }
  for (int j = 0; j + 1 < n; ++j) delta[j] = t[j + 1] - t[j];
  delta[n - 1] = sampling.far - t[n - 1];
}

namespace {

struct DistanceScratch {
  std::vector<double> t;
  std::vector<double> delta;
  void resize(int n) {
    t.resize(n);
    delta.resize(n);
  }
};

DistanceScratch& distance_scratch(int n) {
  thread_local DistanceScratch scratch;
  scratch.resize(n);
  return scratch;
}

}  // namespace

template <class Field>
RenderResult render_ray(const Field& field, const Ray& ray, const RaySampling& sampling, std::uint64_t jitter_seed) {
  const int n = sampling.n_samples;
  auto& d = distance_scratch(n);
  sample_distances(sampling, jitter_seed, d.t, d.delta);

  RenderResult result;
  result.weights.resize(n);
  result.transmittance.resize(n);
  double transmittance = 1.0;
  Vec3 color = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    const FieldSample s = field.query(ray.origin + d.t[j] * ray.direction);
    const double alpha = 1.0 - std::exp(-s.sigma * d.delta[j]);
    const double w = transmittance * alpha;
    result.transmittance[j] = transmittance;
    result.weights[j] = w;
    color += w * s.rgb;
    transmittance *= 1.0 - alpha;
  }
  result.residual = transmittance;
  result.opacity = 0.0;
  for (double w : result.weights) result.opacity += w;
  result.color = color + transmittance * sampling.background_color();
  return result;
}

template <class Field>
Vec3 render_color(const Field& field, const Ray& ray, const RaySampling& sampling, std::uint64_t jitter_seed) {
  const int n = sampling.n_samples;
  auto& d = distance_scratch(n);
  sample_distances(sampling, jitter_seed, d.t, d.delta);

  double transmittance = 1.0;
  Vec3 color = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    const FieldSample s = field.query(ray.origin + d.t[j] * ray.direction);
    const double alpha = 1.0 - std::exp(-s.sigma * d.delta[j]);
    const double w = transmittance * alpha;
    color += w * s.rgb;
    transmittance *= 1.0 - alpha;
  }
  return color + transmittance * sampling.background_color();
}

namespace {

struct SampleRecord {
  FieldSampleGrad q;
  double alpha;
  double weight;
  double next_transmittance;  // T_{j+1}
  double delta;
};

double squared_error(const Vec3& color, const Vec3& target) { return (color - target).squaredNorm(); }

}  // namespace

double ray_loss(const VoxelField& field, const Ray& ray, const RaySampling& sampling, const Vec3& target,
                std::uint64_t jitter_seed) {
  return squared_error(render_color(field, ray, sampling, jitter_seed), target);
}

BackwardResult render_ray_backward(const VoxelField& field, const Ray& ray, const RaySampling& sampling,
                                   const Vec3& target, RayGradient& out, std::uint64_t jitter_seed) {
  const int n = sampling.n_samples;
  auto& d = distance_scratch(n);
  sample_distances(sampling, jitter_seed, d.t, d.delta);

  thread_local std::vector<SampleRecord> records;
  records.resize(n);

  double transmittance = 1.0;
  Vec3 color = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    SampleRecord& rec = records[j];
    rec.q = field.query_with_grads(ray.origin + d.t[j] * ray.direction);
    rec.delta = d.delta[j];
    rec.alpha = 1.0 - std::exp(-rec.q.value.sigma * d.delta[j]);
    rec.weight = transmittance * rec.alpha;
    color += rec.weight * rec.q.value.rgb;
    transmittance *= 1.0 - rec.alpha;
    rec.next_transmittance = transmittance;
  }
  const Vec3 background = sampling.background_color();
  color = color + transmittance * background;

  BackwardResult result;
  result.color = color;
  result.loss = squared_error(color, target);
  if (!std::isfinite(result.loss))
    throw NumericError("non-finite loss on ray (view " + std::to_string(ray.view) + ", pixel " +
                       std::to_string(ray.u) + "," + std::to_string(ray.v) + ")");

  const Vec3 d_color = 2.0 * (color - target);
  // suffix = sum_{k>j} w_k c_k + T_N * background
  Vec3 suffix = transmittance * background;
  out.clear();
  for (int j = n - 1; j >= 0; --j) {
    const SampleRecord& rec = records[j];
    if (rec.q.inside) {
      const double d_tau = d_color.dot(rec.next_transmittance * rec.q.value.rgb - suffix);
      SampleGradient g;
      g.stencil = rec.q.stencil;
      g.d_raw_density = d_tau * rec.delta * rec.q.dsigma_draw;
      g.d_raw_rgb = (rec.weight * d_color).cwiseProduct(rec.q.drgb_draw);
      if (!std::isfinite(g.d_raw_density) || !g.d_raw_rgb.allFinite())
        throw NumericError("non-finite gradient on ray (view " + std::to_string(ray.view) + ", pixel " +
                           std::to_string(ray.u) + "," + std::to_string(ray.v) + ")");
      out.samples.push_back(g);
    }
    suffix += rec.weight * rec.q.value.rgb;
  }
  return result;
}

void accumulate(GradientBuffer& grads, const RayGradient& gradient, double scale) {
  auto density = grads.density();
  auto rgb = grads.rgb();
  for (const SampleGradient& g : gradient.samples) {
    const double dd = scale * g.d_raw_density;
    const Vec3 dc = scale * g.d_raw_rgb;
    for (int k = 0; k < 8; ++k) {
      const double w = g.stencil.weight[k];
      const std::int64_t i = g.stencil.index[k];
      density[i] += w * dd;
      rgb[3 * i] += w * dc.x();
      rgb[3 * i + 1] += w * dc.y();
      rgb[3 * i + 2] += w * dc.z();
    }
  }
}

namespace {

void check_batch(std::span<const Ray> rays, std::span<const std::uint64_t> seeds, std::span<double> losses) {
  if (seeds.size() != rays.size() || losses.size() != rays.size())
    throw std::invalid_argument("batch_backward: rays, seeds and losses must have equal length");
}

}  // namespace

void batch_backward(const VoxelField& field, std::span<const Ray> rays, const RaySampling& sampling,
                    std::span<const std::uint64_t> jitter_seeds, std::vector<RayGradient>& scratch,
                    std::span<double> losses, GradientBuffer& grads) {
  check_batch(rays, jitter_seeds, losses);
  if (scratch.size() < rays.size()) scratch.resize(rays.size());
  const std::int64_t count = static_cast<std::int64_t>(rays.size());

  // Exceptions must not escape the parallel region; keep the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      losses[i] = render_ray_backward(field, rays[i], sampling, rays[i].target, scratch[i], jitter_seeds[i]).loss;
    } catch (...) {
#pragma omp critical(fewrays_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::int64_t i = 0; i < count; ++i) accumulate(grads, scratch[i]);
}

void batch_backward_serial(const VoxelField& field, std::span<const Ray> rays, const RaySampling& sampling,
                           std::span<const std::uint64_t> jitter_seeds, std::vector<RayGradient>& scratch,
                           std::span<double> losses, GradientBuffer& grads) {
  check_batch(rays, jitter_seeds, losses);
  if (scratch.size() < rays.size()) scratch.resize(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i)
    losses[i] = render_ray_backward(field, rays[i], sampling, rays[i].target, scratch[i], jitter_seeds[i]).loss;
  for (std::size_t i = 0; i < rays.size(); ++i) accumulate(grads, scratch[i]);
}

template <class Field>
Image render_view(const Field& field, const Camera& camera, const RaySampling& sampling) {
  RaySampling midpoints = sampling;
  midpoints.jitter = false;
  Image image(camera.width, camera.height);
  const int height = camera.height;
#pragma omp parallel for schedule(dynamic, 1)
  for (int u = 0; u < height; ++u)
    for (int v = 0; v < camera.width; ++v) image.set_pixel(u, v, render_color(field, pixel_ray(camera, u, v), midpoints));
  return image;
}

template <class Field>
Image render_view_serial(const Field& field, const Camera& camera, const RaySampling& sampling) {
  RaySampling midpoints = sampling;
  midpoints.jitter = false;
  Image image(camera.width, camera.height);
  for (int u = 0; u < camera.height; ++u)
    for (int v = 0; v < camera.width; ++v) image.set_pixel(u, v, render_color(field, pixel_ray(camera, u, v), midpoints));
  return image;
}

template <class Field>
ScalarMap render_opacity(const Field& field, const Camera& camera, const RaySampling& sampling) {
  RaySampling midpoints = sampling;
  midpoints.jitter = false;
  ScalarMap opacity(camera.width, camera.height);
  const int height = camera.height;
#pragma omp parallel for schedule(dynamic, 1)
  for (int u = 0; u < height; ++u)
    for (int v = 0; v < camera.width; ++v)
      opacity.at(u, v) = render_ray(field, pixel_ray(camera, u, v), midpoints).opacity;
  return opacity;
}

#define FEWRAYS_INSTANTIATE_RENDER(Field)                                                              \
  template RenderResult render_ray<Field>(const Field&, const Ray&, const RaySampling&, std::uint64_t); \
  template Vec3 render_color<Field>(const Field&, const Ray&, const RaySampling&, std::uint64_t);       \
  template Image render_view<Field>(const Field&, const Camera&, const RaySampling&);                   \
  template Image render_view_serial<Field>(const Field&, const Camera&, const RaySampling&);            \
  template ScalarMap render_opacity<Field>(const Field&, const Camera&, const RaySampling&);

FEWRAYS_INSTANTIATE_RENDER(VoxelField)
FEWRAYS_INSTANTIATE_RENDER(AnalyticField)

#undef FEWRAYS_INSTANTIATE_RENDER

}  // namespace fewrays
