// Serial vs OpenMP timings of the data-parallel kernels.
#include <random>

#include <benchmark/benchmark.h>

#include "fewrays/camera.hpp"
#include "fewrays/context.hpp"
#include "fewrays/metrics.hpp"
#include "fewrays/render.hpp"

using namespace fewrays;

namespace {

Image noise_image(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(size, size);
  for (double& x : img.data()) x = u(rng);
  return img;
}

VoxelField noise_field(int d) {
  VoxelField f(d, Aabb{});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : f.raw_density()) x = n(rng);
  for (double& x : f.raw_rgb()) x = n(rng);
  return f;
}

struct RayBatch {
  std::vector<Ray> rays;
  std::vector<std::uint64_t> seeds;
};

RayBatch ray_batch(int n) {
  const Camera cam = look_at(Vec3(2.0, -1.5, 0.8), Vec3::Zero(), 64, 64, 0.69, 0.1, 4.0);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> px(0, 63);
  RayBatch b;
  for (int i = 0; i < n; ++i) {
    Ray r = pixel_ray(cam, px(rng), px(rng));
    r.target = Vec3(0.5, 0.5, 0.5);
    b.rays.push_back(r);
    b.seeds.push_back(i);
  }
  return b;
}

template <bool Serial>
void BM_context_map(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)), 3);
  const ContextMetric m{ContextKind::Entropy, 5};
  for (auto _ : state) benchmark::DoNotOptimize(Serial ? context_map_serial(img, m) : context_map(img, m));
}

template <bool Serial>
void BM_render_view(benchmark::State& state) {
  const VoxelField f = noise_field(32);
  const Camera cam = look_at(Vec3(2.0, -1.5, 0.8), Vec3::Zero(), 64, 64, 0.69, 0.1, 4.0);
  const RaySampling s{.n_samples = 128};
  for (auto _ : state) benchmark::DoNotOptimize(Serial ? render_view_serial(f, cam, s) : render_view(f, cam, s));
}

template <bool Serial>
void BM_batch_backward(benchmark::State& state) {
  const VoxelField f = noise_field(32);
  const RayBatch b = ray_batch(4096);
  const RaySampling s{.n_samples = 128, .jitter = true};
  std::vector<RayGradient> scratch;
  std::vector<double> losses(b.rays.size());
  GradientBuffer g = f.make_gradient_buffer();
  for (auto _ : state) {
    if (Serial) batch_backward_serial(f, b.rays, s, b.seeds, scratch, losses, g);
    else batch_backward(f, b.rays, s, b.seeds, scratch, losses, g);
    benchmark::DoNotOptimize(losses.data());
  }
}

template <bool Serial>
void BM_ssim(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image a = noise_image(n, 4), b = noise_image(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Serial ? ssim_serial(a, b) : ssim(a, b));
}

}  // namespace

BENCHMARK(BM_context_map<true>)->Name("context_map/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_context_map<false>)->Name("context_map/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_render_view<true>)->Name("render_view/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_render_view<false>)->Name("render_view/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_backward<true>)->Name("batch_backward/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_backward<false>)->Name("batch_backward/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ssim<true>)->Name("ssim/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_ssim<false>)->Name("ssim/omp")->Arg(64)->Arg(256);

BENCHMARK_MAIN();
