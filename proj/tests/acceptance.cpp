// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fewrays/cli.hpp"
#include "fewrays/config.hpp"
#include "fewrays/context.hpp"
#include "fewrays/metrics.hpp"
#include "fewrays/quadtree.hpp"
#include "fewrays/render.hpp"
#include "fewrays/scene.hpp"
#include "oracle.hpp"

using namespace fewrays;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
std::map<int, std::string> results;

void report(int id, bool pass, const std::string& detail) {
  results[id] = std::string(pass ? "PASS" : "FAIL") + "  " + detail;
  if (!pass) ++failures;
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

VoxelField random_field(int d, std::mt19937_64& rng) {
  VoxelField f(d, Aabb{});
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : f.raw_density()) x = n(rng) + 0.5;
  for (double& x : f.raw_rgb()) x = 2.0 * n(rng);
  return f;
}

Ray random_ray(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Ray r;
  r.origin = Vec3(u(rng), u(rng), u(rng)).normalized() * 2.2;
  const Vec3 aim(0.4 * u(rng), 0.4 * u(rng), 0.4 * u(rng));
  r.direction = (aim - r.origin).normalized();
  return r;
}

void bench_criteria() {
  const fs::path out = fs::temp_directory_path() / "fewrays_acceptance" / "bench";
  fs::remove_all(out);
  const RunConfig config =
      parse_run_config(nlohmann::json{{"output_dir", out.string()}, {"scene", nlohmann::json::object()}, {"overlays", false}});
  std::ostringstream log;
  const auto start = Clock::now();
  const BenchOutcome o = bench_command(config, log);
  const double seconds = since(start);
  const BenchSummary& s = o.summary;

  // 1: fewer rays at comparable quality.
  report(1, s.ray_reduction >= 0.20 && s.delta_psnr >= -0.5,
         fmt("rays %lld vs %lld (%.1f%% fewer), test PSNR %.3f vs %.3f dB (delta %+.3f), time %.1f vs %.1f s",
             static_cast<long long>(s.adaptive_rays), static_cast<long long>(s.baseline_rays),
             100.0 * s.ray_reduction, s.adaptive_psnr, s.baseline_psnr, s.delta_psnr, s.adaptive_seconds,
             s.baseline_seconds));

  // 2: leaf marking after two rounds, judged against ground-truth opacity.
  const Dataset& ds = o.dataset;
  const SceneSpec& spec = *config.scene;
  const AnalyticField gt(spec.primitives);
  const RaySampling gs{.n_samples = spec.gt_samples, .near = spec.near, .far = spec.far};
  int bg = 0, bg_marked = 0, edge_high = 0, edge_high_marked = 0;
  const double a = config.train.sampler.threshold;
  if (o.adaptive.rounds.size() >= 2) {
    for (const SubdivisionReport& r : o.adaptive.rounds[1]) {
      const ScalarMap opacity = render_opacity(gt, ds.cameras[r.view], gs);
      for (const LeafDecision& leaf : r.leaves) {
        bool any = false, all = true;
        for (int u = leaf.bounds.u0; u < leaf.bounds.u1; ++u)
          for (int v = leaf.bounds.v0; v < leaf.bounds.v1; ++v) {
            const bool hit = opacity.at(u, v) > 0.0;
            any = any || hit;
            all = all && hit;
          }
        const bool marked = leaf.decision == Decision::Marked || leaf.decision == Decision::AlreadyMarked;
        if (!any) {
          ++bg;
          bg_marked += marked;
        } else if (!all && leaf.mean_error && *leaf.mean_error >= a) {
          ++edge_high;
          edge_high_marked += marked;
        }
      }
    }
  }
  report(2, bg > 0 && bg_marked == bg && edge_high_marked == 0,
         fmt("background leaves marked %d/%d, silhouette leaves with e_F >= a marked %d/%d, rounds %zu",
             bg_marked, bg, edge_high_marked, edge_high, o.adaptive.rounds.size()));

  // 7: per-epoch counts after the first round, and the all-pixel epoch.
  const auto& logs = o.adaptive.logs;
  int first_round_epoch = -1;
  for (const EpochLog& e : logs)
    if (e.subdivision_round == 1) first_round_epoch = e.epoch;
  bool monotone = first_round_epoch >= 0;
  for (std::size_t e = first_round_epoch + 2; e + 1 < logs.size(); ++e)
    monotone = monotone && logs[e].rays_drawn <= logs[e - 1].rays_drawn;
  bool all_pixel = !logs.empty();
  if (all_pixel) {
    const EpochLog& last = logs.back();
    std::int64_t pixels = 0;
    for (int view : ds.train) pixels += static_cast<std::int64_t>(ds.images[view].pixel_count());
    all_pixel = last.by_state.all_pixel == pixels && last.rays_drawn == pixels;
  }
  std::string counts;
  for (const EpochLog& e : logs) counts += (counts.empty() ? "" : " ") + std::to_string(e.rays_drawn);
  report(7, monotone && all_pixel, "per-epoch rays: " + counts);
  std::printf("bench wall time %.1f s\n", seconds);
}

void gradient_criterion() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> res(2, 8);
  const double h = 1e-4;
  int violations = 0;
  long checked = 0;
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    VoxelField f = random_field(res(rng), rng);
    const Ray ray = random_ray(rng);
    const Vec3 target(u01(rng), u01(rng), u01(rng));
    const RaySampling s{.n_samples = 32, .jitter = true};
    RayGradient rg;
    render_ray_backward(f, ray, s, target, rg, pair);
    GradientBuffer g = f.make_gradient_buffer();
    accumulate(g, rg);
    auto check = [&](std::span<double> params, std::span<const double> analytic) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = ray_loss(f, ray, s, target, pair);
        params[i] = saved - h;
        const double down = ray_loss(f, ray, s, target, pair);
        params[i] = saved;
        const double fd = (up - down) / (2 * h);
        const double err = std::abs(fd - analytic[i]);
        const double tol = std::max(1e-3 * std::abs(analytic[i]), 1e-8);
        worst = std::max(worst, err / tol);
        violations += err > tol;
        ++checked;
      }
    };
    check(f.raw_density(), g.density());
    check(f.raw_rgb(), g.rgb());
  }
  report(3, violations == 0,
         fmt("%d violations over %ld parameters in 100 pairs, worst error/tolerance %.2e", violations, checked, worst));
}

void conservation_criterion() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> res(2, 16);
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const VoxelField f = random_field(res(rng), rng);
    const RenderResult r = render_ray(f, random_ray(rng), RaySampling{.n_samples = 64, .jitter = true}, i);
    double sum = r.residual;
    for (std::size_t j = 0; j < r.weights.size(); ++j) {
      sum += r.weights[j];
      if (j > 0 && r.transmittance[j] > r.transmittance[j - 1]) ++violations;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) > 1e-9) ++violations;
  }
  report(4, violations == 0, fmt("%d violations over 1000 rays, max |sum - 1| %.2e", violations, worst));
}

void probability_map_criterion() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 32);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Image img = oracle::random_image(size(rng), size(rng), rng);
    for (auto kind : {ContextKind::StdDev, ContextKind::Variance, ContextKind::Entropy})
      for (int patch : {3, 5, 7, 9}) {
        const auto ref = oracle::context_map(img, kind, patch);
        const ScalarMap g = context_map(img, {kind, patch});
        const auto ref_p = oracle::normalize(ref);
        const ProbabilityMap p = normalize(g);
        for (std::size_t k = 0; k < ref.size(); ++k) {
          worst = std::max(worst, std::abs(g.values[k] - ref[k]));
          worst = std::max(worst, std::abs(p.weights()[k] - ref_p[k]));
        }
      }
  }
  Image hot(3, 3, 0.0);
  hot.at(1, 1, 0) = 1.0;
  const double single = context_map(hot, {ContextKind::StdDev, 3}).at(1, 1);
  const double expected = 2.0 * std::numbers::sqrt2 / 9.0;
  report(5, worst <= 1e-9 && std::abs(single - expected) <= 1e-12,
         fmt("max deviation from the naive loop %.2e, single-hot value %.15f (expected %.15f)", worst, single, expected));
}

void quadtree_criterion() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> side(1, 64), depth(0, 3), n0(1, 16), mins(1, 3), rounds(1, 8);
  std::uniform_real_distribution<double> err(0.0, 3e-3), coin(0.0, 1.0);
  int partition = 0, permanence = 0, min_size = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SamplerConfig c;
    c.init_depth = depth(rng);
    c.n0 = n0(rng);
    c.min_node_size = mins(rng);
    const int h = std::max(side(rng), 1 << c.init_depth), w = std::max(side(rng), 1 << c.init_depth);
    QuadTree t = QuadTree::build(0, h, w, c);
    std::vector<int> marked;
    const int n = rounds(rng);
    for (int round = 0; round < n; ++round) {
      for (int l : t.leaves()) {
        const PixelRect& b = t.node(l).bounds;
        const int draws = static_cast<int>(coin(rng) * 4);
        std::uniform_int_distribution<int> pu(b.u0, b.u1 - 1), pv(b.v0, b.v1 - 1);
        for (int k = 0; k < draws; ++k) t.record_error(pu(rng), pv(rng), err(rng));
      }
      const SubdivisionReport r = t.subdivide(c);
      for (const LeafDecision& leaf : r.leaves)
        if (leaf.decision == Decision::Split) {
          const QuadNode& node = t.node(leaf.node);
          for (int k = 0; k < 4; ++k) {
            const PixelRect& cb = t.node(node.first_child + k).bounds;
            if (cb.rows() < c.min_node_size || cb.cols() < c.min_node_size) ++min_size;
          }
        }
      for (int m : marked)
        if (t.node(m).state != NodeState::Marked) ++permanence;
      marked.clear();
      for (int l : t.leaves())
        if (t.node(l).state == NodeState::Marked) marked.push_back(l);

      std::vector<int> owner(static_cast<std::size_t>(h) * w, -1);
      for (int l : t.leaves()) {
        const PixelRect& b = t.node(l).bounds;
        if (b.area() <= 0) ++partition;
        for (int u = b.u0; u < b.u1; ++u)
          for (int v = b.v0; v < b.v1; ++v) {
            int& o = owner[static_cast<std::size_t>(u) * w + v];
            if (o != -1) ++partition;
            o = l;
          }
      }
      for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v)
          if (owner[static_cast<std::size_t>(u) * w + v] != t.leaf_at(u, v)) ++partition;
    }
  }

  SamplerConfig c;
  c.init_depth = 1;
  c.n0 = 10;
  QuadTree t = QuadTree::build(0, 16, 16, c);
  t.record_error(0, 0, 0.0);
  t.subdivide(c);
  const RayBudget b = t.budget(c);
  const std::int64_t closed = 3 * 64 + 10 * 1;
  report(6, partition == 0 && permanence == 0 && min_size == 0 && b.total == closed && closed == 202,
         fmt("1000 trials: %d partition, %d permanence, %d min-size violations; 16x16 Q1=3 Q2=1 budget %lld",
             partition, permanence, min_size, static_cast<long long>(b.total)));
}

void metric_criterion() {
  const double p = psnr_from_mse(0.01);
  std::mt19937_64 rng(8);
  const Image same = oracle::random_image(32, 24, rng);
  const double s_same = ssim(same, same);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Image a = oracle::random_image(24 + i, 20 + i, rng);
    Image b = a;
    std::normal_distribution<double> noise(0.0, 0.1 * (i + 1) / 20.0);
    for (double& x : b.data()) x = std::clamp(x + noise(rng), 0.0, 1.0);
    worst = std::max(worst, std::abs(ssim(a, b) - oracle::ssim(a, b)));
  }
  report(8, p == 20.0 && s_same == 1.0 && worst <= 1e-6,
         fmt("PSNR(0.01) = %.17g, SSIM(x, x) = %.17g, max SSIM deviation %.2e", p, s_same, worst));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  bench_criteria();
  gradient_criterion();
  conservation_criterion();
  probability_map_criterion();
  quadtree_criterion();
  metric_criterion();
  for (const auto& [id, line] : results) std::printf("criterion %d: %s\n", id, line.c_str());
  std::printf("total %.1f s, %d criteria failed\n", since(start), failures);
  return failures == 0 ? 0 : 1;
}
