#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>

#include "fewrays/config.hpp"
#include "fewrays/context.hpp"
#include "fewrays/trainer.hpp"

namespace fewrays {

/// Writes the normalized probability map of one image as a grayscale PNG
/// (weight 1 -> 255).
void probmap_command(const std::filesystem::path& image, const ContextMetric& metric,
                     const std::filesystem::path& out);

/// Trains with the quadtree sampler and writes under config.output_dir:
/// config.json, checkpoint.bin, epochs.csv, timing.csv, eval.csv,
/// leaves_round<r>.csv and, with overlays on, rays_round<r>_view<v>.png and
/// error_round<r>_view<v>.png.
TrainResult train_command(const RunConfig& config, std::ostream& log);

struct BenchSummary {
  std::int64_t baseline_rays = 0;
  std::int64_t adaptive_rays = 0;
  double ray_reduction = 0.0;  // 1 - adaptive / baseline
  double baseline_seconds = 0.0;
  double adaptive_seconds = 0.0;
  double time_reduction = 0.0;
  double baseline_psnr = 0.0;
  double adaptive_psnr = 0.0;
  double delta_psnr = 0.0;  // adaptive - baseline
  double baseline_ssim = 0.0;
  double adaptive_ssim = 0.0;
};

struct BenchOutcome {
  Dataset dataset;
  TrainResult baseline;
  TrainResult adaptive;
  BenchSummary summary;
};

/// Runs both arms on the same data and seed; writes bench.csv (per arm and
/// epoch) and bench_summary.csv under config.output_dir.
BenchOutcome bench_command(const RunConfig& config, std::ostream& log);

struct RenderRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir;
  std::optional<RunConfig> config;              // renders its test split
  std::optional<std::filesystem::path> cameras;  // or a transforms file
  int width = 64;
  int height = 64;
};

/// Writes view_<i>.png per camera. With a config, also scores against the
/// test images, writes render_eval.csv and returns the evaluation.
std::optional<EvalResult> render_command(const RenderRequest& request, std::ostream& log);

/// Subcommands probmap, train, bench, render. Returns the process exit code:
/// 0 ok, 2 usage or config, 3 data or checkpoint, 4 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace fewrays
