#include "fewrays/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fewrays/diagnostics.hpp"
#include "fewrays/errors.hpp"
#include "fewrays/png_io.hpp"
#include "fewrays/render.hpp"

namespace fewrays {
namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void prepare_output_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw DataError("cannot create " + config.output_dir.string() + ": " + ec.message());
  auto out = open_output(config.output_dir / "config.json");
  out << to_json(config).dump(2) << "\n";
}

void print_epoch(std::ostream& log, const char* arm, const EpochLog& e) {
  log << arm << " epoch " << e.epoch << ": rays " << e.rays_drawn << ", loss " << std::setprecision(6) << e.mean_loss
      << ", lr " << e.lr;
  if (e.eval) log << ", test psnr " << e.eval->mean_psnr << " ssim " << e.eval->mean_ssim;
  log << ", " << std::setprecision(3) << e.seconds << " s\n";
}

}  // namespace

void probmap_command(const fs::path& image, const ContextMetric& metric, const fs::path& out) {
  metric.validate();
  const ProbabilityMap map = probability_map(load_png(image), metric);
  save_png_gray(to_scalar_map(map), out);
}

TrainResult train_command(const RunConfig& config, std::ostream& log) {
  prepare_output_dir(config);
  apply_thread_setting(config);
  const Dataset dataset = load_run_dataset(config);
  VoxelField field = make_initial_field(config);
  const auto priors = train_priors(dataset, config.train.context);

  TrainObserver observer;
  observer.on_epoch = [&](const EpochLog& e) { print_epoch(log, "train", e); };
  observer.on_subdivision = [&](int round, int epoch, std::span<const SubdivisionReport> reports,
                                std::span<const PixelDraw> draws) {
    const std::string r = std::to_string(round);
    auto csv = open_output(config.output_dir / ("leaves_round" + r + ".csv"));
    write_leaf_csv_header(csv);
    int marked = 0;
    for (const auto& report : reports) {
      write_leaf_csv_rows(csv, report);
      marked += report.marked;
    }
    log << "subdivision round " << round << " after epoch " << epoch << ": " << marked << " leaves marked\n";
    if (!config.overlays) return;
    for (const auto& report : reports) {
      const Image& image = dataset.images[report.view];
      const std::string v = std::to_string(report.view);
      save_png(ray_overlay(image, report, draws), config.output_dir / ("rays_round" + r + "_view" + v + ".png"));
      save_png(error_overlay(image.height(), image.width(), report),
               config.output_dir / ("error_round" + r + "_view" + v + ".png"));
    }
  };

  TrainResult result = train(dataset, priors, field, config.train, &observer);
  save_checkpoint(field, config.output_dir / "checkpoint.bin");

  auto epochs = open_output(config.output_dir / "epochs.csv");
  write_epoch_csv_header(epochs);
  for (const auto& e : result.logs) write_epoch_csv_row(epochs, e);

  auto timing = open_output(config.output_dir / "timing.csv");
  timing << "epoch,seconds\n";
  for (const auto& e : result.logs) timing << e.epoch << ',' << e.seconds << '\n';

  if (!result.logs.empty() && result.logs.back().eval) {
    const EvalResult& ev = *result.logs.back().eval;
    auto eval = open_output(config.output_dir / "eval.csv");
    eval << "view,psnr,ssim\n";
    for (std::size_t i = 0; i < dataset.test.size(); ++i)
      eval << dataset.test[i] << ',' << ev.psnr[i] << ',' << ev.ssim[i] << '\n';
    eval << "mean," << ev.mean_psnr << ',' << ev.mean_ssim << '\n';
  }
  log << "trained " << result.total_rays << " rays in " << std::setprecision(3) << result.seconds << " s\n";
  return result;
}

BenchOutcome bench_command(const RunConfig& config, std::ostream& log) {
  prepare_output_dir(config);
  apply_thread_setting(config);
  BenchOutcome outcome;
  outcome.dataset = load_run_dataset(config);
  const Dataset& dataset = outcome.dataset;

  TrainObserver base_obs;
  base_obs.on_epoch = [&](const EpochLog& e) { print_epoch(log, "baseline", e); };
  VoxelField base_field = make_initial_field(config);
  outcome.baseline = baseline_uniform_train(dataset, base_field, config.train, &base_obs);

  TrainObserver adapt_obs;
  adapt_obs.on_epoch = [&](const EpochLog& e) { print_epoch(log, "adaptive", e); };
  VoxelField adapt_field = make_initial_field(config);
  outcome.adaptive =
      train(dataset, train_priors(dataset, config.train.context), adapt_field, config.train, &adapt_obs);

  auto csv = open_output(config.output_dir / "bench.csv");
  csv << "arm,epoch,rays,wall_seconds,test_psnr,test_ssim\n";
  for (const auto& [name, result] : {std::pair{"baseline", &outcome.baseline}, std::pair{"adaptive", &outcome.adaptive}})
    for (const auto& e : result->logs) {
      csv << name << ',' << e.epoch << ',' << e.rays_drawn << ',' << e.seconds << ',';
      if (e.eval) csv << e.eval->mean_psnr << ',' << e.eval->mean_ssim;
      else csv << ',';
      csv << '\n';
    }

  BenchSummary& s = outcome.summary;
  s.baseline_rays = outcome.baseline.total_rays;
  s.adaptive_rays = outcome.adaptive.total_rays;
  s.ray_reduction = s.baseline_rays > 0 ? 1.0 - double(s.adaptive_rays) / double(s.baseline_rays) : 0.0;
  s.baseline_seconds = outcome.baseline.seconds;
  s.adaptive_seconds = outcome.adaptive.seconds;
  s.time_reduction = s.baseline_seconds > 0 ? 1.0 - s.adaptive_seconds / s.baseline_seconds : 0.0;
  if (!outcome.baseline.logs.empty() && !outcome.adaptive.logs.empty()) {
    const EvalResult& b = *outcome.baseline.logs.back().eval;
    const EvalResult& a = *outcome.adaptive.logs.back().eval;
    s.baseline_psnr = b.mean_psnr;
    s.adaptive_psnr = a.mean_psnr;
    s.delta_psnr = a.mean_psnr - b.mean_psnr;
    s.baseline_ssim = b.mean_ssim;
    s.adaptive_ssim = a.mean_ssim;
  }

  auto summary = open_output(config.output_dir / "bench_summary.csv");
  summary << "baseline_rays,adaptive_rays,ray_reduction_pct,baseline_seconds,adaptive_seconds,time_reduction_pct,"
             "baseline_psnr,adaptive_psnr,delta_psnr,baseline_ssim,adaptive_ssim\n"
          << s.baseline_rays << ',' << s.adaptive_rays << ',' << 100.0 * s.ray_reduction << ',' << s.baseline_seconds
          << ',' << s.adaptive_seconds << ',' << 100.0 * s.time_reduction << ',' << s.baseline_psnr << ','
          << s.adaptive_psnr << ',' << s.delta_psnr << ',' << s.baseline_ssim << ',' << s.adaptive_ssim << '\n';

  log << std::setprecision(4) << "rays: baseline " << s.baseline_rays << ", adaptive " << s.adaptive_rays << " ("
      << 100.0 * s.ray_reduction << "% fewer)\n"
      << "time: baseline " << s.baseline_seconds << " s, adaptive " << s.adaptive_seconds << " s ("
      << 100.0 * s.time_reduction << "% less)\n"
      << "test psnr: baseline " << s.baseline_psnr << ", adaptive " << s.adaptive_psnr << " (delta "
      << s.delta_psnr << " dB)\n";
  return outcome;
}

std::optional<EvalResult> render_command(const RenderRequest& request, std::ostream& log) {
  const VoxelField field = load_checkpoint(request.checkpoint);
  std::error_code ec;
  fs::create_directories(request.out_dir, ec);
  if (ec) throw DataError("cannot create " + request.out_dir.string() + ": " + ec.message());

  RaySampling sampling;
  std::vector<Camera> cameras;
  std::optional<Dataset> dataset;
  if (request.config) {
    apply_thread_setting(*request.config);
    sampling = request.config->train.sampling;
    dataset = load_run_dataset(*request.config);
    for (int view : dataset->test) cameras.push_back(dataset->cameras[view]);
  } else if (request.cameras) {
    cameras = load_camera_path(*request.cameras, request.width, request.height, sampling.near, sampling.far);
  } else {
    throw ConfigError("render needs --config or --cameras");
  }
  sampling.jitter = false;

  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const fs::path out = request.out_dir / ("view_" + std::to_string(i) + ".png");
    save_png(render_view(field, cameras[i], sampling), out);
    log << "wrote " << out.string() << "\n";
  }
  if (!dataset) return std::nullopt;

  EvalResult ev = evaluate(field, *dataset, sampling);
  auto csv = open_output(request.out_dir / "render_eval.csv");
  csv << "view,psnr,ssim\n";
  for (std::size_t i = 0; i < dataset->test.size(); ++i)
    csv << dataset->test[i] << ',' << ev.psnr[i] << ',' << ev.ssim[i] << '\n';
  csv << "mean," << ev.mean_psnr << ',' << ev.mean_ssim << '\n';
  log << std::setprecision(10) << "test psnr " << ev.mean_psnr << ", ssim " << ev.mean_ssim << "\n";
  return ev;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Quadtree-guided ray sampling for voxel radiance fields"};
  app.require_subcommand(1);

  std::string image, metric = "std", out;
  int patch = 3;
  auto* probmap = app.add_subcommand("probmap", "Write the ray-sampling probability map of an image");
  probmap->add_option("image", image, "Input PNG")->required();
  probmap->add_option("--metric", metric, "Context metric")->check(CLI::IsMember({"std", "variance", "entropy"}));
  probmap->add_option("--patch", patch, "Patch size (odd)")->check(CLI::IsMember({3, 5, 7, 9}));
  probmap->add_option("-o,--out", out, "Output PNG")->required();

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Train a voxel field with the quadtree sampler");
  train_cmd->add_option("config", config_path, "Run config (JSON)")->required();
  auto* bench_cmd = app.add_subcommand("bench", "Compare uniform and quadtree sampling on one scene");
  bench_cmd->add_option("config", config_path, "Run config (JSON)")->required();

  RenderRequest req;
  std::string render_config, cameras;
  auto* render_cmd = app.add_subcommand("render", "Render views from a checkpoint");
  render_cmd->add_option("checkpoint", req.checkpoint, "Checkpoint file")->required();
  auto* cfg_opt = render_cmd->add_option("--config", render_config, "Run config; renders its test split");
  render_cmd->add_option("--cameras", cameras, "transforms JSON with camera poses")->excludes(cfg_opt);
  render_cmd->add_option("--width", req.width, "Image width for --cameras")->check(CLI::PositiveNumber);
  render_cmd->add_option("--height", req.height, "Image height for --cameras")->check(CLI::PositiveNumber);
  render_cmd->add_option("-o,--out", req.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*probmap) {
      ContextMetric m;
      m.kind = *parse_context_kind(metric);
      m.patch = patch;
      probmap_command(image, m, out);
    } else if (*train_cmd) {
      train_command(load_run_config(config_path), std::cout);
    } else if (*bench_cmd) {
      bench_command(load_run_config(config_path), std::cout);
    } else if (*render_cmd) {
      if (!render_config.empty()) req.config = load_run_config(render_config);
      if (!cameras.empty()) req.cameras = cameras;
      if (!req.config && !req.cameras) throw ConfigError("render needs --config or --cameras");
      render_command(req, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fewrays
