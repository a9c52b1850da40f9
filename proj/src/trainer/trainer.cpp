#include "fewrays/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fewrays/errors.hpp"
#include "fewrays/metrics.hpp"
#include "fewrays/random.hpp"

namespace fewrays {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be > 0");
  if (!(lr_decay > 0.0)) throw std::invalid_argument("lr_decay must be > 0");
  if (!(density_lr_scale > 0.0)) throw std::invalid_argument("density_lr_scale must be > 0");
  if (eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
  sampler.validate();
  context.validate();
  sampling.validate();
}

std::vector<ProbabilityMap> train_priors(const Dataset& dataset, const ContextMetric& metric) {
  std::vector<ProbabilityMap> priors;
  priors.reserve(dataset.train.size());
  for (int view : dataset.train) priors.push_back(probability_map(dataset.images[view], metric));
  return priors;
}

EvalResult evaluate(const VoxelField& field, const Dataset& dataset, const RaySampling& sampling) {
  RaySampling midpoints = sampling;
  midpoints.jitter = false;
  EvalResult r;
  for (int view : dataset.test) {
    const Image rendered = render_view(field, dataset.cameras[view], midpoints);
    r.psnr.push_back(psnr(rendered, dataset.images[view]));
    r.ssim.push_back(ssim(rendered, dataset.images[view]));
  }
  r.mean_psnr = std::accumulate(r.psnr.begin(), r.psnr.end(), 0.0) / r.psnr.size();
  r.mean_ssim = std::accumulate(r.ssim.begin(), r.ssim.end(), 0.0) / r.ssim.size();
  return r;
}

namespace {

enum class Arm { Adaptive, Uniform };

using Clock = std::chrono::steady_clock;

TrainResult run(const Dataset& dataset, std::span<const ProbabilityMap> priors, VoxelField& field,
                const TrainConfig& config, Arm arm, const TrainObserver* observer) {
  config.validate();
  dataset.validate();
  if (priors.size() != dataset.train.size()) throw std::invalid_argument("need one prior map per train view");

  SamplerConfig sampler = config.sampler;
  if (arm == Arm::Uniform) {
    sampler.init_depth = 0;
    sampler.random_ratio = 1.0;
    sampler.subdivision = false;
    sampler.all_pixel_last_epoch = false;
  }

  TrainResult result;
  if (config.epochs == 0) return result;

  // Tree index == position in dataset.train.
  std::vector<int> tree_of_view(dataset.view_count(), -1);
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    const int view = dataset.train[i];
    const Image& image = dataset.images[view];
    tree_of_view[view] = static_cast<int>(i);
    result.trees.push_back(QuadTree::build(view, image.height(), image.width(), sampler));
    if (arm == Arm::Adaptive) result.trees.back().prepare(priors[i]);
  }

  GradientBuffer grads = field.make_gradient_buffer();
  std::vector<RayGradient> scratch;
  std::vector<Ray> rays;
  std::vector<std::uint64_t> seeds;
  std::vector<PixelDraw> pool;
  std::vector<double> losses;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    EpochLog log;
    log.epoch = epoch;
    log.lr = config.lr * std::pow(config.lr_decay, epoch);
    const bool all_pixel = sampler.all_pixel_last_epoch && epoch == config.epochs - 1;

    pool.clear();
    for (std::size_t i = 0; i < result.trees.size(); ++i) {
      QuadTree& tree = result.trees[i];
      tree.reset_errors();
      log.marked_leaves.push_back(tree.leaf_count(NodeState::Marked));
      log.unmarked_leaves.push_back(tree.leaf_count(NodeState::Unmarked));
      std::mt19937_64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(tree.view()), 1}));
      const DrawCounts c = all_pixel ? sample_all_pixels(tree.view(), tree.height(), tree.width(), rng, pool)
                                     : sample_epoch_rays(tree, priors[i], sampler, rng, pool);
      log.by_state.unmarked += c.unmarked;
      log.by_state.marked += c.marked;
      log.by_state.all_pixel += c.all_pixel;
    }
    if (pool.empty()) throw std::runtime_error("epoch " + std::to_string(epoch) + " drew no rays");
    {
      std::mt19937_64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), 2}));
      std::shuffle(pool.begin(), pool.end(), rng);
    }
    log.rays_drawn = static_cast<std::int64_t>(pool.size());

    losses.assign(pool.size(), 0.0);
    for (std::size_t start = 0; start < pool.size(); start += config.batch_size) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, pool.size() - start);
      rays.resize(count);
      seeds.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        const PixelDraw& d = pool[start + k];
        Ray ray = pixel_ray(dataset.cameras[d.view], d.u, d.v);
        ray.view = d.view;
        ray.target = dataset.images[d.view].pixel(d.u, d.v);
        rays[k] = ray;
        seeds[k] = derive_seed(config.seed, {static_cast<std::uint64_t>(epoch), start + k, 3});
      }
      batch_backward(field, rays, config.sampling, seeds, scratch, std::span(losses).subspan(start, count), grads);
      field.sgd_step(grads, log.lr, config.density_lr_scale);
      log.rays_trained += static_cast<std::int64_t>(count);
    }

    double loss_sum = 0.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const PixelDraw& d = pool[k];
      result.trees[tree_of_view[d.view]].record_error(d.u, d.v, losses[k]);
      loss_sum += losses[k];
    }
    log.mean_loss = loss_sum / static_cast<double>(pool.size());
    if (!std::isfinite(log.mean_loss)) throw NumericError("non-finite training loss in epoch " + std::to_string(epoch));

    const bool has_next = epoch + 1 < config.epochs;
    if (sampler.subdivision && !all_pixel && has_next && (epoch + 1) % sampler.subdivide_every == 0) {
      std::vector<SubdivisionReport> reports;
      for (std::size_t i = 0; i < result.trees.size(); ++i) {
        reports.push_back(result.trees[i].subdivide(sampler));
        result.trees[i].prepare(priors[i]);
      }
      result.rounds.push_back(std::move(reports));
      log.subdivision_round = static_cast<int>(result.rounds.size());
      if (observer && observer->on_subdivision)
        observer->on_subdivision(log.subdivision_round, epoch, result.rounds.back(), pool);
    }
    log.seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
    result.seconds += log.seconds;
    result.total_rays += log.rays_trained;

    const bool last = epoch == config.epochs - 1;
    if (last || (config.eval_every > 0 && (epoch + 1) % config.eval_every == 0))
      log.eval = evaluate(field, dataset, config.sampling);
    if (observer && observer->on_epoch) observer->on_epoch(log);
    result.logs.push_back(std::move(log));
  }
  return result;
}

}  // namespace

TrainResult train(const Dataset& dataset, std::span<const ProbabilityMap> priors, VoxelField& field,
                  const TrainConfig& config, const TrainObserver* observer) {
  return run(dataset, priors, field, config, Arm::Adaptive, observer);
}

TrainResult baseline_uniform_train(const Dataset& dataset, VoxelField& field, const TrainConfig& config,
                                   const TrainObserver* observer) {
  std::vector<ProbabilityMap> flat;
  for (int view : dataset.train) {
    const Image& image = dataset.images[view];
    flat.push_back(normalize(ScalarMap(image.width(), image.height(), 0.0)));
  }
  return run(dataset, flat, field, config, Arm::Uniform, observer);
}

void write_epoch_csv_header(std::ostream& out) {
  out << "epoch,rays,unmarked_rays,marked_rays,all_pixel_rays,marked_leaves,unmarked_leaves,lr,mean_loss,"
         "subdivision_round,test_psnr,test_ssim\n";
}

void write_epoch_csv_row(std::ostream& out, const EpochLog& log) {
  const int marked = std::accumulate(log.marked_leaves.begin(), log.marked_leaves.end(), 0);
  const int unmarked = std::accumulate(log.unmarked_leaves.begin(), log.unmarked_leaves.end(), 0);
  out << log.epoch << ',' << log.rays_trained << ',' << log.by_state.unmarked << ',' << log.by_state.marked << ','
      << log.by_state.all_pixel << ',' << marked << ',' << unmarked << ',' << std::setprecision(9) << log.lr << ','
      << std::setprecision(12) << log.mean_loss << ',' << log.subdivision_round << ',';
  if (log.eval) out << std::setprecision(12) << log.eval->mean_psnr << ',' << log.eval->mean_ssim;
  else out << ',';
  out << '\n';
}

}  // namespace fewrays
