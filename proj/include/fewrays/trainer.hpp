#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "fewrays/context.hpp"
#include "fewrays/dataset.hpp"
#include "fewrays/field.hpp"
#include "fewrays/quadtree.hpp"
#include "fewrays/render.hpp"
#include "fewrays/sampler.hpp"

namespace fewrays {

struct TrainConfig {
  int epochs = 16;
  int batch_size = 4096;
  /// Step size per ray: each SGD step applies lr * sum of the batch's per-ray
  /// loss gradients, so lr does not depend on batch_size.
  double lr = 20.0;
  double lr_decay = 1.0;  // per epoch
  double density_lr_scale = 40.0;  // density step = lr * density_lr_scale
  SamplerConfig sampler;
  ContextMetric context;
  RaySampling sampling{.n_samples = 128, .near = 0.1, .far = 4.0, .jitter = true};
  int eval_every = 1;  // 0 disables per-epoch evaluation (the last epoch is always evaluated)
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct EvalResult {
  std::vector<double> psnr;  // per test view
  std::vector<double> ssim;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct EpochLog {
  int epoch = 0;
  std::int64_t rays_drawn = 0;
  std::int64_t rays_trained = 0;
  DrawCounts by_state;
  std::vector<int> marked_leaves;    // per train view, layout used for this epoch's draws
  std::vector<int> unmarked_leaves;
  double mean_loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;  // sampling + optimization + subdivision, excludes evaluation
  int subdivision_round = 0;  // > 0 when a round ran at the end of this epoch
  std::optional<EvalResult> eval;
};

struct TrainObserver {
  std::function<void(const EpochLog&)> on_epoch;
  /// Called after each round with the reports (one per train view) and the
  /// draws of the epoch that produced the errors.
  std::function<void(int round, int epoch, std::span<const SubdivisionReport>, std::span<const PixelDraw>)>
      on_subdivision;
};

struct TrainResult {
  std::vector<EpochLog> logs;
  std::vector<std::vector<SubdivisionReport>> rounds;  // [round][train view]
  std::vector<QuadTree> trees;
  std::int64_t total_rays = 0;
  double seconds = 0.0;
};

/// Prior maps of the train views, in dataset.train order.
std::vector<ProbabilityMap> train_priors(const Dataset& dataset, const ContextMetric& metric);

/// Quadtree-guided training. Per epoch: draw rays for every train view (one
/// per pixel on the final epoch when all_pixel_last_epoch), shuffle globally,
/// run SGD over batches, record per-leaf errors, and every subdivide_every
/// epochs subdivide all trees together.
/// Throws NumericError on a non-finite loss or gradient.
TrainResult train(const Dataset& dataset, std::span<const ProbabilityMap> priors, VoxelField& field,
                  const TrainConfig& config, const TrainObserver* observer = nullptr);

/// Control arm: H*W uniform draws per view per epoch, no quadtrees. Uses the
/// same loop as train() with a depth-0, fully random, never-subdivided tree.
TrainResult baseline_uniform_train(const Dataset& dataset, VoxelField& field, const TrainConfig& config,
                                   const TrainObserver* observer = nullptr);

/// Renders the test views with midpoint sampling and scores them.
EvalResult evaluate(const VoxelField& field, const Dataset& dataset, const RaySampling& sampling);

/// Epoch CSV without wall-clock columns, so reruns are byte-identical.
void write_epoch_csv_header(std::ostream& out);
void write_epoch_csv_row(std::ostream& out, const EpochLog& log);

}  // namespace fewrays
