#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fewrays/metrics.hpp"
#include "fewrays/scene.hpp"
#include "fewrays/trainer.hpp"
#include "oracle.hpp"

using namespace fewrays;

namespace {

Dataset small_dataset() {
  SceneSpec spec = default_scene();
  spec.n_train = 3;
  spec.n_test = 2;
  spec.resolution = 16;
  return generate_scene(spec, 11);
}

TrainConfig small_config(int epochs = 4) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 64;
  c.sampling.n_samples = 24;
  c.sampler.subdivide_every = 1;
  c.seed = 5;
  return c;
}

VoxelField small_field() { return VoxelField(12, Aabb{}, -2.0, 0.0); }

}  // namespace

TEST_CASE("psnr") {
  CHECK(psnr_from_mse(0.01) == 20.0);
  CHECK(psnr_from_mse(0.0) == kPsnrCap);
  const Image a(5, 4, 0.3);
  Image b = a;
  CHECK(psnr(a, b) == kPsnrCap);
  for (double& x : b.data()) x += 0.1;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(mse(a, Image(4, 4)), std::invalid_argument);
}

TEST_CASE("constant images offset by 0.1") {
  const Image a(16, 16, 0.4), b(16, 16, 0.5);
  CHECK(mse(a, b) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b)) < 1e-6);
}

TEST_CASE("ssim: identical images and constant offsets") {
  const Image a = oracle::random_image(20, 18, 1);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  Image b = a;
  for (double& x : b.data()) x = std::min(1.0, x + 0.1);
  CHECK(ssim(a, b) < 1.0);
  CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b)) < 1e-6);
}

TEST_CASE("ssim: gaussian taps") {
  const auto g = ssim_gaussian(11);
  double sum = 0.0;
  for (double x : g) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g[5] > g[4]);
  CHECK(g[0] == doctest::Approx(g[10]).epsilon(1e-15));
  CHECK(ssim_window(64, 64) == 11);
  CHECK(ssim_window(7, 20) == 7);
}

TEST_CASE("ssim: matches the scalar reference on random pairs") {
  for (int i = 0; i < 20; ++i) {
    const Image a = oracle::random_image(16 + i, 24, 100 + i);
    const Image b = oracle::random_image(16 + i, 24, 200 + i);
    const double s = ssim(a, b);
    CHECK(std::abs(s - oracle::ssim(a, b)) < 1e-6);
    CHECK(s == ssim_serial(a, b));
  }
}

TEST_CASE("train: zero epochs changes nothing") {
  const Dataset ds = small_dataset();
  VoxelField f = small_field();
  const VoxelField before = f;
  const TrainResult r = train(ds, train_priors(ds, ContextMetric{}), f, small_config(0));
  CHECK(r.logs.empty());
  CHECK(r.total_rays == 0);
  CHECK(f == before);
}

TEST_CASE("train: ray accounting") {
  const Dataset ds = small_dataset();
  VoxelField f = small_field();
  const TrainConfig cfg = small_config(5);
  const TrainResult r = train(ds, train_priors(ds, cfg.context), f, cfg);
  REQUIRE(r.logs.size() == 5);
  std::int64_t sum = 0;
  for (const EpochLog& log : r.logs) {
    CHECK(log.rays_drawn == log.rays_trained);
    CHECK(log.rays_drawn == log.by_state.total());
    sum += log.rays_trained;
  }
  CHECK(sum == r.total_rays);
  CHECK(r.logs[0].rays_drawn == 3 * 16 * 16);
  const EpochLog& last = r.logs.back();
  CHECK(last.by_state.all_pixel == 3 * 16 * 16);
  CHECK(last.by_state.unmarked == 0);
  CHECK(last.eval.has_value());
  for (std::size_t e = 1; e + 1 < r.logs.size(); ++e) CHECK(r.logs[e].rays_drawn <= r.logs[e - 1].rays_drawn);
  CHECK(r.rounds.size() == 4);
  for (std::size_t e = 0; e + 1 < r.logs.size(); ++e) {
    int marked = 0;
    for (int m : r.logs[e].marked_leaves) marked += m;
    CHECK(r.logs[e].by_state.marked == 10 * marked);
  }
}

TEST_CASE("train: huge threshold marks everything after the first round") {
  const Dataset ds = small_dataset();
  VoxelField f = small_field();
  TrainConfig cfg = small_config(3);
  cfg.sampler.threshold = 1e9;
  cfg.sampler.all_pixel_last_epoch = false;
  const TrainResult r = train(ds, train_priors(ds, cfg.context), f, cfg);
  REQUIRE(!r.rounds.empty());
  for (const auto& report : r.rounds[0])
    for (const auto& leaf : report.leaves) CHECK(leaf.decision == Decision::Marked);
  CHECK(r.logs[1].by_state.unmarked == 0);
  CHECK(r.logs[1].by_state.marked == 3 * 16 * 10);
}

TEST_CASE("baseline: constant per-epoch count and same loop as train") {
  const Dataset ds = small_dataset();
  TrainConfig cfg = small_config(3);
  VoxelField a = small_field();
  const TrainResult base = baseline_uniform_train(ds, a, cfg);
  for (const EpochLog& log : base.logs) {
    CHECK(log.rays_drawn == 3 * 16 * 16);
    CHECK(log.by_state.marked == 0);
    CHECK(log.by_state.all_pixel == 0);
  }
  CHECK(base.rounds.empty());

  cfg.sampler.random_ratio = 1.0;
  cfg.sampler.init_depth = 0;
  cfg.sampler.subdivision = false;
  cfg.sampler.all_pixel_last_epoch = false;
  VoxelField b = small_field();
  const TrainResult adaptive = train(ds, train_priors(ds, cfg.context), b, cfg);
  CHECK(a == b);
  for (std::size_t e = 0; e < base.logs.size(); ++e) CHECK(base.logs[e].mean_loss == adaptive.logs[e].mean_loss);
}

TEST_CASE("train: deterministic and reduces the loss") {
  const Dataset ds = small_dataset();
  const TrainConfig cfg = small_config(4);
  VoxelField a = small_field(), b = small_field();
  const TrainResult ra = train(ds, train_priors(ds, cfg.context), a, cfg);
  const TrainResult rb = train(ds, train_priors(ds, cfg.context), b, cfg);
  CHECK(a == b);
  std::ostringstream ca, cb;
  write_epoch_csv_header(ca);
  write_epoch_csv_header(cb);
  for (const auto& log : ra.logs) write_epoch_csv_row(ca, log);
  for (const auto& log : rb.logs) write_epoch_csv_row(cb, log);
  CHECK(ca.str() == cb.str());
  CHECK(ra.logs.back().mean_loss < ra.logs.front().mean_loss);
  CHECK(ra.logs.back().eval->mean_psnr > evaluate(small_field(), ds, cfg.sampling).mean_psnr);
}

TEST_CASE("epoch csv columns") {
  EpochLog log;
  log.epoch = 2;
  log.rays_trained = 100;
  log.by_state.unmarked = 90;
  log.by_state.marked = 10;
  log.marked_leaves = {1, 2};
  log.unmarked_leaves = {3, 4};
  log.lr = 0.5;
  log.mean_loss = 0.25;
  std::ostringstream out;
  write_epoch_csv_header(out);
  write_epoch_csv_row(out, log);
  CHECK(out.str() ==
        "epoch,rays,unmarked_rays,marked_rays,all_pixel_rays,marked_leaves,unmarked_leaves,lr,mean_loss,"
        "subdivision_round,test_psnr,test_ssim\n2,100,90,10,0,3,7,0.5,0.25,0,,\n");
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.lr = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.sampler.random_ratio = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
