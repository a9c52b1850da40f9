#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "fewrays/cli.hpp"
#include "fewrays/config.hpp"
#include "fewrays/errors.hpp"
#include "fewrays/field.hpp"
#include "fewrays/png_io.hpp"

using namespace fewrays;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fewrays_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(FEWRAYS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json tiny_config(const fs::path& out) {
  return json{{"output_dir", out.string()},
              {"seed", 3},
              {"threads", 1},
              {"scene", {{"n_train", 2}, {"n_test", 1}, {"resolution", 16}, {"gt_samples", 256}}},
              {"field", {{"resolution", 8}}},
              {"render", {{"n_samples", 16}}},
              {"train", {{"epochs", 1}, {"batch_size", 128}}},
              {"overlays", false}};
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.in.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::string config_error(const json& doc) {
  try {
    parse_run_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

double csv_mean_psnr(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("mean,", 0) == 0) return std::stod(line.substr(5, line.find(',', 5) - 5));
  return -1.0;
}

}  // namespace

TEST_CASE("config: round trip through json") {
  json doc = tiny_config("/tmp/x");
  doc["sampler"] = {{"n0", 7}, {"threshold", 2e-3}, {"context", {{"metric", "entropy"}, {"patch", 5}}}};
  const RunConfig a = parse_run_config(doc);
  CHECK(a.train.sampler.n0 == 7);
  CHECK(a.train.context.kind == ContextKind::Entropy);
  CHECK(a.train.seed == 3);
  CHECK(a.train.sampler.seed == 3);
  const RunConfig b = parse_run_config(to_json(a));
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("config: errors name the offending keys") {
  json unknown = tiny_config("/tmp/x");
  unknown["train"]["learning_rate"] = 1.0;
  CHECK(config_error(unknown).find("train.learning_rate") != std::string::npos);

  json missing = tiny_config("/tmp/x");
  missing.erase("output_dir");
  CHECK(config_error(missing).find("output_dir") != std::string::npos);

  json many = tiny_config("/tmp/x");
  many["train"]["epochs"] = -1;
  many["sampler"] = {{"random_ratio", 2.0}, {"context", {{"patch", 4}}}};
  const std::string msg = config_error(many);
  CHECK(msg.find("3 problems") != std::string::npos);
  CHECK(msg.find("train.epochs") != std::string::npos);
  CHECK(msg.find("sampler.random_ratio") != std::string::npos);
  CHECK(msg.find("sampler.context.patch") != std::string::npos);

  json both = tiny_config("/tmp/x");
  both["dataset"] = {{"path", "/nowhere"}};
  CHECK_FALSE(config_error(both).empty());

  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("cli: probmap") {
  const fs::path dir = temp_dir("probmap");
  save_png(Image(12, 10, 0.4), dir / "flat.png");
  CHECK(run("probmap " + (dir / "flat.png").string() + " --metric foo -o " + (dir / "x.png").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "x.png"));
  CHECK(run("probmap " + (dir / "flat.png").string() + " --metric entropy -o " + (dir / "e.png").string()) == 0);
  REQUIRE(run("probmap " + (dir / "flat.png").string() + " -o " + (dir / "m.png").string()) == 0);
  const Image m = load_png(dir / "m.png");
  CHECK(m.width() == 12);
  for (double x : m.data()) CHECK(x == 1.0);
  CHECK(run("probmap " + (dir / "missing.png").string() + " -o " + (dir / "y.png").string()) == 3);
  CHECK(run("nonsense") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("cli: train, rerun, render") {
  const fs::path dir = temp_dir("train");
  const fs::path cfg = write_config(dir, tiny_config(dir / "run1"));
  REQUIRE(run("train " + cfg.string()) == 0);
  const std::string epochs = slurp(dir / "run1" / "epochs.csv");
  CHECK(std::count(epochs.begin(), epochs.end(), '\n') == 2);
  for (const char* f : {"config.json", "checkpoint.bin", "timing.csv", "eval.csv"}) CHECK(fs::exists(dir / "run1" / f));

  const fs::path cfg2 = write_config(dir, tiny_config(dir / "run2"));
  REQUIRE(run("train " + cfg2.string()) == 0);
  CHECK(slurp(dir / "run2" / "epochs.csv") == epochs);
  CHECK(slurp(dir / "run2" / "checkpoint.bin") == slurp(dir / "run1" / "checkpoint.bin"));

  REQUIRE(run("render " + (dir / "run1" / "checkpoint.bin").string() + " --config " + cfg.string() + " -o " +
              (dir / "render").string()) == 0);
  CHECK(fs::exists(dir / "render" / "view_0.png"));
  CHECK(std::abs(csv_mean_psnr(dir / "render" / "render_eval.csv") - csv_mean_psnr(dir / "run1" / "eval.csv")) < 1e-6);
}

TEST_CASE("cli: render errors and a vacuum checkpoint") {
  const fs::path dir = temp_dir("render");
  save_checkpoint(VoxelField(4, Aabb{}, -800.0), dir / "vacuum.bin");
  std::ofstream(dir / "cams.json") << json{{"camera_angle_x", 0.7},
                                           {"frames",
                                            {{{"transform_matrix",
                                               {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 2.5}, {0, 0, 0, 1}}}}}}}
                                          .dump();
  REQUIRE(run("render " + (dir / "vacuum.bin").string() + " --cameras " + (dir / "cams.json").string() +
              " --width 8 --height 6 -o " + (dir / "out").string()) == 0);
  const Image img = load_png(dir / "out" / "view_0.png");
  CHECK(img.width() == 8);
  CHECK(img.height() == 6);
  for (double x : img.data()) CHECK(x == 1.0);

  std::string bytes = slurp(dir / "vacuum.bin");
  bytes[0] = 'Z';
  std::ofstream(dir / "corrupt.bin", std::ios::binary) << bytes;
  CHECK(run("render " + (dir / "corrupt.bin").string() + " --cameras " + (dir / "cams.json").string() + " -o " +
            (dir / "bad").string()) == 3);
  CHECK(run("render " + (dir / "vacuum.bin").string() + " -o " + (dir / "none").string()) == 2);
}

TEST_CASE("cli: bad config exits 2") {
  const fs::path dir = temp_dir("badcfg");
  json doc = tiny_config(dir / "out");
  doc["train"]["lr"] = -1;
  CHECK(run("train " + write_config(dir, doc).string()) == 2);
  CHECK(run("train " + (dir / "missing.json").string()) == 2);
}

TEST_CASE("cli: bench writes both arms") {
  const fs::path dir = temp_dir("bench");
  json doc = tiny_config(dir / "out");
  doc["train"]["epochs"] = 2;
  doc["sampler"] = {{"subdivide_every", 1}};
  REQUIRE(run("bench " + write_config(dir, doc).string()) == 0);
  const std::string bench = slurp(dir / "out" / "bench.csv");
  CHECK(bench.find("baseline,0,") != std::string::npos);
  CHECK(bench.find("adaptive,1,") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "bench_summary.csv"));

  std::ostringstream log;
  const BenchOutcome o = bench_command(parse_run_config(doc), log);
  CHECK(o.summary.baseline_rays == 2 * 2 * 16 * 16);
  CHECK(o.summary.adaptive_rays == o.adaptive.total_rays);
}
