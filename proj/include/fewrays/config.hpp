#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "fewrays/dataset.hpp"
#include "fewrays/field.hpp"
#include "fewrays/scene.hpp"
#include "fewrays/trainer.hpp"

namespace fewrays {

/// Everything a train/bench/render run needs. See README for the key set.
struct RunConfig {
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all cores; FEWRAYS_THREADS overrides

  // Exactly one data source.
  std::optional<SceneSpec> scene;
  std::optional<std::filesystem::path> dataset_path;

  int field_resolution = 64;
  Aabb bounds;
  double init_density = VoxelField::kDefaultRawDensity;
  double init_rgb = VoxelField::kDefaultRawRgb;

  TrainConfig train;
  bool overlays = true;
};

/// Validates the whole document and throws ConfigError listing every problem
/// (unknown keys, missing required keys, wrong types, out-of-range values).
RunConfig parse_run_config(const nlohmann::json& doc);
/// Reads and parses a JSON file; unreadable or malformed files are ConfigErrors.
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully populated document; parse_run_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);

/// Generates the scene or loads the dataset named by the config.
Dataset load_run_dataset(const RunConfig& config);

VoxelField make_initial_field(const RunConfig& config);

/// Applies FEWRAYS_THREADS or config.threads to OpenMP. Returns the count used.
int apply_thread_setting(const RunConfig& config);

}  // namespace fewrays
