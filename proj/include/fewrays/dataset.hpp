#pragma once

#include <filesystem>
#include <vector>

#include "fewrays/camera.hpp"
#include "fewrays/image.hpp"

namespace fewrays {

struct Dataset {
  std::vector<Image> images;
  std::vector<Camera> cameras;
  std::vector<int> train;  // view indices
  std::vector<int> test;

  std::size_t view_count() const { return images.size(); }

  /// Alignment, split disjointness/coverage, at least one view per split.
  /// Throws DataError.
  void validate() const;
};

/// Reads transforms_train.json / transforms_test.json and their PNGs.
/// fx = fy = 0.5 W / tan(0.5 camera_angle_x); if camera_angle_y is present
/// and disagrees, a warning is printed and fy is taken from it.
Dataset load_nerf_synthetic(const std::filesystem::path& dir, double near = 0.1, double far = 4.0);

/// Cameras of a transforms file without images. "w"/"h" keys, when present,
/// override width and height.
std::vector<Camera> load_camera_path(const std::filesystem::path& path, int width, int height, double near = 0.1,
                                     double far = 4.0);

/// Writes the same layout (train/ and test/ PNG folders plus both JSON files).
void write_nerf_synthetic(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace fewrays
