#include "fewrays/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "fewrays/errors.hpp"
#include "fewrays/png_io.hpp"

namespace fewrays {

using nlohmann::json;

void Dataset::validate() const {
  if (images.empty()) throw DataError("dataset has no views");
  if (images.size() != cameras.size()) throw DataError("dataset: images and cameras are not aligned");
  if (train.empty()) throw DataError("dataset has no train views");
  if (test.empty()) throw DataError("dataset has no test views");
  std::set<int> seen;
  for (const auto* split : {&train, &test})
    for (int i : *split) {
      if (i < 0 || static_cast<std::size_t>(i) >= images.size()) throw DataError("dataset: split index out of range");
      if (!seen.insert(i).second) throw DataError("dataset: train/test splits overlap");
    }
  if (seen.size() != images.size()) throw DataError("dataset: splits do not cover every view");
  for (std::size_t i = 0; i < images.size(); ++i)
    if (images[i].width() != cameras[i].width || images[i].height() != cameras[i].height)
      throw DataError("dataset: image " + std::to_string(i) + " does not match its camera size");
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

Mat4 parse_matrix(const json& m, const std::string& where) {
  if (!m.is_array() || m.size() != 4) throw DataError(where + ": transform_matrix must be 4x4");
  Mat4 out;
  for (int r = 0; r < 4; ++r) {
    if (!m[r].is_array() || m[r].size() != 4) throw DataError(where + ": transform_matrix must be 4x4");
    for (int c = 0; c < 4; ++c) out(r, c) = m[r][c].get<double>();
  }
  return out;
}

std::filesystem::path resolve_image(const std::filesystem::path& dir, const std::string& file_path) {
  std::filesystem::path p = dir / file_path;
  if (p.extension() != ".png") p += ".png";
  return p.lexically_normal();
}

void load_split(const std::filesystem::path& dir, const std::string& name, double near, double far, Dataset& out,
                std::vector<int>& split) {
  const auto path = dir / ("transforms_" + name + ".json");
  const json doc = read_json(path);
  try {
    const double angle_x = doc.at("camera_angle_x").get<double>();
    const auto& frames = doc.at("frames");
    if (!frames.is_array()) throw DataError(path.string() + ": frames must be an array");
    for (const auto& frame : frames) {
      const std::string file = frame.at("file_path").get<std::string>();
      Image image = load_png(resolve_image(dir, file));
      Camera cam;
      cam.width = image.width();
      cam.height = image.height();
      cam.fx = cam.fy = focal_from_angle(image.width(), angle_x);
      if (doc.contains("camera_angle_y")) {
        const double fy = focal_from_angle(image.height(), doc["camera_angle_y"].get<double>());
        if (std::abs(fy - cam.fx) > 1e-6 * cam.fx) {
          std::cerr << "warning: " << path.string() << ": non-square pixels, fx=" << cam.fx << " fy=" << fy << "\n";
          cam.fy = fy;
        }
      }
      cam.cx = 0.5 * image.width();
      cam.cy = 0.5 * image.height();
      cam.pose = parse_matrix(frame.at("transform_matrix"), path.string());
      cam.near = near;
      cam.far = far;
      split.push_back(static_cast<int>(out.images.size()));
      out.images.push_back(std::move(image));
      out.cameras.push_back(cam);
    }
  } catch (const json::exception& e) {
    throw DataError("malformed transforms file " + path.string() + ": " + e.what());
  }
}

}  // namespace

Dataset load_nerf_synthetic(const std::filesystem::path& dir, double near, double far) {
  Dataset ds;
  load_split(dir, "train", near, far, ds, ds.train);
  load_split(dir, "test", near, far, ds, ds.test);
  ds.validate();
  return ds;
}

std::vector<Camera> load_camera_path(const std::filesystem::path& path, int width, int height, double near,
                                     double far) {
  const json doc = read_json(path);
  std::vector<Camera> cameras;
  try {
    if (doc.contains("w")) width = doc["w"].get<int>();
    if (doc.contains("h")) height = doc["h"].get<int>();
    if (width < 1 || height < 1) throw DataError(path.string() + ": image size must be positive");
    const double angle_x = doc.at("camera_angle_x").get<double>();
    for (const auto& frame : doc.at("frames")) {
      Camera cam;
      cam.width = width;
      cam.height = height;
      cam.fx = cam.fy = focal_from_angle(width, angle_x);
      if (doc.contains("camera_angle_y")) cam.fy = focal_from_angle(height, doc["camera_angle_y"].get<double>());
      cam.cx = 0.5 * width;
      cam.cy = 0.5 * height;
      cam.pose = parse_matrix(frame.at("transform_matrix"), path.string());
      cam.near = near;
      cam.far = far;
      cameras.push_back(cam);
    }
  } catch (const json::exception& e) {
    throw DataError("malformed transforms file " + path.string() + ": " + e.what());
  }
  if (cameras.empty()) throw DataError(path.string() + ": no frames");
  return cameras;
}

void write_nerf_synthetic(const Dataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  for (const auto& [name, split] : {std::pair{std::string("train"), &dataset.train},
                                    std::pair{std::string("test"), &dataset.test}}) {
    std::filesystem::create_directories(dir / name);
    const Camera& first = dataset.cameras[split->front()];
    json doc;
    doc["camera_angle_x"] = 2.0 * std::atan(0.5 * first.width / first.fx);
    if (first.fx != first.fy) doc["camera_angle_y"] = 2.0 * std::atan(0.5 * first.height / first.fy);
    doc["frames"] = json::array();
    for (int view : *split) {
      const std::string stem = "./" + name + "/r_" + std::to_string(view);
      save_png(dataset.images[view], dir / name / ("r_" + std::to_string(view) + ".png"));
      json m = json::array();
      const Mat4& pose = dataset.cameras[view].pose;
      for (int r = 0; r < 4; ++r) m.push_back({pose(r, 0), pose(r, 1), pose(r, 2), pose(r, 3)});
      doc["frames"].push_back({{"file_path", stem}, {"transform_matrix", m}});
    }
    std::ofstream out(dir / ("transforms_" + name + ".json"));
    if (!out) throw DataError("cannot write transforms file in " + dir.string());
    out << doc.dump(2) << "\n";
  }
}

}  // namespace fewrays
