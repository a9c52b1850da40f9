#include "fewrays/config.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "fewrays/errors.hpp"

namespace fewrays {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string to_string(Background b) {
  switch (b) {
    case Background::White: return "white";
    case Background::Black: return "black";
    case Background::None: return "none";
  }
  return "white";
}

std::optional<Background> parse_background(const std::string& s) {
  if (s == "white") return Background::White;
  if (s == "black") return Background::Black;
  if (s == "none") return Background::None;
  return std::nullopt;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Collects every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* k : allowed) known = known || item.key() == k;
      if (!known) fail(join(path, item.key()), "unknown key");
    }
  }

  const json* section(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_object()) {
      fail(join(path, key), "expected an object");
      return nullptr;
    }
    return &*it;
  }

  template <class T>
  void number(const json& obj, const std::string& path, const char* key, T& out,
              const std::function<bool(double)>& ok, const char* rule) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string where = join(path, key);
    if constexpr (std::is_integral_v<T>) {
      const bool negative = it->is_number_integer() && !it->is_number_unsigned() && it->template get<std::int64_t>() < 0;
      if (!it->is_number_integer() || (std::is_unsigned_v<T> && negative)) {
        fail(where, std::is_unsigned_v<T> ? "expected a non-negative integer" : "expected an integer");
        return;
      }
    } else if (!it->is_number()) {
      fail(where, "expected a number");
      return;
    }
    const T value = it->get<T>();
    if (!ok(static_cast<double>(value))) {
      fail(where, rule);
      return;
    }
    out = value;
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) {
      fail(join(path, key), "expected true or false");
      return;
    }
    out = it->get<bool>();
  }

  std::optional<std::string> string(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_string()) {
      fail(join(path, key), "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  void vec3(const json& obj, const std::string& path, const char* key, Vec3& out,
            const std::function<bool(double)>& ok = nullptr, const char* rule = nullptr) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string where = join(path, key);
    if (!it->is_array() || it->size() != 3 || !(*it)[0].is_number() || !(*it)[1].is_number() ||
        !(*it)[2].is_number()) {
      fail(where, "expected an array of 3 numbers");
      return;
    }
    const Vec3 v((*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>());
    if (ok && !(ok(v.x()) && ok(v.y()) && ok(v.z()))) {
      fail(where, rule);
      return;
    }
    out = v;
  }

  void require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(join(path, key), "missing required key");
  }
};

const auto positive = [](double v) { return v > 0.0; };
const auto non_negative = [](double v) { return v >= 0.0; };
const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
const auto finite = [](double v) { return std::isfinite(v); };
const auto at_least = [](double lo) { return [lo](double v) { return v >= lo; }; };

Primitive read_primitive(Reader& r, const json& obj, const std::string& path) {
  Primitive p;
  if (!obj.is_object()) {
    r.fail(path, "expected an object");
    return p;
  }
  r.require(obj, path, "kind");
  const auto kind = r.string(obj, path, "kind");
  if (kind && *kind == "box") {
    p.kind = PrimitiveKind::Box;
    r.only_keys(obj, path, {"kind", "center", "half_extent", "rgb", "sigma"});
    r.require(obj, path, "half_extent");
    r.vec3(obj, path, "half_extent", p.half_extent, positive, "components must be > 0");
  } else {
    if (kind && *kind != "sphere") r.fail(join(path, "kind"), "expected \"sphere\" or \"box\"");
    r.only_keys(obj, path, {"kind", "center", "radius", "rgb", "sigma"});
    r.require(obj, path, "radius");
    r.number(obj, path, "radius", p.radius, positive, "must be > 0");
  }
  r.require(obj, path, "center");
  r.vec3(obj, path, "center", p.center, finite, "must be finite");
  r.require(obj, path, "rgb");
  r.vec3(obj, path, "rgb", p.rgb, unit, "components must be in [0, 1]");
  r.require(obj, path, "sigma");
  r.number(obj, path, "sigma", p.sigma, non_negative, "must be >= 0");
  return p;
}

SceneSpec read_scene(Reader& r, const json& obj) {
  const std::string path = "scene";
  SceneSpec spec = default_scene();
  r.only_keys(obj, path,
              {"primitives", "n_train", "n_test", "resolution", "camera_radius", "camera_angle_x", "gt_samples"});
  if (auto it = obj.find("primitives"); it != obj.end()) {
    if (!it->is_array()) {
      r.fail("scene.primitives", "expected an array");
    } else {
      spec.primitives.clear();
      for (std::size_t i = 0; i < it->size(); ++i)
        spec.primitives.push_back(read_primitive(r, (*it)[i], "scene.primitives[" + std::to_string(i) + "]"));
      if (spec.primitives.empty()) r.fail("scene.primitives", "needs at least one primitive");
    }
  }
  r.number(obj, path, "n_train", spec.n_train, at_least(1), "must be >= 1");
  r.number(obj, path, "n_test", spec.n_test, at_least(1), "must be >= 1");
  r.number(obj, path, "resolution", spec.resolution, at_least(8), "must be >= 8");
  r.number(obj, path, "camera_radius", spec.camera_radius, positive, "must be > 0");
  r.number(obj, path, "camera_angle_x", spec.camera_angle_x,
           [](double v) { return v > 0.0 && v < 3.14159; }, "must be in (0, pi)");
  r.number(obj, path, "gt_samples", spec.gt_samples, at_least(256), "must be >= 256");
  return spec;
}

void read_context(Reader& r, const json& obj, ContextMetric& ctx) {
  const std::string path = "sampler.context";
  r.only_keys(obj, path, {"metric", "patch"});
  if (auto name = r.string(obj, path, "metric")) {
    if (auto kind = parse_context_kind(*name))
      ctx.kind = *kind;
    else
      r.fail(join(path, "metric"), "unknown metric \"" + *name + "\" (expected std, variance or entropy)");
  }
  r.number(obj, path, "patch", ctx.patch, [](double v) { return v >= 3 && static_cast<int>(v) % 2 == 1; },
           "must be an odd integer >= 3");
}

void read_sampler(Reader& r, const json& obj, SamplerConfig& s, ContextMetric& ctx) {
  const std::string path = "sampler";
  r.only_keys(obj, path,
              {"random_ratio", "n0", "threshold", "init_depth", "subdivide_every", "all_pixel_last_epoch",
               "subdivision", "min_node_size", "context"});
  r.number(obj, path, "random_ratio", s.random_ratio, unit, "must be in [0, 1]");
  r.number(obj, path, "n0", s.n0, at_least(1), "must be >= 1");
  r.number(obj, path, "threshold", s.threshold, non_negative, "must be >= 0");
  r.number(obj, path, "init_depth", s.init_depth, [](double v) { return v >= 0 && v <= 12; }, "must be in [0, 12]");
  r.number(obj, path, "subdivide_every", s.subdivide_every, at_least(1), "must be >= 1");
  r.boolean(obj, path, "all_pixel_last_epoch", s.all_pixel_last_epoch);
  r.boolean(obj, path, "subdivision", s.subdivision);
  r.number(obj, path, "min_node_size", s.min_node_size, at_least(1), "must be >= 1");
  if (const json* c = r.section(obj, path, "context")) read_context(r, *c, ctx);
}

void read_render(Reader& r, const json& obj, RaySampling& s) {
  const std::string path = "render";
  r.only_keys(obj, path, {"n_samples", "near", "far", "jitter", "background"});
  r.number(obj, path, "n_samples", s.n_samples, at_least(2), "must be >= 2");
  r.number(obj, path, "near", s.near, non_negative, "must be >= 0");
  r.number(obj, path, "far", s.far, positive, "must be > 0");
  if (s.far <= s.near) r.fail("render.far", "must be greater than render.near");
  r.boolean(obj, path, "jitter", s.jitter);
  if (auto name = r.string(obj, path, "background")) {
    if (auto b = parse_background(*name))
      s.background = *b;
    else
      r.fail("render.background", "expected white, black or none");
  }
}

void read_train(Reader& r, const json& obj, TrainConfig& t) {
  const std::string path = "train";
  r.only_keys(obj, path, {"epochs", "batch_size", "lr", "lr_decay", "density_lr_scale", "eval_every"});
  r.number(obj, path, "epochs", t.epochs, non_negative, "must be >= 0");
  r.number(obj, path, "batch_size", t.batch_size, at_least(1), "must be >= 1");
  r.number(obj, path, "lr", t.lr, positive, "must be > 0");
  r.number(obj, path, "lr_decay", t.lr_decay, [](double v) { return v > 0.0 && v <= 1.0; }, "must be in (0, 1]");
  r.number(obj, path, "density_lr_scale", t.density_lr_scale, positive, "must be > 0");
  r.number(obj, path, "eval_every", t.eval_every, non_negative, "must be >= 0");
}

void read_field(Reader& r, const json& obj, RunConfig& c) {
  const std::string path = "field";
  r.only_keys(obj, path, {"resolution", "bounds", "init_density", "init_rgb"});
  r.number(obj, path, "resolution", c.field_resolution, at_least(2), "must be >= 2");
  if (const json* b = r.section(obj, path, "bounds")) {
    r.only_keys(*b, "field.bounds", {"lo", "hi"});
    r.require(*b, "field.bounds", "lo");
    r.require(*b, "field.bounds", "hi");
    r.vec3(*b, "field.bounds", "lo", c.bounds.lo, finite, "must be finite");
    r.vec3(*b, "field.bounds", "hi", c.bounds.hi, finite, "must be finite");
    if (!(c.bounds.lo.array() < c.bounds.hi.array()).all()) r.fail("field.bounds", "lo must be below hi on every axis");
  }
  r.number(obj, path, "init_density", c.init_density, finite, "must be finite");
  r.number(obj, path, "init_rgb", c.init_rgb, finite, "must be finite");
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  Reader r;
  RunConfig c;
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object at the top level");

  r.only_keys(doc, "", {"output_dir", "seed", "threads", "scene", "dataset", "field", "render", "train", "sampler",
                        "overlays"});
  r.require(doc, "", "output_dir");
  if (auto dir = r.string(doc, "", "output_dir")) {
    if (dir->empty())
      r.fail("output_dir", "must not be empty");
    else
      c.output_dir = *dir;
  }
  r.number(doc, "", "seed", c.seed, [](double) { return true; }, "");
  r.number(doc, "", "threads", c.threads, non_negative, "must be >= 0");
  r.boolean(doc, "", "overlays", c.overlays);

  const json* scene = r.section(doc, "", "scene");
  const json* dataset = r.section(doc, "", "dataset");
  if (doc.contains("scene") && doc.contains("dataset")) r.fail("scene", "give either scene or dataset, not both");
  if (!doc.contains("scene") && !doc.contains("dataset")) r.fail("scene", "missing required key (or dataset)");
  if (scene) c.scene = read_scene(r, *scene);
  if (dataset) {
    r.only_keys(*dataset, "dataset", {"path"});
    r.require(*dataset, "dataset", "path");
    if (auto p = r.string(*dataset, "dataset", "path")) c.dataset_path = *p;
  }

  if (const json* f = r.section(doc, "", "field")) read_field(r, *f, c);
  if (const json* s = r.section(doc, "", "render")) read_render(r, *s, c.train.sampling);
  if (const json* t = r.section(doc, "", "train")) read_train(r, *t, c.train);
  if (const json* s = r.section(doc, "", "sampler")) read_sampler(r, *s, c.train.sampler, c.train.context);

  if (c.scene) {
    c.scene->bounds = c.bounds;
    c.scene->near = c.train.sampling.near;
    c.scene->far = c.train.sampling.far;
    for (std::size_t i = 0; i < c.scene->primitives.size(); ++i) {
      const Primitive& p = c.scene->primitives[i];
      const Vec3 half = p.kind == PrimitiveKind::Box ? p.half_extent : Vec3::Constant(p.radius);
      if (!((p.center - half).array() >= c.bounds.lo.array()).all() ||
          !((p.center + half).array() <= c.bounds.hi.array()).all())
        r.fail("scene.primitives[" + std::to_string(i) + "]", "extends outside field.bounds");
    }
  }
  c.train.seed = c.seed;
  c.train.sampler.seed = c.seed;

  if (r.errors.empty()) {
    try {
      c.train.validate();
    } catch (const std::invalid_argument& e) {
      r.fail("train", e.what());
    }
  }
  if (!r.errors.empty()) {
    std::ostringstream msg;
    msg << "invalid config (" << r.errors.size() << (r.errors.size() == 1 ? " problem" : " problems") << ")";
    for (const auto& e : r.errors) msg << "\n  " << e;
    throw ConfigError(msg.str());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
  json doc;
  doc["output_dir"] = c.output_dir.string();
  doc["seed"] = c.seed;
  doc["threads"] = c.threads;
  doc["overlays"] = c.overlays;
  if (c.scene) {
    json prims = json::array();
    for (const Primitive& p : c.scene->primitives) {
      json j;
      j["kind"] = p.kind == PrimitiveKind::Box ? "box" : "sphere";
      j["center"] = vec_json(p.center);
      if (p.kind == PrimitiveKind::Box)
        j["half_extent"] = vec_json(p.half_extent);
      else
        j["radius"] = p.radius;
      j["rgb"] = vec_json(p.rgb);
      j["sigma"] = p.sigma;
      prims.push_back(j);
    }
    doc["scene"] = {{"primitives", prims},
                    {"n_train", c.scene->n_train},
                    {"n_test", c.scene->n_test},
                    {"resolution", c.scene->resolution},
                    {"camera_radius", c.scene->camera_radius},
                    {"camera_angle_x", c.scene->camera_angle_x},
                    {"gt_samples", c.scene->gt_samples}};
  }
  if (c.dataset_path) doc["dataset"] = {{"path", c.dataset_path->string()}};
  doc["field"] = {{"resolution", c.field_resolution},
                  {"bounds", {{"lo", vec_json(c.bounds.lo)}, {"hi", vec_json(c.bounds.hi)}}},
                  {"init_density", c.init_density},
                  {"init_rgb", c.init_rgb}};
  const RaySampling& s = c.train.sampling;
  doc["render"] = {{"n_samples", s.n_samples},
                   {"near", s.near},
                   {"far", s.far},
                   {"jitter", s.jitter},
                   {"background", to_string(s.background)}};
  const TrainConfig& t = c.train;
  doc["train"] = {{"epochs", t.epochs},       {"batch_size", t.batch_size},
                  {"lr", t.lr},               {"lr_decay", t.lr_decay},
                  {"density_lr_scale", t.density_lr_scale}, {"eval_every", t.eval_every}};
  const SamplerConfig& sc = t.sampler;
  doc["sampler"] = {{"random_ratio", sc.random_ratio},
                    {"n0", sc.n0},
                    {"threshold", sc.threshold},
                    {"init_depth", sc.init_depth},
                    {"subdivide_every", sc.subdivide_every},
                    {"all_pixel_last_epoch", sc.all_pixel_last_epoch},
                    {"subdivision", sc.subdivision},
                    {"min_node_size", sc.min_node_size},
                    {"context", {{"metric", to_string(t.context.kind)}, {"patch", t.context.patch}}}};
  return doc;
}

Dataset load_run_dataset(const RunConfig& c) {
  if (c.scene) {
    try {
      return generate_scene(*c.scene, c.seed);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scene: ") + e.what());
    }
  }
  if (!c.dataset_path) throw ConfigError("config names neither a scene nor a dataset");
  return load_nerf_synthetic(*c.dataset_path, c.train.sampling.near, c.train.sampling.far);
}

VoxelField make_initial_field(const RunConfig& c) {
  return VoxelField(c.field_resolution, c.bounds, c.init_density, c.init_rgb);
}

int apply_thread_setting(const RunConfig& c) {
  int threads = c.threads;
  if (const char* env = std::getenv("FEWRAYS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) throw ConfigError("FEWRAYS_THREADS must be a non-negative integer");
    threads = static_cast<int>(v);
  }
  if (threads > 0) omp_set_num_threads(threads);
  return threads > 0 ? threads : omp_get_max_threads();
}

}  // namespace fewrays
