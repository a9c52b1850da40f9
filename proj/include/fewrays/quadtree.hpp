#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fewrays/alias_table.hpp"
#include "fewrays/context.hpp"

namespace fewrays {

/// Half-open pixel rectangle [u0,u1) x [v0,v1); u indexes rows.
struct PixelRect {
  int u0 = 0;
  int v0 = 0;
  int u1 = 0;
  int v1 = 0;

  int rows() const { return u1 - u0; }
  int cols() const { return v1 - v0; }
  std::int64_t area() const { return static_cast<std::int64_t>(rows()) * cols(); }
  bool contains(int u, int v) const { return u >= u0 && u < u1 && v >= v0 && v < v1; }
  bool operator==(const PixelRect&) const = default;
};

enum class NodeState { Internal, Unmarked, Marked };
std::string to_string(NodeState state);

struct QuadNode {
  PixelRect bounds;
  int depth = 0;
  NodeState state = NodeState::Unmarked;
  int first_child = -1;  // children are stored contiguously: TL, TR, BL, BR
  double error_sum = 0.0;
  std::int64_t error_count = 0;
  std::optional<AliasTable> prior;  // prior weights restricted to the node

  bool is_leaf() const { return state != NodeState::Internal; }
  /// Mean per-ray error; nullopt when no ray landed in the node.
  std::optional<double> mean_error() const {
    if (error_count == 0) return std::nullopt;
    return error_sum / static_cast<double>(error_count);
  }
};

struct SamplerConfig {
  double random_ratio = 0.5;        // fraction of unmarked-leaf draws taken uniformly
  int n0 = 10;                      // draws per marked leaf
  double threshold = 1e-3;          // a: leaves with mean error below it are marked
  int init_depth = 2;
  int subdivide_every = 3;          // epochs between subdivision rounds
  bool all_pixel_last_epoch = true;
  bool subdivision = true;
  int min_node_size = 2;            // no child may be thinner than this (pixels)
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for out-of-range values.
  void validate() const;
};

enum class Decision { Marked, Split, Kept, NoDraws, AlreadyMarked };
std::string to_string(Decision decision);

/// One leaf as it was when a subdivision round inspected it.
struct LeafDecision {
  int node = -1;
  PixelRect bounds;
  int depth = 0;
  Decision decision = Decision::Kept;
  std::optional<double> mean_error;
  std::int64_t draws = 0;
};

struct SubdivisionReport {
  int view = 0;
  std::vector<LeafDecision> leaves;
  int marked = 0;
  int split = 0;
  int kept = 0;
};

struct RayBudget {
  std::int64_t unmarked_rays = 0;
  std::int64_t marked_rays = 0;
  std::int64_t total = 0;
};

/// Per-view quadtree over the image pixels. Leaves always partition the image.
class QuadTree {
 public:
  QuadTree() = default;

  /// Fully subdivides to config.init_depth (rows/cols split ceil/floor).
  /// Throws std::invalid_argument if either side is smaller than 2^init_depth.
  static QuadTree build(int view, int height, int width, const SamplerConfig& config);

  int view() const { return view_; }
  int height() const { return height_; }
  int width() const { return width_; }
  const std::vector<QuadNode>& nodes() const { return nodes_; }
  const QuadNode& node(int i) const { return nodes_[i]; }
  std::vector<int> leaves() const;
  int leaf_count(NodeState state) const;

  /// Leaf containing pixel (u, v). Throws std::out_of_range outside the image.
  int leaf_at(int u, int v) const;

  /// Builds the prior alias table of every unmarked leaf that lacks one.
  void prepare(const ProbabilityMap& prior);

  /// Adds (loss, 1) to the leaf of each draw. Throws std::out_of_range for
  /// pixels outside the image and std::invalid_argument on a length mismatch.
  void record_errors(std::span<const int> us, std::span<const int> vs, std::span<const double> losses);
  void record_error(int u, int v, double loss);
  void reset_errors();

  /// Marks leaves with mean error < threshold, splits the others (when both
  /// child sides stay >= min_node_size and every child keeps >= n0 pixels),
  /// leaves nodes without draws alone, then resets all error statistics.
  SubdivisionReport subdivide(const SamplerConfig& config);

  /// sum_{unmarked} |F| + n0 * #marked
  RayBudget budget(const SamplerConfig& config) const;

 private:
  void split(int node);
  void refresh_leaf_index();

  int view_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<QuadNode> nodes_;
  std::vector<int> leaf_of_pixel_;
};

}  // namespace fewrays
