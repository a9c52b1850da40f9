#include "fewrays/quadtree.hpp"

#include <cmath>
#include <stdexcept>

namespace fewrays {

std::string to_string(NodeState state) {
  switch (state) {
    case NodeState::Internal: return "internal";
    case NodeState::Unmarked: return "unmarked";
    case NodeState::Marked: return "marked";
  }
  return "?";
}

std::string to_string(Decision decision) {
  switch (decision) {
    case Decision::Marked: return "marked";
    case Decision::Split: return "split";
    case Decision::Kept: return "kept";
    case Decision::NoDraws: return "no_draws";
    case Decision::AlreadyMarked: return "already_marked";
  }
  return "?";
}

void SamplerConfig::validate() const {
  if (!(random_ratio >= 0.0 && random_ratio <= 1.0)) throw std::invalid_argument("random_ratio must be in [0,1]");
  if (n0 < 1) throw std::invalid_argument("n0 must be positive");
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  if (init_depth < 0) throw std::invalid_argument("init_depth must be >= 0");
  if (subdivide_every < 1) throw std::invalid_argument("subdivide_every must be positive");
  if (min_node_size < 1) throw std::invalid_argument("min_node_size must be positive");
}

QuadTree QuadTree::build(int view, int height, int width, const SamplerConfig& config) {
  config.validate();
  if (config.init_depth >= 30 || height < (1 << config.init_depth) || width < (1 << config.init_depth))
    throw std::invalid_argument("image " + std::to_string(height) + "x" + std::to_string(width) +
                                " is smaller than 2^init_depth per axis");
  QuadTree tree;
  tree.view_ = view;
  tree.height_ = height;
  tree.width_ = width;
  QuadNode root;
  root.bounds = {0, 0, height, width};
  tree.nodes_.push_back(root);
  for (int d = 0; d < config.init_depth; ++d)
    for (int leaf : tree.leaves()) tree.split(leaf);
  tree.refresh_leaf_index();
  return tree;
}

std::vector<int> QuadTree::leaves() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
  return out;
}

int QuadTree::leaf_count(NodeState state) const {
  int n = 0;
  for (const auto& node : nodes_) n += node.state == state;
  return n;
}

int QuadTree::leaf_at(int u, int v) const {
  if (u < 0 || u >= height_ || v < 0 || v >= width_)
    throw std::out_of_range("draw (" + std::to_string(u) + ", " + std::to_string(v) + ") outside the image");
  return leaf_of_pixel_[static_cast<std::size_t>(u) * width_ + v];
}

void QuadTree::split(int index) {
  const PixelRect b = nodes_[index].bounds;
  const int depth = nodes_[index].depth + 1;
  const int um = b.u0 + (b.rows() + 1) / 2;
  const int vm = b.v0 + (b.cols() + 1) / 2;
  const PixelRect rects[4] = {{b.u0, b.v0, um, vm}, {b.u0, vm, um, b.v1}, {um, b.v0, b.u1, vm}, {um, vm, b.u1, b.v1}};
  const int first = static_cast<int>(nodes_.size());
  for (const PixelRect& r : rects) {
    QuadNode child;
    child.bounds = r;
    child.depth = depth;
    nodes_.push_back(child);
  }
  QuadNode& parent = nodes_[index];
  parent.state = NodeState::Internal;
  parent.first_child = first;
  parent.prior.reset();
  parent.error_sum = 0.0;
  parent.error_count = 0;
}

void QuadTree::refresh_leaf_index() {
  leaf_of_pixel_.assign(static_cast<std::size_t>(height_) * width_, -1);
  for (int leaf : leaves()) {
    const PixelRect& b = nodes_[leaf].bounds;
    for (int u = b.u0; u < b.u1; ++u)
      for (int v = b.v0; v < b.v1; ++v) leaf_of_pixel_[static_cast<std::size_t>(u) * width_ + v] = leaf;
  }
}

void QuadTree::prepare(const ProbabilityMap& prior) {
  if (prior.width() != width_ || prior.height() != height_)
    throw std::invalid_argument("probability map size does not match the quadtree");
  std::vector<double> local;
  for (QuadNode& node : nodes_) {
    if (node.state != NodeState::Unmarked || node.prior) continue;
    local.clear();
    for (int u = node.bounds.u0; u < node.bounds.u1; ++u)
      for (int v = node.bounds.v0; v < node.bounds.v1; ++v) local.push_back(prior.at(u, v));
    node.prior.emplace(local);
  }
}

void QuadTree::record_error(int u, int v, double loss) {
  QuadNode& leaf = nodes_[leaf_at(u, v)];
  leaf.error_sum += loss;
  ++leaf.error_count;
}

void QuadTree::record_errors(std::span<const int> us, std::span<const int> vs, std::span<const double> losses) {
  if (us.size() != vs.size() || us.size() != losses.size())
    throw std::invalid_argument("record_errors: draws and losses differ in length");
  for (std::size_t i = 0; i < us.size(); ++i) record_error(us[i], vs[i], losses[i]);
}

void QuadTree::reset_errors() {
  for (QuadNode& node : nodes_) {
    node.error_sum = 0.0;
    node.error_count = 0;
  }
}

SubdivisionReport QuadTree::subdivide(const SamplerConfig& config) {
  config.validate();
  SubdivisionReport report;
  report.view = view_;
  for (int index : leaves()) {
    const QuadNode& node = nodes_[index];
    LeafDecision d;
    d.node = index;
    d.bounds = node.bounds;
    d.depth = node.depth;
    d.mean_error = node.mean_error();
    d.draws = node.error_count;

    if (node.state == NodeState::Marked) {
      d.decision = Decision::AlreadyMarked;
    } else if (!d.mean_error) {
      d.decision = Decision::NoDraws;
    } else if (*d.mean_error < config.threshold) {
      d.decision = Decision::Marked;
      nodes_[index].state = NodeState::Marked;
      nodes_[index].prior.reset();
      ++report.marked;
    } else {
      const int child_rows = node.bounds.rows() / 2;
      const int child_cols = node.bounds.cols() / 2;
      const bool can_split = child_rows >= config.min_node_size && child_cols >= config.min_node_size &&
                             static_cast<std::int64_t>(child_rows) * child_cols >= config.n0;
      if (can_split) {
        d.decision = Decision::Split;
        split(index);
        ++report.split;
      } else {
        d.decision = Decision::Kept;
        ++report.kept;
      }
    }
    report.leaves.push_back(d);
  }
  reset_errors();
  refresh_leaf_index();
  return report;
}

RayBudget QuadTree::budget(const SamplerConfig& config) const {
  RayBudget b;
  for (const QuadNode& node : nodes_) {
    if (node.state == NodeState::Unmarked) b.unmarked_rays += node.bounds.area();
    if (node.state == NodeState::Marked) b.marked_rays += config.n0;
  }
  b.total = b.unmarked_rays + b.marked_rays;
  return b;
}

}  // namespace fewrays
