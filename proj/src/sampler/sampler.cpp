#include "fewrays/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fewrays {
namespace {

void push_local(const PixelRect& b, std::int64_t k, int view, std::vector<PixelDraw>& out) {
  const int cols = b.cols();
  out.push_back({view, b.u0 + static_cast<int>(k / cols), b.v0 + static_cast<int>(k % cols)});
}

AliasTable local_table(const PixelRect& b, const ProbabilityMap& prior) {
  std::vector<double> local;
  local.reserve(static_cast<std::size_t>(b.area()));
  for (int u = b.u0; u < b.u1; ++u)
    for (int v = b.v0; v < b.v1; ++v) local.push_back(prior.at(u, v));
  return AliasTable(local);
}

}  // namespace

DrawCounts sample_epoch_rays(const QuadTree& tree, const ProbabilityMap& prior, const SamplerConfig& config,
                             std::mt19937_64& rng, std::vector<PixelDraw>& out) {
  if (prior.width() != tree.width() || prior.height() != tree.height())
    throw std::invalid_argument("probability map size does not match the quadtree");
  DrawCounts counts;
  for (const QuadNode& node : tree.nodes()) {
    const PixelRect& b = node.bounds;
    std::uniform_int_distribution<std::int64_t> uniform(0, b.area() - 1);
    if (node.state == NodeState::Unmarked) {
      const std::int64_t area = b.area();
      const double ideal = (1.0 - config.random_ratio) * static_cast<double>(area);
      const std::int64_t weighted = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(ideal - 1e-9)), 0, area);
      if (weighted > 0) {
        std::optional<AliasTable> temporary;
        const AliasTable* table = node.prior ? &*node.prior : &temporary.emplace(local_table(b, prior));
        for (std::int64_t i = 0; i < weighted; ++i)
          push_local(b, static_cast<std::int64_t>(table->sample(rng)), tree.view(), out);
      }
      for (std::int64_t i = weighted; i < area; ++i) push_local(b, uniform(rng), tree.view(), out);
      counts.unmarked += area;
    } else if (node.state == NodeState::Marked) {
      for (int i = 0; i < config.n0; ++i) push_local(b, uniform(rng), tree.view(), out);
      counts.marked += config.n0;
    }
  }
  return counts;
}

DrawCounts sample_all_pixels(int view, int height, int width, std::mt19937_64& rng, std::vector<PixelDraw>& out) {
  std::vector<int> order(static_cast<std::size_t>(height) * width);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int k : order) out.push_back({view, k / width, k % width});
  DrawCounts counts;
  counts.all_pixel = static_cast<std::int64_t>(order.size());
  return counts;
}

}  // namespace fewrays
