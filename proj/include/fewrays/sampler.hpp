#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fewrays/context.hpp"
#include "fewrays/quadtree.hpp"

namespace fewrays {

struct PixelDraw {
  int view = 0;
  int u = 0;
  int v = 0;
};

struct DrawCounts {
  std::int64_t unmarked = 0;
  std::int64_t marked = 0;
  std::int64_t all_pixel = 0;
  std::int64_t total() const { return unmarked + marked + all_pixel; }
};

/// Appends one epoch of draws for the tree's view:
///  - unmarked leaf F: |F| draws, ceil((1 - rho)|F|) from the prior restricted
///    to F and the rest uniform over F, both with replacement;
///  - marked leaf: n0 uniform draws.
/// Uses the leaf's cached alias table when prepare() has built one.
DrawCounts sample_epoch_rays(const QuadTree& tree, const ProbabilityMap& prior, const SamplerConfig& config,
                             std::mt19937_64& rng, std::vector<PixelDraw>& out);

/// Every pixel of the view exactly once, in random order.
DrawCounts sample_all_pixels(int view, int height, int width, std::mt19937_64& rng, std::vector<PixelDraw>& out);

}  // namespace fewrays
