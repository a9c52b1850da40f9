#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fewrays/image.hpp"

namespace fewrays {

enum class ContextKind { StdDev, Variance, Entropy };

std::string to_string(ContextKind kind);
std::optional<ContextKind> parse_context_kind(std::string_view name);

/// Local color-variation measure used as the sampling prior.
struct ContextMetric {
  ContextKind kind = ContextKind::StdDev;
  int patch = 3;  // odd window size, >= 3

  /// Throws std::invalid_argument if the patch is even or smaller than 3.
  void validate() const;
};

/// Raw context map g over a patch x patch window with replicate padding.
///
///  - std-dev:  sqrt( (1/n) * sum ||c(x,y) - mean||^2 ), squared norm over RGB,
///              n = patch^2
///  - variance: the same without the square root
///  - entropy:  sum over window and channels of -c log c, with 0 log 0 = 0,
///              clamped below at 0
///
/// Rows are processed in parallel; context_map_serial is the single-thread
/// reference used by tests and benchmarks.
ScalarMap context_map(const Image& image, const ContextMetric& metric);
ScalarMap context_map_serial(const Image& image, const ContextMetric& metric);

/// Per-pixel prior sampling weights. Immutable once built.
class ProbabilityMap {
 public:
  ProbabilityMap() = default;

  /// Wraps arbitrary nonnegative weights (used for tests and custom priors).
  /// Throws std::invalid_argument on negative/non-finite weights or a size mismatch.
  static ProbabilityMap from_weights(int width, int height, std::vector<double> weights);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int u, int v) const { return weights_[static_cast<std::size_t>(u) * width_ + v]; }
  const std::vector<double>& weights() const { return weights_; }
  double total() const { return total_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> weights_;
  double total_ = 0.0;
};

/// Clamp-below-at-s and divide by max, with s = 0.01 * mean(g).
/// All outputs lie in (0, 1]. A map with max(g) == 0 becomes uniform 1.
ProbabilityMap normalize(const ScalarMap& g);

inline ProbabilityMap probability_map(const Image& image, const ContextMetric& metric) {
  return normalize(context_map(image, metric));
}

/// Grayscale rendering of the weights (weight 1 -> white).
ScalarMap to_scalar_map(const ProbabilityMap& map);

}  // namespace fewrays
