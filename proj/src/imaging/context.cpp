#include "fewrays/context.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fewrays {

std::string to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::StdDev: return "std";
    case ContextKind::Variance: return "variance";
    case ContextKind::Entropy: return "entropy";
  }
  return "?";
}

std::optional<ContextKind> parse_context_kind(std::string_view name) {
  if (name == "std" || name == "stddev" || name == "std-dev") return ContextKind::StdDev;
  if (name == "variance" || name == "var") return ContextKind::Variance;
  if (name == "entropy") return ContextKind::Entropy;
  return std::nullopt;
}

void ContextMetric::validate() const {
  if (patch < 3 || patch % 2 == 0)
    throw std::invalid_argument("context patch must be odd and >= 3, got " + std::to_string(patch));
}

namespace {

double entropy_term(double c) { return c > 0.0 ? -c * std::log(c) : 0.0; }

// One output pixel. Two passes over the window (mean, then deviations) so flat
// regions give exactly 0 rather than a cancellation residue.
double context_at(const Image& image, int u, int v, const ContextMetric& metric) {
  const int r = metric.patch / 2;
  const int last_u = image.height() - 1;
  const int last_v = image.width() - 1;
  const double n = static_cast<double>(metric.patch) * metric.patch;

  if (metric.kind == ContextKind::Entropy) {
    double sum = 0.0;
    for (int du = -r; du <= r; ++du) {
      const int x = std::clamp(u + du, 0, last_u);
      for (int dv = -r; dv <= r; ++dv) {
        const int y = std::clamp(v + dv, 0, last_v);
        for (int c = 0; c < 3; ++c) sum += entropy_term(image.at(x, y, c));
      }
    }
    return std::max(sum, 0.0);
  }

  double mean[3] = {0.0, 0.0, 0.0};
  for (int du = -r; du <= r; ++du) {
    const int x = std::clamp(u + du, 0, last_u);
    for (int dv = -r; dv <= r; ++dv) {
      const int y = std::clamp(v + dv, 0, last_v);
      for (int c = 0; c < 3; ++c) mean[c] += image.at(x, y, c);
    }
  }
  for (double& m : mean) m /= n;

  double sq = 0.0;
  for (int du = -r; du <= r; ++du) {
    const int x = std::clamp(u + du, 0, last_u);
    for (int dv = -r; dv <= r; ++dv) {
      const int y = std::clamp(v + dv, 0, last_v);
      for (int c = 0; c < 3; ++c) {
        const double d = image.at(x, y, c) - mean[c];
        sq += d * d;
      }
    }
  }
  const double variance = sq / n;
  return metric.kind == ContextKind::Variance ? variance : std::sqrt(variance);
}

}  // namespace

ScalarMap context_map(const Image& image, const ContextMetric& metric) {
  metric.validate();
  ScalarMap g(image.width(), image.height());
  const int height = image.height();
#pragma omp parallel for schedule(static)
  for (int u = 0; u < height; ++u)
    for (int v = 0; v < image.width(); ++v) g.at(u, v) = context_at(image, u, v, metric);
  return g;
}

ScalarMap context_map_serial(const Image& image, const ContextMetric& metric) {
  metric.validate();
  ScalarMap g(image.width(), image.height());
  for (int u = 0; u < image.height(); ++u)
    for (int v = 0; v < image.width(); ++v) g.at(u, v) = context_at(image, u, v, metric);
  return g;
}

ProbabilityMap ProbabilityMap::from_weights(int width, int height, std::vector<double> weights) {
  if (width <= 0 || height <= 0 || weights.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("ProbabilityMap: weight count does not match dimensions");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("ProbabilityMap: weights must be finite and >= 0");
  ProbabilityMap map;
  map.width_ = width;
  map.height_ = height;
  map.total_ = std::accumulate(weights.begin(), weights.end(), 0.0);
  map.weights_ = std::move(weights);
  return map;
}

ProbabilityMap normalize(const ScalarMap& g) {
  if (g.values.empty()) throw std::invalid_argument("normalize: empty map");
  const double max_g = *std::max_element(g.values.begin(), g.values.end());
  std::vector<double> weights(g.values.size(), 1.0);
  if (max_g > 0.0) {
    const double mean = std::accumulate(g.values.begin(), g.values.end(), 0.0) / g.values.size();
    const double s = 0.01 * mean;
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = std::max(g.values[i], s) / max_g;
  }
  return ProbabilityMap::from_weights(g.width, g.height, std::move(weights));
}

ScalarMap to_scalar_map(const ProbabilityMap& map) {
  ScalarMap out(map.width(), map.height());
  out.values = map.weights();
  return out;
}

}  // namespace fewrays
