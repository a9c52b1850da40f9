#include "fewrays/alias_table.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fewrays {

AliasTable::AliasTable(std::span<const double> weights) : item_count_(weights.size()) {
  if (weights.empty()) throw std::invalid_argument("alias table needs at least one weight");
  std::vector<std::uint32_t> positive;
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("alias table weights must be finite and >= 0");
    if (weights[i] > 0.0) {
      positive.push_back(static_cast<std::uint32_t>(i));
      sum += weights[i];
    }
  }
  if (positive.empty()) {
    positive.resize(weights.size());
    std::iota(positive.begin(), positive.end(), 0u);
    sum = static_cast<double>(weights.size());
  }

  const std::size_t n = positive.size();
  std::vector<double> scaled(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = weights[positive[k]] > 0.0 ? weights[positive[k]] : 1.0;
    scaled[k] = w * static_cast<double>(n) / sum;
  }

  slot_.resize(n);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t k = 0; k < n; ++k) (scaled[k] < 1.0 ? small : large).push_back(k);
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    slot_[s] = {scaled[s], positive[s], positive[l]};
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t k : large) slot_[k] = {1.0, positive[k], positive[k]};
  for (std::size_t k : small) slot_[k] = {1.0, positive[k], positive[k]};
}

double AliasTable::probability(std::size_t item) const {
  double p = 0.0;
  for (const Slot& s : slot_) {
    if (s.item == item) p += s.keep;
    if (s.alias == item) p += 1.0 - s.keep;
  }
  return p / static_cast<double>(slot_.size());
}

}  // namespace fewrays
