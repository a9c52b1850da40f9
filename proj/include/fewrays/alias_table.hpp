#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fewrays {

/// Walker/Vose alias table: O(n) build, O(1) weighted draws with replacement.
/// Only positive weights are stored, so zero-weight items can never be drawn.
/// An all-zero input degenerates to uniform over every item.
class AliasTable {
 public:
  AliasTable() = default;
  /// Throws std::invalid_argument on negative or non-finite weights or empty input.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return item_count_; }

  template <class Rng>
  std::size_t sample(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, slot_.size() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const std::size_t i = pick(rng);
    const Slot& s = slot_[i];
    return coin(rng) < s.keep ? s.item : s.alias;
  }

  /// Probability of drawing `item`, reconstructed from the table.
  double probability(std::size_t item) const;

 private:
  struct Slot {
    double keep = 1.0;
    std::uint32_t item = 0;
    std::uint32_t alias = 0;
  };
  std::vector<Slot> slot_;
  std::size_t item_count_ = 0;
};

}  // namespace fewrays
