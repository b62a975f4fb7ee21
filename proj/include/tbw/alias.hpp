#pragma once

#include <span>
#include <vector>

#include "tbw/core.hpp"
#include "tbw/rng.hpp"

namespace tbw {

// Walker/Vose alias table for O(1) weighted discrete sampling.
// Construction requires probabilities summing to 1 within 1e-9.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> probs);

  std::size_t size() const { return threshold_.size(); }

  std::size_t sample(Rng& rng) const {
    std::size_t i = rng.uniform_index(threshold_.size());
    return rng.uniform() < threshold_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> threshold_;
  std::vector<std::size_t> alias_;
};

}  // namespace tbw
