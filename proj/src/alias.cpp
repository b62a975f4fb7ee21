#include "tbw/alias.hpp"

#include <cmath>
#include <numeric>

namespace tbw {

AliasTable::AliasTable(std::span<const double> probs) {
  if (probs.empty()) throw ConfigError("alias table: empty distribution");
  double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw ConfigError("alias table: probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  std::size_t n = probs.size();
  threshold_.resize(n);
  alias_.resize(n);

  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    if (probs[i] < 0.0) throw ConfigError("alias table: negative probability");
    scaled[i] = probs[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    std::size_t s = small.back(), l = large.back();
    small.pop_back();
    large.pop_back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (std::size_t i : large) {
    threshold_[i] = 1.0;
    alias_[i] = i;
  }
  for (std::size_t i : small) {  // leftovers from rounding
    threshold_[i] = 1.0;
    alias_[i] = i;
  }
}

}  // namespace tbw
