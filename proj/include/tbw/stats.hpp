#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>

#include "tbw/core.hpp"
#include "tbw/rng.hpp"

namespace tbw {

struct WelchResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

// Welch's unequal-variance t-test; throws DataError when a group has < 2 values.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct RoleActivitySummary {
  std::size_t n_users = 0;
  std::size_t n_developers = 0;
  WelchResult sent;      // user counts vs developer counts
  WelchResult received;
};

// Per-individual sent/received event counts (event direction as ingested),
// compared between roles with Welch's t-test.
RoleActivitySummary role_ttest(const TemporalEdgeList& edges, const RoleTable& roles);

struct TendencyReport {
  double cross_real = 0.0;      // fraction of events between different roles
  double cross_expected = 0.0;  // 2 * p_user * p_dev under random mixing
  std::optional<double> cross_ratio;
  double same_real = 0.0;
  double same_expected = 0.0;  // p_user^2 + p_dev^2
  std::optional<double> same_ratio;
};

// Event-weighted communication tendency against the random-mixing baseline;
// a ratio is absent when its expectation is zero (single-role data).
TendencyReport tendency_ratio(const TemporalEdgeList& edges, const RoleTable& roles);

// Desk-scale benchmark generator. Each individual carries a latent community;
// cross-role events stay inside the sender's community except for a fixed
// leak fraction, same-role events always stay inside, so role-biased walks
// see community structure through both edge types. community_drift reassigns
// that fraction of individuals to the other community at each snapshot
// boundary, making early snapshots carry information the later ones lack.
struct SyntheticSpec {
  int n_users = 100;
  int n_developers = 100;
  int snapshots = 4;
  int events_per_snapshot = 2000;
  double cross_role_affinity = 0.5;
  double activity_skew = 0.0;  // 0 = uniform sender activity
  double community_drift = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

std::pair<TemporalEdgeList, RoleTable> generate_synthetic(const SyntheticSpec& spec, Rng& rng);
std::pair<TemporalEdgeList, RoleTable> generate_synthetic(const SyntheticSpec& spec);

void write_ttest_report(const RoleActivitySummary& s, std::ostream& out);
void write_tendency_report(const TendencyReport& r, std::ostream& out);

}  // namespace tbw
