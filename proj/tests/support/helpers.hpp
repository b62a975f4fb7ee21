#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "tbw/ingest.hpp"
#include "tbw/rng.hpp"

namespace tbw::test {

struct Dataset {
  TemporalEdgeList edges;
  RoleTable roles;
};

// events as (sender, recipient, ts); roles default to user unless listed as a developer
inline Dataset make_dataset(const std::vector<std::tuple<std::string, std::string, Timestamp>>& events,
                            const std::vector<std::string>& developers = {}) {
  std::vector<RawEvent> raw;
  RoleMap roles;
  for (const auto& [s, r, ts] : events) {
    raw.push_back({s, r, ts});
    roles.try_emplace(s, Role::User);
    roles.try_emplace(r, Role::User);
  }
  for (const auto& d : developers) roles[d] = Role::Developer;
  auto [edges, table] = clean_and_index(raw, roles);
  return {std::move(edges), std::move(table)};
}

// random multi-snapshot dataset; every vertex gets a role by parity
inline Dataset random_dataset(Rng& rng, int n_vertices, int n_events, int n_spans,
                              Timestamp span = 1000) {
  std::vector<std::tuple<std::string, std::string, Timestamp>> events;
  std::vector<std::string> developers;
  for (int v = 0; v < n_vertices; ++v) {
    if (v % 2 == 1) developers.push_back("v" + std::to_string(v));
  }
  int made = 0;
  while (made < n_events) {
    int a = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_vertices)));
    int b = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_vertices)));
    if (a == b) continue;
    Timestamp ts = static_cast<Timestamp>(rng.uniform_index(static_cast<std::size_t>(n_spans))) *
                       span +
                   static_cast<Timestamp>(rng.uniform_index(static_cast<std::size_t>(span)));
    events.emplace_back("v" + std::to_string(a), "v" + std::to_string(b), ts);
    ++made;
  }
  return make_dataset(events, developers);
}

}  // namespace tbw::test
