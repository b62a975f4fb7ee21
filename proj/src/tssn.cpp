#include "tbw/tssn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>

namespace tbw {

namespace {

// days-from-civil (Howard Hinnant's algorithm), for calendar-month bucketing
std::int64_t civil_month_index(Timestamp ts) {
  std::int64_t days = ts / 86400;
  if (ts % 86400 < 0) --days;  // floor for pre-epoch stamps
  std::int64_t z = days + 719468;
  std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  std::int64_t doe = z - era * 146097;
  std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = yoe + era * 400;
  std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  std::int64_t mp = (5 * doy + 2) / 153;
  std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
  if (m <= 2) ++y;
  return y * 12 + (m - 1);
}

void format_weight(std::ostream& out, double w) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), w);
  out.write(buf, ptr - buf);
}

}  // namespace

void TssnBuildConfig::validate() const {
  if (calendar_months) {
    if (events_per_snapshot) {
      throw ConfigError("calendar-month bucketing excludes events_per_snapshot");
    }
    return;
  }
  if (epsilon_seconds.has_value() == events_per_snapshot.has_value()) {
    throw ConfigError("exactly one of epsilon_seconds / events_per_snapshot must be set");
  }
  if (epsilon_seconds && *epsilon_seconds <= 0) throw ConfigError("epsilon must be positive");
  if (events_per_snapshot && *events_per_snapshot < 1) {
    throw ConfigError("events_per_snapshot must be >= 1");
  }
  if (self_connection_weight <= 0.0) throw ConfigError("self-connection weight must be positive");
}

std::int32_t TssnGraph::position_of(TssnVertex v) const {
  if (v.snap < 0 || v.snap >= snapshot_count()) return -1;
  const auto& snap = snapshots_[static_cast<std::size_t>(v.snap)];
  auto it = snap.index.find(v.base);
  return it == snap.index.end() ? -1 : it->second;
}

std::span<const TssnGraph::Neighbor> TssnGraph::intra_neighbors(TssnVertex v) const {
  std::int32_t pos = position_of(v);
  if (pos < 0) return {};
  return snapshots_[static_cast<std::size_t>(v.snap)].nbrs[static_cast<std::size_t>(pos)];
}

bool TssnGraph::has_self_connection(TssnVertex v) const {
  std::int32_t pos = position_of(v);
  if (pos < 0) return false;
  return snapshots_[static_cast<std::size_t>(v.snap)].self_out[static_cast<std::size_t>(pos)];
}

bool TssnGraph::has_link(TssnVertex a, TssnVertex b) const {
  if (a.base == b.base) {
    // a self-connection in either direction
    std::int32_t lo = std::min(a.snap, b.snap);
    if (std::abs(a.snap - b.snap) != 1) return false;
    return has_self_connection({a.base, lo});
  }
  if (a.snap != b.snap) return false;
  auto nbrs = intra_neighbors(a);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b.base,
                             [](const Neighbor& n, VertexId v) { return n.base < v; });
  return it != nbrs.end() && it->base == b.base;
}

std::vector<TssnEdge> TssnGraph::accessible_edges(TssnVertex v) const {
  std::int32_t pos = position_of(v);
  if (pos < 0) throw DataError("accessible_edges: unknown vertex state");
  std::vector<TssnEdge> out;
  const auto& snap = snapshots_[static_cast<std::size_t>(v.snap)];
  const auto& nbrs = snap.nbrs[static_cast<std::size_t>(pos)];
  out.reserve(nbrs.size() + 1);
  for (const auto& n : nbrs) {
    out.push_back({v, {n.base, v.snap}, n.weight, EdgeKind::Intra});
  }
  if (snap.self_out[static_cast<std::size_t>(pos)]) {
    out.push_back({v, {v.base, v.snap + 1}, self_weight_, EdgeKind::SelfConnection});
  }
  return out;
}

std::int64_t TssnGraph::state_index(TssnVertex v) const {
  std::int32_t pos = position_of(v);
  if (pos < 0) return -1;
  return static_cast<std::int64_t>(state_offset_[static_cast<std::size_t>(v.snap)] + pos);
}

std::span<const VertexId> TssnGraph::snapshot_vertices(std::int32_t snap) const {
  if (snap < 0 || snap >= snapshot_count()) return {};
  return snapshots_[static_cast<std::size_t>(snap)].verts;
}

std::size_t TssnGraph::intra_edge_count() const {
  std::size_t n = 0;
  for (const auto& s : snapshots_) n += s.edge_count;
  return n;
}

std::size_t TssnGraph::self_connection_count() const {
  std::size_t n = 0;
  for (const auto& s : snapshots_) {
    n += static_cast<std::size_t>(std::count(s.self_out.begin(), s.self_out.end(), true));
  }
  return n;
}

double TssnGraph::total_intra_weight() const {
  double w = 0.0;
  for (const auto& s : snapshots_) w += s.weight_sum;
  return w;
}

TssnGraph build_tssn(const TemporalEdgeList& edges, const RoleTable& roles,
                     const TssnBuildConfig& cfg) {
  cfg.validate();
  if (edges.events.empty()) throw DataError("build_tssn: no events");

  // snapshot index per event
  std::vector<std::int32_t> bucket(edges.events.size());
  std::int32_t max_bucket = 0;
  if (cfg.calendar_months) {
    std::int64_t first_month = civil_month_index(edges.events.front().ts);
    for (std::size_t i = 0; i < edges.events.size(); ++i) {
      bucket[i] = static_cast<std::int32_t>(civil_month_index(edges.events[i].ts) - first_month);
      max_bucket = std::max(max_bucket, bucket[i]);
    }
  } else if (cfg.epsilon_seconds) {
    Timestamp origin = cfg.origin.value_or(edges.events.front().ts);
    for (std::size_t i = 0; i < edges.events.size(); ++i) {
      Timestamp delta = edges.events[i].ts - origin;
      if (delta < 0) throw DataError("build_tssn: event before configured origin");
      bucket[i] = static_cast<std::int32_t>(delta / *cfg.epsilon_seconds);
      max_bucket = std::max(max_bucket, bucket[i]);
    }
  } else {
    // consecutive blocks over the time-sorted stream
    for (std::size_t i = 0; i < edges.events.size(); ++i) {
      bucket[i] = static_cast<std::int32_t>(static_cast<std::int64_t>(i) / *cfg.events_per_snapshot);
      max_bucket = std::max(max_bucket, bucket[i]);
    }
  }

  std::int32_t snapshot_count = max_bucket + 1;
  // aggregate per-snapshot unordered pair weights; std::map keeps ordering deterministic
  std::vector<std::map<std::pair<VertexId, VertexId>, double>> pair_weight(
      static_cast<std::size_t>(snapshot_count));
  for (std::size_t i = 0; i < edges.events.size(); ++i) {
    const Event& e = edges.events[i];
    auto key = std::minmax(e.u, e.v);
    pair_weight[static_cast<std::size_t>(bucket[i])][{key.first, key.second}] += 1.0;
  }

  TssnGraph g;
  g.roles_ = roles;
  g.self_weight_ = cfg.self_connection_weight;
  g.snapshots_.resize(static_cast<std::size_t>(snapshot_count));
  for (std::int32_t t = 0; t < snapshot_count; ++t) {
    auto& snap = g.snapshots_[static_cast<std::size_t>(t)];
    const auto& pw = pair_weight[static_cast<std::size_t>(t)];
    std::map<VertexId, std::vector<TssnGraph::Neighbor>> adj;
    for (const auto& [pair, w] : pw) {
      adj[pair.first].push_back({pair.second, w});
      adj[pair.second].push_back({pair.first, w});
      snap.weight_sum += w;
    }
    snap.edge_count = pw.size();
    snap.verts.reserve(adj.size());
    snap.nbrs.reserve(adj.size());
    for (auto& [base, nbrs] : adj) {
      std::sort(nbrs.begin(), nbrs.end(),
                [](const auto& a, const auto& b) { return a.base < b.base; });
      snap.index.emplace(base, static_cast<std::int32_t>(snap.verts.size()));
      snap.verts.push_back(base);
      snap.nbrs.push_back(std::move(nbrs));
    }
    snap.self_out.assign(snap.verts.size(), false);
  }

  // self-connections: present in t and t+1; empty layers in between break the chain
  for (std::int32_t t = 0; t + 1 < snapshot_count; ++t) {
    auto& cur = g.snapshots_[static_cast<std::size_t>(t)];
    const auto& next = g.snapshots_[static_cast<std::size_t>(t + 1)];
    for (std::size_t i = 0; i < cur.verts.size(); ++i) {
      if (next.index.contains(cur.verts[i])) cur.self_out[i] = true;
    }
  }

  g.state_offset_.resize(static_cast<std::size_t>(snapshot_count));
  for (std::int32_t t = 0; t < snapshot_count; ++t) {
    g.state_offset_[static_cast<std::size_t>(t)] = g.states_.size();
    for (VertexId base : g.snapshots_[static_cast<std::size_t>(t)].verts) {
      g.states_.push_back({base, t});
    }
  }
  return g;
}

std::vector<SnapshotSummary> snapshot_stats(const TssnGraph& g) {
  std::vector<SnapshotSummary> out;
  out.reserve(static_cast<std::size_t>(g.snapshot_count()));
  for (std::int32_t t = 0; t < g.snapshot_count(); ++t) {
    auto verts = g.snapshot_vertices(t);
    SnapshotSummary s;
    s.vertex_count = verts.size();
    for (VertexId v : verts) {
      for (const auto& n : g.intra_neighbors({v, t})) {
        if (n.base > v) {
          ++s.edge_count;
          s.total_weight += n.weight;
        }
      }
    }
    out.push_back(s);
  }
  return out;
}

void dump_edges(const TssnGraph& g, std::ostream& out) {
  for (std::int32_t t = 0; t < g.snapshot_count(); ++t) {
    for (VertexId v : g.snapshot_vertices(t)) {
      for (const auto& n : g.intra_neighbors({v, t})) {
        if (n.base > v) {
          out << v << ' ' << t << ' ' << n.base << ' ' << t << ' ';
          format_weight(out, n.weight);
          out << " intra\n";
        }
      }
    }
    for (VertexId v : g.snapshot_vertices(t)) {
      if (g.has_self_connection({v, t})) {
        out << v << ' ' << t << ' ' << v << ' ' << (t + 1) << ' ';
        format_weight(out, g.self_connection_weight());
        out << " self\n";
      }
    }
  }
}

}  // namespace tbw
