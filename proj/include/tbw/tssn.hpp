#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tbw/core.hpp"

namespace tbw {

// Exactly one of epsilon_seconds / events_per_snapshot must be set.
struct TssnBuildConfig {
  std::optional<std::int64_t> epsilon_seconds;
  std::optional<std::int64_t> events_per_snapshot;
  std::optional<Timestamp> origin;  // default: first event timestamp
  bool calendar_months = false;     // bucket by UTC calendar month instead of fixed spans
  double self_connection_weight = 1.0;

  void validate() const;
};

struct TssnVertex {
  VertexId base = 0;
  std::int32_t snap = 0;

  bool operator==(const TssnVertex&) const = default;
};

enum class EdgeKind : std::uint8_t { Intra, SelfConnection };

struct TssnEdge {
  TssnVertex src;
  TssnVertex dst;
  double weight = 0.0;
  EdgeKind kind = EdgeKind::Intra;

  // time accessibility: snapshot index difference dst - src
  std::int32_t time_accessibility() const { return dst.snap - src.snap; }
};

struct SnapshotSummary {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;  // undirected intra edges
  double total_weight = 0.0;
};

// Layered snapshot graph: per-snapshot undirected weighted adjacency plus
// directed self-connections (v,t)->(v,t+1) for vertices present in both
// snapshots. Immutable after build; safe for concurrent reads.
class TssnGraph {
 public:
  struct Neighbor {
    VertexId base;
    double weight;
  };

  std::int32_t snapshot_count() const { return static_cast<std::int32_t>(snapshots_.size()); }
  double self_connection_weight() const { return self_weight_; }
  Role role(VertexId base) const { return roles_[static_cast<std::size_t>(base)]; }
  const RoleTable& roles() const { return roles_; }

  bool contains(TssnVertex v) const { return position_of(v) >= 0; }
  // sorted by base id; empty span for unknown vertices
  std::span<const Neighbor> intra_neighbors(TssnVertex v) const;
  bool has_self_connection(TssnVertex v) const;  // outgoing (v,t)->(v,t+1)
  // undirected adjacency on the layered graph, self-connections included
  bool has_link(TssnVertex a, TssnVertex b) const;

  // Intra edges oriented outward from v (sorted by dst base) followed by the
  // outgoing self-connection when present. Throws DataError for unknown v.
  std::vector<TssnEdge> accessible_edges(TssnVertex v) const;

  // (vertex, snapshot) states in deterministic order: by snapshot, then base.
  std::size_t state_count() const { return states_.size(); }
  TssnVertex state_at(std::size_t index) const { return states_[index]; }
  std::int64_t state_index(TssnVertex v) const;  // -1 when absent
  std::span<const VertexId> snapshot_vertices(std::int32_t snap) const;

  std::size_t intra_edge_count() const;       // undirected, all snapshots
  std::size_t self_connection_count() const;
  double total_intra_weight() const;

 private:
  friend TssnGraph build_tssn(const TemporalEdgeList&, const RoleTable&, const TssnBuildConfig&);

  struct Snapshot {
    std::vector<VertexId> verts;                       // sorted
    std::vector<std::vector<Neighbor>> nbrs;           // parallel to verts, sorted by base
    std::vector<bool> self_out;                        // parallel to verts
    std::unordered_map<VertexId, std::int32_t> index;  // base -> position
    std::size_t edge_count = 0;
    double weight_sum = 0.0;
  };

  std::int32_t position_of(TssnVertex v) const;

  std::vector<Snapshot> snapshots_;
  std::vector<TssnVertex> states_;
  std::vector<std::size_t> state_offset_;  // per snapshot
  RoleTable roles_;
  double self_weight_ = 1.0;
};

// Buckets events into snapshots, aggregates per-pair weights, adds
// self-connections per the successive-presence rule. Throws DataError when no
// events survive; a span larger than the data yields a single snapshot.
TssnGraph build_tssn(const TemporalEdgeList& edges, const RoleTable& roles,
                     const TssnBuildConfig& cfg);

std::vector<SnapshotSummary> snapshot_stats(const TssnGraph& g);

// One line per edge: "src_base src_snap dst_base dst_snap weight kind" with
// kind in {intra, self}; intra edges emitted once with src_base < dst_base.
void dump_edges(const TssnGraph& g, std::ostream& out);

}  // namespace tbw
