#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tbw/alias.hpp"
#include "tbw/core.hpp"
#include "tbw/rng.hpp"
#include "tbw/tssn.hpp"

namespace tbw {

enum class RoleMode : std::uint8_t { Unbiased, Biased };
enum class TokenMode : std::uint8_t { BaseId, SnapshotId };

struct WalkConfig {
  double r = 1.0;             // return parameter
  double q = 1.0;             // in-out parameter
  double alpha = 0.5;         // temporal bias, [0.1, 0.9]
  double beta = 0.5;          // role bias, [0.1, 0.9]
  RoleMode role_mode = RoleMode::Unbiased;
  int walks_per_vertex = 10;  // per (vertex, snapshot) state
  int walk_length = 80;       // steps; a walk holds at most walk_length + 1 states
  std::uint64_t rng_seed = 1;
  TokenMode token_mode = TokenMode::BaseId;
  std::size_t alias_cache_capacity = 1 << 18;
  int threads = 1;

  void validate() const;
};

// current position plus the previously visited state (absent on the first step)
struct StepContext {
  TssnVertex current;
  std::optional<TssnVertex> previous;
};

struct Walk {
  std::vector<std::int64_t> tokens;
  std::vector<TssnVertex> states;
};

// token for a state: the base id, or (snap << 32 | base) in SnapshotId mode
std::int64_t token_of(TssnVertex v, TokenMode mode);
TssnVertex state_of_token(std::int64_t token, TokenMode mode);
std::string token_name(std::int64_t token, TokenMode mode, const std::vector<std::string>& keys);

// psi_S(e) * W(e): 1/r at distance 0, W at 1, 1/q at 2, where the distance is
// between ctx.previous and Dst(e) on the layered graph (self-connections count
// as length-1 links). Requires ctx.previous.
double structural_factor(const TssnGraph& g, const StepContext& ctx, const TssnEdge& e,
                         const WalkConfig& cfg);

// psi_T(e): alpha for a self-connection, 1 - alpha for an intra edge
double temporal_factor(const WalkConfig& cfg, const TssnEdge& e);

// psi_R(e): 1 in Unbiased mode; beta when Dst(e) shares the reference vertex's
// role, 1 - beta otherwise. Reference is ctx.previous, or ctx.current on the
// first step.
double role_factor(const TssnGraph& g, const StepContext& ctx, const TssnEdge& e,
                   const WalkConfig& cfg);

struct StepDistribution {
  std::vector<TssnEdge> edges;  // accessible_edges(ctx.current) order
  std::vector<double> probs;    // normalized; empty when no candidates

  bool empty() const { return edges.empty(); }
};

// Joint transition distribution over the accessible edges of ctx.current.
// Equal to the renormalized product of the per-equation normalized structural,
// temporal, and role distributions; computed from the unnormalized factor
// product, with the temporal factor applied as the odds alpha/(1-alpha) on the
// single self-connection candidate so that candidate sets without one are
// exactly alpha-invariant. The first step omits the structural term and uses
// ctx.current as the role reference.
StepDistribution joint_step_distribution(const StepContext& ctx, const WalkConfig& cfg,
                                         const TssnGraph& g);

// Memoized (previous, current) -> alias table, LRU-bounded. Not thread-safe;
// each walker thread owns one.
class AliasCache {
 public:
  explicit AliasCache(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  struct Entry {
    std::vector<TssnEdge> edges;
    std::optional<AliasTable> table;  // nullopt when there are no candidates
  };

  const Entry& step_entry(const TssnGraph& g, const WalkConfig& cfg, const StepContext& ctx);
  std::size_t size() const { return map_.size(); }

 private:
  std::size_t capacity_;
  std::list<std::uint64_t> order_;
  std::unordered_map<std::uint64_t, std::pair<Entry, std::list<std::uint64_t>::iterator>> map_;
};

// Deterministic per-walk rng stream; exposed so alternative corpus generators
// can reproduce the exact sampling sequence.
std::uint64_t walk_stream_seed(std::uint64_t rng_seed, std::uint64_t state_index,
                               std::uint64_t iteration);

// One temporal biased walk of at most cfg.walk_length steps from `start`;
// truncates when no accessible edge remains.
Walk temporal_biased_walk(const TssnGraph& g, TssnVertex start, const WalkConfig& cfg, Rng& rng,
                          AliasCache* cache = nullptr);

// walks_per_vertex walks from every (vertex, snapshot) state, order shuffled
// per iteration, walks shorter than 2 tokens dropped. Bit-identical output for
// a fixed seed regardless of cfg.threads.
std::vector<Walk> generate_corpus(const TssnGraph& g, const WalkConfig& cfg);

}  // namespace tbw
