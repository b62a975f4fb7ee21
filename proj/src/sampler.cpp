#include "tbw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace tbw {

void WalkConfig::validate() const {
  if (r <= 0.0 || q <= 0.0) throw ConfigError("walk: r and q must be positive");
  if (alpha < 0.1 || alpha > 0.9) throw ConfigError("walk: alpha must lie in [0.1, 0.9]");
  if (beta < 0.1 || beta > 0.9) throw ConfigError("walk: beta must lie in [0.1, 0.9]");
  if (walks_per_vertex < 1) throw ConfigError("walk: walks_per_vertex must be >= 1");
  if (walk_length < 1) throw ConfigError("walk: walk_length must be >= 1");
  if (threads < 1) throw ConfigError("walk: threads must be >= 1");
}

std::int64_t token_of(TssnVertex v, TokenMode mode) {
  if (mode == TokenMode::BaseId) return v.base;
  return (static_cast<std::int64_t>(v.snap) << 32) | static_cast<std::uint32_t>(v.base);
}

TssnVertex state_of_token(std::int64_t token, TokenMode mode) {
  if (mode == TokenMode::BaseId) return {static_cast<VertexId>(token), 0};
  return {static_cast<VertexId>(token & 0xffffffff), static_cast<std::int32_t>(token >> 32)};
}

std::string token_name(std::int64_t token, TokenMode mode, const std::vector<std::string>& keys) {
  TssnVertex v = state_of_token(token, mode);
  const std::string& key = keys[static_cast<std::size_t>(v.base)];
  if (mode == TokenMode::BaseId) return key;
  return key + "@" + std::to_string(v.snap);
}

namespace {

// shortest-path distance in {0,1,2} between the reference and a candidate that
// is always within two hops (both are adjacent to the current vertex)
int bounded_distance(const TssnGraph& g, TssnVertex from, TssnVertex to) {
  if (from == to) return 0;
  if (g.has_link(from, to)) return 1;
  return 2;
}

}  // namespace

double structural_factor(const TssnGraph& g, const StepContext& ctx, const TssnEdge& e,
                         const WalkConfig& cfg) {
  if (!ctx.previous) throw ConfigError("structural_factor requires a previous vertex");
  switch (bounded_distance(g, *ctx.previous, e.dst)) {
    case 0:
      return e.weight / cfg.r;
    case 1:
      return e.weight;
    default:
      return e.weight / cfg.q;
  }
}

double temporal_factor(const WalkConfig& cfg, const TssnEdge& e) {
  return e.kind == EdgeKind::SelfConnection ? cfg.alpha : 1.0 - cfg.alpha;
}

double role_factor(const TssnGraph& g, const StepContext& ctx, const TssnEdge& e,
                   const WalkConfig& cfg) {
  if (cfg.role_mode == RoleMode::Unbiased) return 1.0;
  TssnVertex reference = ctx.previous.value_or(ctx.current);
  return g.role(reference.base) == g.role(e.dst.base) ? cfg.beta : 1.0 - cfg.beta;
}

StepDistribution joint_step_distribution(const StepContext& ctx, const WalkConfig& cfg,
                                         const TssnGraph& g) {
  StepDistribution dist;
  dist.edges = g.accessible_edges(ctx.current);
  if (dist.edges.empty()) return dist;

  dist.probs.resize(dist.edges.size());
  // at most one candidate is a self-connection; applying the temporal factor
  // as its odds against the intra block leaves self-free candidate sets
  // untouched by alpha
  const double self_odds = cfg.alpha / (1.0 - cfg.alpha);
  for (std::size_t i = 0; i < dist.edges.size(); ++i) {
    const TssnEdge& e = dist.edges[i];
    double u = ctx.previous ? structural_factor(g, ctx, e, cfg) : e.weight;
    u *= role_factor(g, ctx, e, cfg);
    if (e.kind == EdgeKind::SelfConnection) u *= self_odds;
    dist.probs[i] = u;
  }
  double sum = 0.0;
  for (double p : dist.probs) sum += p;
  for (double& p : dist.probs) p /= sum;
  return dist;
}

const AliasCache::Entry& AliasCache::step_entry(const TssnGraph& g, const WalkConfig& cfg,
                                                const StepContext& ctx) {
  std::uint64_t prev_key =
      ctx.previous ? static_cast<std::uint64_t>(g.state_index(*ctx.previous)) + 1 : 0;
  std::uint64_t key = (prev_key << 32) | static_cast<std::uint64_t>(g.state_index(ctx.current));
  if (auto it = map_.find(key); it != map_.end()) {
    order_.splice(order_.begin(), order_, it->second.second);
    return it->second.first;
  }
  StepDistribution dist = joint_step_distribution(ctx, cfg, g);
  Entry entry;
  entry.edges = std::move(dist.edges);
  if (!entry.edges.empty()) entry.table.emplace(dist.probs);
  order_.push_front(key);
  auto [it, inserted] = map_.emplace(key, std::make_pair(std::move(entry), order_.begin()));
  if (map_.size() > capacity_) {
    map_.erase(order_.back());
    order_.pop_back();
  }
  return it->second.first;
}

std::uint64_t walk_stream_seed(std::uint64_t rng_seed, std::uint64_t state_index,
                               std::uint64_t iteration) {
  return mix_seed(mix_seed(rng_seed, 0x77616c6bull), state_index, iteration);
}

Walk temporal_biased_walk(const TssnGraph& g, TssnVertex start, const WalkConfig& cfg, Rng& rng,
                          AliasCache* cache) {
  if (!g.contains(start)) throw DataError("temporal_biased_walk: unknown start state");
  AliasCache local(cache ? 1 : 64);
  AliasCache& use = cache ? *cache : local;

  Walk walk;
  walk.states.reserve(static_cast<std::size_t>(cfg.walk_length) + 1);
  walk.states.push_back(start);
  StepContext ctx{start, std::nullopt};
  for (int step = 0; step < cfg.walk_length; ++step) {
    const auto& entry = use.step_entry(g, cfg, ctx);
    if (!entry.table) break;  // exhausted; truncation is normal
    const TssnEdge& chosen = entry.edges[entry.table->sample(rng)];
    walk.states.push_back(chosen.dst);
    ctx.previous = ctx.current;
    ctx.current = chosen.dst;
  }
  walk.tokens.reserve(walk.states.size());
  for (TssnVertex v : walk.states) walk.tokens.push_back(token_of(v, cfg.token_mode));
  return walk;
}

std::vector<Walk> generate_corpus(const TssnGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  const std::size_t states = g.state_count();
  const std::size_t iters = static_cast<std::size_t>(cfg.walks_per_vertex);
  if (states == 0) return {};

  // per-iteration start orders, fixed before any parallel work
  std::vector<std::vector<std::uint32_t>> order(iters);
  for (std::size_t it = 0; it < iters; ++it) {
    order[it].resize(states);
    for (std::size_t i = 0; i < states; ++i) order[it][i] = static_cast<std::uint32_t>(i);
    Rng shuffle_rng(mix_seed(cfg.rng_seed, 0x73687566ull, it));
    shuffle_rng.shuffle(order[it]);
  }

  const std::size_t total = iters * states;
  std::vector<Walk> slots(total);
  auto worker = [&](std::size_t begin, std::size_t end) {
    AliasCache cache(cfg.alias_cache_capacity);
    for (std::size_t slot = begin; slot < end; ++slot) {
      std::size_t it = slot / states;
      std::size_t state = order[it][slot % states];
      Rng rng(walk_stream_seed(cfg.rng_seed, state, it));
      slots[slot] = temporal_biased_walk(g, g.state_at(state), cfg, rng, &cache);
    }
  };

  int threads = std::min<int>(cfg.threads, static_cast<int>(total));
  if (threads <= 1) {
    worker(0, total);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      std::size_t begin = total * static_cast<std::size_t>(t) / static_cast<std::size_t>(threads);
      std::size_t end = total * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(threads);
      pool.emplace_back(worker, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  std::vector<Walk> corpus;
  corpus.reserve(total);
  for (auto& w : slots) {
    if (w.tokens.size() >= 2) corpus.push_back(std::move(w));
  }
  return corpus;
}

}  // namespace tbw
