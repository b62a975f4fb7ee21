#pragma once

// Test-side reference implementations, kept independent of the library's
// computation paths: the joint transition probability is evaluated literally
// (each factor normalized on its own, then multiplied, then renormalized) with
// BFS distances on an adjacency rebuilt from the graph surface.

#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tbw/eval.hpp"
#include "tbw/sampler.hpp"
#include "tbw/tssn.hpp"

namespace tbw::test {

struct LayeredAdjacency {
  std::map<std::pair<VertexId, std::int32_t>, std::vector<std::pair<VertexId, std::int32_t>>> nbrs;
};

inline LayeredAdjacency full_adjacency(const TssnGraph& g) {
  LayeredAdjacency adj;
  for (std::int32_t t = 0; t < g.snapshot_count(); ++t) {
    for (VertexId v : g.snapshot_vertices(t)) {
      auto& list = adj.nbrs[{v, t}];
      for (const auto& n : g.intra_neighbors({v, t})) list.push_back({n.base, t});
      if (g.has_self_connection({v, t})) {
        list.push_back({v, t + 1});
        adj.nbrs[{v, t + 1}].push_back({v, t});  // undirected for distance purposes
      }
    }
  }
  return adj;
}

inline int bfs_distance(const LayeredAdjacency& adj, TssnVertex from, TssnVertex to, int cap = 4) {
  std::pair<VertexId, std::int32_t> src{from.base, from.snap}, dst{to.base, to.snap};
  if (src == dst) return 0;
  std::map<std::pair<VertexId, std::int32_t>, int> dist;
  std::deque<std::pair<VertexId, std::int32_t>> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    int d = dist[cur];
    if (d >= cap) continue;
    auto it = adj.nbrs.find(cur);
    if (it == adj.nbrs.end()) continue;
    for (const auto& next : it->second) {
      if (dist.contains(next)) continue;
      dist[next] = d + 1;
      if (next == dst) return d + 1;
      queue.push_back(next);
    }
  }
  return cap + 1;
}

// Literal evaluation: P_S, P_T, P_R each normalized over the candidate set,
// multiplied, and renormalized.
inline std::vector<double> joint_distribution_oracle(const TssnGraph& g,
                                                     std::optional<TssnVertex> prev,
                                                     TssnVertex cur, const WalkConfig& cfg,
                                                     const std::vector<TssnEdge>& candidates) {
  const std::size_t n = candidates.size();
  std::vector<double> ps(n), pt(n), pr(n);
  LayeredAdjacency adj = full_adjacency(g);

  for (std::size_t i = 0; i < n; ++i) {
    const TssnEdge& e = candidates[i];
    if (prev) {
      int d = bfs_distance(adj, *prev, e.dst);
      double psi = d == 0 ? 1.0 / cfg.r : d == 1 ? 1.0 : 1.0 / cfg.q;
      ps[i] = psi * e.weight;
    } else {
      ps[i] = e.weight;  // first step: static weight only
    }
    pt[i] = e.kind == EdgeKind::SelfConnection ? cfg.alpha : 1.0 - cfg.alpha;
    if (cfg.role_mode == RoleMode::Unbiased) {
      pr[i] = 1.0 / static_cast<double>(n);
    } else {
      TssnVertex ref = prev.value_or(cur);
      pr[i] = g.role(ref.base) == g.role(e.dst.base) ? cfg.beta : 1.0 - cfg.beta;
    }
  }
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
  };
  normalize(ps);
  normalize(pt);
  normalize(pr);
  std::vector<double> joint(n);
  for (std::size_t i = 0; i < n; ++i) joint[i] = ps[i] * pt[i] * pr[i];
  normalize(joint);
  return joint;
}

// O(n^2) Mann-Whitney with the 1/2 tie convention
inline double auc_pairwise(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

// Newton-Raphson logistic regression; with l2 > 0 the optimum is unique, so
// any correct optimizer must land on the same weights.
inline std::vector<double> newton_logreg(std::span<const double> xs, std::span<const int> ys,
                                         int dim, double l2, int iters = 200) {
  const std::size_t n = ys.size();
  const std::size_t d = static_cast<std::size_t>(dim) + 1;  // bias last
  std::vector<double> w(d, 0.0);
  for (int iter = 0; iter < iters; ++iter) {
    std::vector<double> grad(d, 0.0);
    std::vector<double> hess(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = w[d - 1];
      for (std::size_t j = 0; j + 1 < d; ++j) z += w[j] * xs[i * (d - 1) + j];
      double p = 1.0 / (1.0 + std::exp(-z));
      double err = p - ys[i];
      double s = p * (1.0 - p);
      for (std::size_t j = 0; j < d; ++j) {
        double xj = j + 1 < d ? xs[i * (d - 1) + j] : 1.0;
        grad[j] += err * xj;
        for (std::size_t k = 0; k < d; ++k) {
          double xk = k + 1 < d ? xs[i * (d - 1) + k] : 1.0;
          hess[j * d + k] += s * xj * xk;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] /= static_cast<double>(n);
      for (std::size_t k = 0; k < d; ++k) hess[j * d + k] /= static_cast<double>(n);
    }
    for (std::size_t j = 0; j + 1 < d; ++j) {  // penalty on weights, not bias
      grad[j] += l2 * w[j];
      hess[j * d + j] += l2;
    }
    // solve hess * step = grad by gaussian elimination
    std::vector<double> a(hess);
    std::vector<double> b(grad);
    for (std::size_t col = 0; col < d; ++col) {
      std::size_t pivot = col;
      for (std::size_t r = col + 1; r < d; ++r) {
        if (std::fabs(a[r * d + col]) > std::fabs(a[pivot * d + col])) pivot = r;
      }
      for (std::size_t c = 0; c < d; ++c) std::swap(a[col * d + c], a[pivot * d + c]);
      std::swap(b[col], b[pivot]);
      for (std::size_t r = 0; r < d; ++r) {
        if (r == col || a[col * d + col] == 0.0) continue;
        double f = a[r * d + col] / a[col * d + col];
        for (std::size_t c = 0; c < d; ++c) a[r * d + c] -= f * a[col * d + c];
        b[r] -= f * b[col];
      }
    }
    double shift = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double step = b[j] / a[j * d + j];
      w[j] -= step;
      shift = std::max(shift, std::fabs(step));
    }
    if (shift < 1e-12) break;
  }
  return w;
}

// Welch's t statistic straight from the textbook formula
inline double welch_t_direct(std::span<const double> a, std::span<const double> b) {
  auto moments = [](std::span<const double> xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(xs.size() - 1);
    return std::pair{m, v};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  return (ma - mb) /
         std::sqrt(va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size()));
}

}  // namespace tbw::test
