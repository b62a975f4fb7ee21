#include "tbw/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <thread>

#include "tbw/num.hpp"

namespace tbw {

namespace {

VertexPair normalized(VertexId a, VertexId b) { return a < b ? VertexPair{a, b} : VertexPair{b, a}; }

void write_double(std::ostream& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  out.write(buf, ptr - buf);
}

}  // namespace

void SplitSpec::validate() const {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ConfigError("split: test_fraction must lie in (0, 1)");
  }
  if (negative_ratio <= 0.0) throw ConfigError("split: negative_ratio must be positive");
}

Split make_split(const TemporalEdgeList& edges, const RoleTable& roles, const SplitSpec& spec,
                 Rng& rng) {
  spec.validate();
  if (edges.events.empty()) throw DataError("make_split: no events");

  std::set<VertexPair> all_pairs;
  for (const Event& e : edges.events) all_pairs.insert(normalized(e.u, e.v));

  Split split;
  split.train.keys = edges.keys;
  split.train.key_to_id = edges.key_to_id;

  std::set<VertexPair> hidden;
  if (spec.protocol == Protocol::Traditional) {
    std::vector<VertexPair> pairs(all_pairs.begin(), all_pairs.end());
    std::size_t n_hide = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(pairs.size())));
    rng.shuffle(pairs);
    hidden.insert(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_hide));
    for (const Event& e : edges.events) {
      if (!hidden.contains(normalized(e.u, e.v))) split.train.events.push_back(e);
    }
    split.test_pos.assign(hidden.begin(), hidden.end());
  } else {
    std::size_t n = edges.events.size();
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(n)));
    std::size_t n_train = n - n_test;
    split.train.events.assign(edges.events.begin(),
                              edges.events.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::set<VertexPair> train_pairs;
    for (const Event& e : split.train.events) train_pairs.insert(normalized(e.u, e.v));
    std::set<VertexPair> suffix_only;
    for (std::size_t i = n_train; i < n; ++i) {
      VertexPair p = normalized(edges.events[i].u, edges.events[i].v);
      if (!train_pairs.contains(p)) suffix_only.insert(p);
    }
    split.test_pos.assign(suffix_only.begin(), suffix_only.end());
  }

  // negatives: distinct pairs unconnected anywhere in the full data
  std::size_t needed = static_cast<std::size_t>(
      std::llround(spec.negative_ratio * static_cast<double>(split.test_pos.size())));
  const std::size_t n_verts = static_cast<std::size_t>(edges.vertex_count());

  std::size_t pool = 0;
  if (spec.restrict_cross_role) {
    std::size_t n_users = static_cast<std::size_t>(std::count(roles.begin(), roles.end(), Role::User));
    std::size_t n_devs = roles.size() - n_users;
    std::size_t connected_cross = 0;
    for (const VertexPair& p : all_pairs) {
      if (roles[static_cast<std::size_t>(p.first)] != roles[static_cast<std::size_t>(p.second)]) {
        ++connected_cross;
      }
    }
    pool = n_users * n_devs - connected_cross;
  } else {
    pool = n_verts * (n_verts - 1) / 2 - all_pairs.size();
  }
  if (pool < needed) {
    throw DataError("make_split: need " + std::to_string(needed) + " negative pairs but only " +
                    std::to_string(pool) + " unconnected candidates exist");
  }

  auto admissible = [&](VertexId a, VertexId b) {
    if (a == b) return false;
    if (spec.restrict_cross_role &&
        roles[static_cast<std::size_t>(a)] == roles[static_cast<std::size_t>(b)]) {
      return false;
    }
    return !all_pairs.contains(normalized(a, b));
  };

  std::set<VertexPair> negatives;
  std::size_t attempts = 0, max_attempts = 50 * std::max<std::size_t>(needed, 1);
  while (negatives.size() < needed && attempts < max_attempts) {
    ++attempts;
    VertexId a = static_cast<VertexId>(rng.uniform_index(n_verts));
    VertexId b = static_cast<VertexId>(rng.uniform_index(n_verts));
    if (admissible(a, b)) negatives.insert(normalized(a, b));
  }
  if (negatives.size() < needed) {
    // dense fallback: enumerate the full candidate pool and sample from it
    std::vector<VertexPair> candidates;
    for (VertexId a = 0; a < edges.vertex_count(); ++a) {
      for (VertexId b = a + 1; b < edges.vertex_count(); ++b) {
        if (admissible(a, b) && !negatives.contains({a, b})) candidates.push_back({a, b});
      }
    }
    rng.shuffle(candidates);
    for (const VertexPair& p : candidates) {
      if (negatives.size() >= needed) break;
      negatives.insert(p);
    }
  }
  split.test_neg.assign(negatives.begin(), negatives.end());
  return split;
}

FeatureResult edge_features(const EmbeddingMatrix& m, std::span<const VertexPair> pairs,
                            FeatureOp op) {
  FeatureResult result;
  const std::size_t d = static_cast<std::size_t>(m.dim);
  for (const VertexPair& p : pairs) {
    if (!m.has_token(p.first) || !m.has_token(p.second)) {
      ++result.dropped_oov;
      continue;
    }
    auto fu = m.vector_of(p.first);
    auto fv = m.vector_of(p.second);
    for (std::size_t i = 0; i < d; ++i) {
      result.features.push_back(op == FeatureOp::Average ? (fu[i] + fv[i]) / 2.0 : fu[i] * fv[i]);
    }
    result.pairs.push_back(p);
  }
  return result;
}

double LogRegModel::score(std::span<const double> x) const {
  double z = bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += weights[i] * x[i];
  return num::sigmoid(z);
}

LogRegModel train_logreg(std::span<const double> features, std::span<const int> labels, int dim,
                         double l2, int max_iters) {
  const std::size_t n = labels.size();
  if (n == 0 || features.size() != n * static_cast<std::size_t>(dim)) {
    throw ConfigError("train_logreg: feature/label shape mismatch");
  }
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("train_logreg: need both classes present");

  const std::size_t d = static_cast<std::size_t>(dim);
  LogRegModel model;
  model.weights.assign(d, 0.0);

  // Lipschitz bound for the mean logistic loss over bias-augmented rows
  double mean_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      double x = features[i * d + j];
      s += x * x;
    }
    mean_sq += s;
  }
  mean_sq /= static_cast<double>(n);
  const double step = 1.0 / (0.25 * mean_sq + l2);

  std::vector<double> grad(d + 1);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = features.data() + i * d;
      double z = model.bias;
      for (std::size_t j = 0; j < d; ++j) z += model.weights[j] * x[j];
      double err = num::sigmoid(z) - static_cast<double>(labels[i]);
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[j];
      grad[d] += err;
    }
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] = grad[j] / static_cast<double>(n) + l2 * model.weights[j];
      norm_sq += grad[j] * grad[j];
    }
    grad[d] /= static_cast<double>(n);
    norm_sq += grad[d] * grad[d];
    model.final_grad_norm = std::sqrt(norm_sq);
    model.iterations = iter + 1;
    if (model.final_grad_norm < 1e-6) break;
    for (std::size_t j = 0; j < d; ++j) model.weights[j] -= step * grad[j];
    model.bias -= step * grad[d];
  }
  return model;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ConfigError("auc: shape mismatch");
  }
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<std::size_t>(y != 0);
  std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auc: need both classes present");

  auto ranks = num::ranks_with_ties(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) rank_sum += ranks[i];
  }
  double u = rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

SeedOutcome run_seed(const TemporalEdgeList& edges, const RoleTable& roles,
                     const ExperimentConfig& cfg, std::uint64_t seed, bool inner_threads) {
  SeedOutcome outcome;
  outcome.seed = seed;
  try {
    Rng split_rng(mix_seed(seed, 0x73706c69ull));
    Split split = make_split(edges, roles, cfg.split, split_rng);
    if (split.test_pos.empty()) throw DataError("split produced no test positives");

    EmbeddingMatrix matrix;
    if (cfg.fixed_embeddings) {
      matrix = *cfg.fixed_embeddings;
    } else {
      TssnGraph graph = build_tssn(split.train, roles, cfg.tssn);

      WalkConfig wcfg = cfg.walk;
      wcfg.rng_seed = mix_seed(seed, 0x77616c6bull);
      if (!inner_threads) wcfg.threads = 1;
      std::vector<Walk> corpus =
          cfg.corpus_generator ? cfg.corpus_generator(graph, wcfg) : generate_corpus(graph, wcfg);

      TrainConfig tcfg = cfg.train;
      tcfg.rng_seed = mix_seed(seed, 0x74726169ull);
      if (!inner_threads) tcfg.threads = 1;
      matrix = sgd_train(corpus, tcfg);
      matrix = collapse_states_to_base(matrix, cfg.walk.token_mode);
    }

    FeatureResult pos = edge_features(matrix, split.test_pos, cfg.feature_op);
    FeatureResult neg = edge_features(matrix, split.test_neg, cfg.feature_op);
    outcome.dropped_pairs = pos.dropped_oov + neg.dropped_oov;

    auto stratified = [&](std::size_t count, Rng& r) {
      std::vector<std::size_t> idx(count);
      for (std::size_t i = 0; i < count; ++i) idx[i] = i;
      r.shuffle(idx);
      std::size_t hold = static_cast<std::size_t>(
          std::llround(cfg.holdout_fraction * static_cast<double>(count)));
      if (count >= 2) hold = std::clamp<std::size_t>(hold, 1, count - 1);
      return std::pair{idx, hold};
    };
    Rng hold_rng(mix_seed(seed, 0x686f6c64ull));
    auto [pos_idx, pos_hold] = stratified(pos.pairs.size(), hold_rng);
    auto [neg_idx, neg_hold] = stratified(neg.pairs.size(), hold_rng);
    if (pos.pairs.size() < 2 || neg.pairs.size() < 2) {
      throw DataError("too few labeled pairs after OOV filtering");
    }

    const std::size_t d = static_cast<std::size_t>(matrix.dim);
    std::vector<double> train_x, hold_x;
    std::vector<int> train_y;
    std::vector<int> hold_y;
    auto emit = [&](const FeatureResult& f, std::span<const std::size_t> idx, std::size_t hold,
                    int label) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double* row = f.features.data() + idx[k] * d;
        bool is_hold = k < hold;
        auto& xs = is_hold ? hold_x : train_x;
        xs.insert(xs.end(), row, row + d);
        (is_hold ? hold_y : train_y).push_back(label);
      }
    };
    emit(pos, pos_idx, pos_hold, 1);
    emit(neg, neg_idx, neg_hold, 0);

    LogRegModel lr = train_logreg(train_x, train_y, matrix.dim, cfg.logreg_l2, cfg.logreg_iters);
    std::vector<double> scores(hold_y.size());
    for (std::size_t i = 0; i < hold_y.size(); ++i) {
      scores[i] = lr.score({hold_x.data() + i * d, d});
    }
    outcome.auc = auc(scores, hold_y);
    outcome.ok = true;
  } catch (const std::exception& ex) {
    outcome.ok = false;
    outcome.error = ex.what();
  }
  return outcome;
}

}  // namespace

EvalReport run_experiment(const TemporalEdgeList& edges, const RoleTable& roles,
                          const ExperimentConfig& cfg, std::span<const std::uint64_t> seeds) {
  EvalReport report;
  report.protocol = cfg.split.protocol;
  report.seeds.resize(seeds.size());

  int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(seeds.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      report.seeds[i] = run_seed(edges, roles, cfg, seeds[i], true);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= seeds.size()) break;
          report.seeds[i] = run_seed(edges, roles, cfg, seeds[i], false);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> aucs;
  for (const SeedOutcome& s : report.seeds) {
    if (s.ok) aucs.push_back(s.auc);
  }
  report.completed = aucs.size();
  if (!aucs.empty()) report.mean_auc = num::mean(aucs);
  if (aucs.size() >= 2) report.std_auc = std::sqrt(num::sample_variance(aucs));
  return report;
}

std::vector<SweepCell> parameter_sweep(const TemporalEdgeList& edges, const RoleTable& roles,
                                       const ExperimentConfig& base, const SweepGrid& grid,
                                       std::span<const std::uint64_t> seeds) {
  auto axis = [](const std::vector<double>& g, double base_value) {
    return g.empty() ? std::vector<double>{base_value} : g;
  };
  std::vector<SweepCell> cells;
  for (double r : axis(grid.r, base.walk.r)) {
    for (double q : axis(grid.q, base.walk.q)) {
      for (double alpha : axis(grid.alpha, base.walk.alpha)) {
        for (double beta : axis(grid.beta, base.walk.beta)) {
          SweepCell cell{r, q, alpha, beta, {}};
          ExperimentConfig cfg = base;
          cfg.walk.r = r;
          cfg.walk.q = q;
          cfg.walk.alpha = alpha;
          cfg.walk.beta = beta;
          cell.report = run_experiment(edges, roles, cfg, seeds);
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

void write_report(const EvalReport& report, const std::map<std::string, std::string>& params,
                  std::ostream& out) {
  out << "protocol";
  for (const auto& [k, v] : params) out << '\t' << k;
  out << "\tseed\tauc\tstatus\n";
  const char* proto = report.protocol == Protocol::Traditional ? "traditional" : "time-preserving";
  for (const SeedOutcome& s : report.seeds) {
    out << proto;
    for (const auto& [k, v] : params) out << '\t' << v;
    out << '\t' << s.seed << '\t';
    if (s.ok) {
      write_double(out, s.auc);
      out << "\tok\n";
    } else {
      out << "nan\t" << s.error << '\n';
    }
  }
  out << proto;
  for (const auto& [k, v] : params) out << '\t' << v;
  out << "\tmean\t";
  write_double(out, report.mean_auc);
  out << "\tstd=";
  write_double(out, report.std_auc);
  out << '\n';
}

void write_sweep(std::span<const SweepCell> cells, std::ostream& out) {
  out << "r\tq\talpha\tbeta\tcompleted\tmean_auc\tstd_auc\n";
  for (const SweepCell& c : cells) {
    write_double(out, c.r);
    out << '\t';
    write_double(out, c.q);
    out << '\t';
    write_double(out, c.alpha);
    out << '\t';
    write_double(out, c.beta);
    out << '\t' << c.report.completed << '\t';
    write_double(out, c.report.mean_auc);
    out << '\t';
    write_double(out, c.report.std_auc);
    out << '\n';
  }
}

}  // namespace tbw
