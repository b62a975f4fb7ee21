#include "tbw/embed.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "tbw/alias.hpp"
#include "tbw/num.hpp"

namespace tbw {

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("train: dim must be >= 1");
  if (window < 1) throw ConfigError("train: window must be >= 1");
  if (negatives_per_positive < 1) throw ConfigError("train: negatives_per_positive must be >= 1");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (initial_lr <= 0.0 || min_lr <= 0.0 || min_lr >= initial_lr) {
    throw ConfigError("train: need 0 < min_lr < initial_lr");
  }
  if (threads < 1) throw ConfigError("train: threads must be >= 1");
}

Vocabulary build_vocab(std::span<const Walk> corpus, double noise_exponent) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  // token -> count in first-appearance order for a reproducible row layout
  Vocabulary vocab;
  for (const Walk& w : corpus) {
    for (std::int64_t tok : w.tokens) {
      auto [it, inserted] = vocab.row_of.try_emplace(tok, vocab.size());
      if (inserted) {
        vocab.tokens.push_back(tok);
        vocab.counts.push_back(0);
      }
      ++vocab.counts[static_cast<std::size_t>(it->second)];
    }
  }
  vocab.noise_probs.resize(vocab.tokens.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < vocab.counts.size(); ++i) {
    vocab.noise_probs[i] = std::pow(static_cast<double>(vocab.counts[i]), noise_exponent);
    sum += vocab.noise_probs[i];
  }
  for (double& p : vocab.noise_probs) p /= sum;
  return vocab;
}

std::vector<std::pair<std::int64_t, std::int64_t>> positive_pairs(const Walk& walk, int window) {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  const auto n = static_cast<std::ptrdiff_t>(walk.tokens.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
    std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      pairs.emplace_back(walk.tokens[static_cast<std::size_t>(i)],
                         walk.tokens[static_cast<std::size_t>(j)]);
    }
  }
  return pairs;
}

std::span<const double> EmbeddingMatrix::vector_of(std::int64_t token) const {
  auto it = row_of.find(token);
  if (it == row_of.end()) throw DataError("embedding lookup: unknown token");
  return row(it->second);
}

double sgns_pair_loss(std::span<const double> in, std::span<const double> ctx,
                      std::span<const std::span<const double>> negs) {
  auto dot = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  double loss = -num::log_sigmoid(dot(in, ctx));
  for (const auto& neg : negs) loss -= num::log_sigmoid(-dot(in, neg));
  return loss;
}

double sgns_pair_grad(std::span<const double> in, std::span<const double> ctx,
                      std::span<const std::span<const double>> negs, std::span<double> g_in,
                      std::span<double> g_ctx, std::span<std::span<double>> g_negs) {
  const std::size_t d = in.size();
  auto dot = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
  };
  double pos_score = dot(in, ctx);
  double loss = -num::log_sigmoid(pos_score);
  // d/dx of -log sigma(x) is sigma(x) - 1
  double coeff = num::sigmoid(pos_score) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    g_in[i] += coeff * ctx[i];
    g_ctx[i] += coeff * in[i];
  }
  for (std::size_t k = 0; k < negs.size(); ++k) {
    double neg_score = dot(in, negs[k]);
    loss -= num::log_sigmoid(-neg_score);
    double c = num::sigmoid(neg_score);  // d/dx of -log sigma(-x)
    for (std::size_t i = 0; i < d; ++i) {
      g_in[i] += c * negs[k][i];
      g_negs[k][i] += c * in[i];
    }
  }
  return loss;
}

namespace {

struct SnapshotTies {
  // row -> rows of the same base vertex in adjacent snapshots
  std::vector<std::vector<int>> adjacent;
};

SnapshotTies build_ties(const Vocabulary& vocab) {
  SnapshotTies ties;
  ties.adjacent.resize(static_cast<std::size_t>(vocab.size()));
  std::map<std::pair<VertexId, std::int32_t>, int> by_state;
  for (int r = 0; r < vocab.size(); ++r) {
    TssnVertex v = state_of_token(vocab.tokens[static_cast<std::size_t>(r)], TokenMode::SnapshotId);
    by_state[{v.base, v.snap}] = r;
  }
  for (const auto& [state, r] : by_state) {
    for (std::int32_t ds : {-1, 1}) {
      if (auto it = by_state.find({state.first, state.second + ds}); it != by_state.end()) {
        ties.adjacent[static_cast<std::size_t>(r)].push_back(it->second);
      }
    }
  }
  return ties;
}

void check_finite(const std::vector<double>& v, const char* what, int epoch) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw DataError(std::string("sgd_train: non-finite value in ") + what + " after epoch " +
                      std::to_string(epoch));
    }
  }
}

}  // namespace

EmbeddingMatrix sgd_train(std::span<const Walk> corpus, const TrainConfig& cfg,
                          TrainDiagnostics* diag) {
  cfg.validate();
  Vocabulary vocab = build_vocab(corpus, cfg.noise_exponent);
  AliasTable noise(vocab.noise_probs);

  EmbeddingMatrix m;
  m.dim = cfg.dim;
  m.tokens = vocab.tokens;
  m.row_of = vocab.row_of;
  const std::size_t rows = vocab.tokens.size();
  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  m.input.resize(rows * d);
  m.context.assign(rows * d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    Rng init_rng(mix_seed(cfg.rng_seed, 0x696e6974ull, r));
    for (std::size_t i = 0; i < d; ++i) {
      m.input[r * d + i] = (init_rng.uniform() - 0.5) / static_cast<double>(cfg.dim);
    }
  }

  std::size_t pairs_per_epoch = 0;
  for (const Walk& w : corpus) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.tokens.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      pairs_per_epoch += static_cast<std::size_t>(std::min<std::ptrdiff_t>(n - 1, i + cfg.window) -
                                                  std::max<std::ptrdiff_t>(0, i - cfg.window));
    }
  }
  const double total_updates =
      std::max<double>(1.0, static_cast<double>(pairs_per_epoch) * std::max(cfg.epochs, 1));

  const bool use_ties =
      cfg.snapshot_tie_strength > 0.0;
  SnapshotTies ties;
  if (use_ties) ties = build_ties(vocab);

  TrainDiagnostics local_diag;
  TrainDiagnostics& dg = diag ? *diag : local_diag;
  dg.epoch_mean_loss.clear();
  dg.pair_updates = 0;

  auto process_walks = [&](std::size_t walk_begin, std::size_t walk_end, Rng& rng,
                           std::size_t done_offset, double* loss_acc, std::size_t* count_acc) {
    std::vector<double> g_in(d);
    std::size_t done = done_offset;
    for (std::size_t wi = walk_begin; wi < walk_end; ++wi) {
      auto pairs = positive_pairs(corpus[wi], cfg.window);
      for (const auto& [center_tok, context_tok] : pairs) {
        int center = vocab.row_of.at(center_tok);
        int context = vocab.row_of.at(context_tok);
        double lr = cfg.initial_lr * (1.0 - static_cast<double>(done) / total_updates);
        lr = std::max(lr, cfg.min_lr);
        ++done;

        double* in = m.input.data() + static_cast<std::size_t>(center) * d;
        double* ctx = m.context.data() + static_cast<std::size_t>(context) * d;
        std::fill(g_in.begin(), g_in.end(), 0.0);

        double pos_score = 0.0;
        for (std::size_t i = 0; i < d; ++i) pos_score += in[i] * ctx[i];
        double loss = -num::log_sigmoid(pos_score);
        double coeff = num::sigmoid(pos_score) - 1.0;
        for (std::size_t i = 0; i < d; ++i) {
          g_in[i] += coeff * ctx[i];
          ctx[i] -= lr * coeff * in[i];
        }
        for (int k = 0; k < cfg.negatives_per_positive; ++k) {
          int neg = static_cast<int>(noise.sample(rng));
          if (vocab.tokens[static_cast<std::size_t>(neg)] == context_tok) continue;
          double* nv = m.context.data() + static_cast<std::size_t>(neg) * d;
          double neg_score = 0.0;
          for (std::size_t i = 0; i < d; ++i) neg_score += in[i] * nv[i];
          loss -= num::log_sigmoid(-neg_score);
          double c = num::sigmoid(neg_score);
          for (std::size_t i = 0; i < d; ++i) {
            g_in[i] += c * nv[i];
            nv[i] -= lr * c * in[i];
          }
        }
        for (std::size_t i = 0; i < d; ++i) in[i] -= lr * g_in[i];

        if (use_ties) {
          for (int other : ties.adjacent[static_cast<std::size_t>(center)]) {
            double* ov = m.input.data() + static_cast<std::size_t>(other) * d;
            for (std::size_t i = 0; i < d; ++i) {
              double delta = lr * cfg.snapshot_tie_strength * (in[i] - ov[i]);
              in[i] -= delta;
              ov[i] += delta;
            }
          }
        }
        *loss_acc += loss;
        ++*count_acc;
      }
    }
    return done;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    std::size_t done_offset = static_cast<std::size_t>(epoch) * pairs_per_epoch;
    if (cfg.deterministic || cfg.threads == 1) {
      Rng rng(mix_seed(cfg.rng_seed, 0x6e656773ull, static_cast<std::uint64_t>(epoch)));
      process_walks(0, corpus.size(), rng, done_offset, &epoch_loss, &epoch_pairs);
    } else {
      // hogwild-style: unsynchronized sparse updates, lost updates tolerated
      int threads = std::min<int>(cfg.threads, static_cast<int>(corpus.size()));
      std::vector<std::thread> pool;
      std::vector<double> losses(static_cast<std::size_t>(threads), 0.0);
      std::vector<std::size_t> counts(static_cast<std::size_t>(threads), 0);
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          std::size_t begin = corpus.size() * static_cast<std::size_t>(t) /
                              static_cast<std::size_t>(threads);
          std::size_t end = corpus.size() * static_cast<std::size_t>(t + 1) /
                            static_cast<std::size_t>(threads);
          Rng rng(mix_seed(cfg.rng_seed, 0x6e656773ull,
                           static_cast<std::uint64_t>(epoch) * 1000 + static_cast<std::uint64_t>(t)));
          std::size_t pair_offset = pairs_per_epoch * static_cast<std::size_t>(t) /
                                    static_cast<std::size_t>(threads);
          process_walks(begin, end, rng, done_offset + pair_offset,
                        &losses[static_cast<std::size_t>(t)], &counts[static_cast<std::size_t>(t)]);
        });
      }
      for (auto& th : pool) th.join();
      for (double l : losses) epoch_loss += l;
      for (std::size_t c : counts) epoch_pairs += c;
    }
    dg.pair_updates += epoch_pairs;
    dg.epoch_mean_loss.push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
    check_finite(m.input, "input vectors", epoch);
    check_finite(m.context, "context vectors", epoch);
  }
  return m;
}

EmbeddingMatrix collapse_states_to_base(const EmbeddingMatrix& m, TokenMode mode) {
  if (mode == TokenMode::BaseId) return m;
  EmbeddingMatrix out;
  out.dim = m.dim;
  const std::size_t d = static_cast<std::size_t>(m.dim);
  std::map<VertexId, std::vector<int>> rows_by_base;
  for (std::size_t r = 0; r < m.tokens.size(); ++r) {
    TssnVertex v = state_of_token(m.tokens[r], TokenMode::SnapshotId);
    rows_by_base[v.base].push_back(static_cast<int>(r));
  }
  for (const auto& [base, rows] : rows_by_base) {
    int row = static_cast<int>(out.tokens.size());
    out.tokens.push_back(base);
    out.row_of.emplace(base, row);
    out.input.resize(out.tokens.size() * d, 0.0);
    double* dst = out.input.data() + static_cast<std::size_t>(row) * d;
    for (int r : rows) {
      const double* src = m.input.data() + static_cast<std::size_t>(r) * d;
      for (std::size_t i = 0; i < d; ++i) dst[i] += src[i];
    }
    for (std::size_t i = 0; i < d; ++i) dst[i] /= static_cast<double>(rows.size());
  }
  out.context.assign(out.tokens.size() * d, 0.0);
  return out;
}

namespace {

void write_double(std::ostream& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  out.write(buf, ptr - buf);
}

}  // namespace

void export_embeddings(const EmbeddingMatrix& m, TokenMode mode,
                       const std::vector<std::string>& keys, std::ostream& out) {
  out << m.tokens.size() << ' ' << m.dim << '\n';
  for (std::size_t r = 0; r < m.tokens.size(); ++r) {
    out << token_name(m.tokens[r], mode, keys);
    auto row = m.row(static_cast<int>(r));
    for (double x : row) {
      out << ' ';
      write_double(out, x);
    }
    out << '\n';
  }
}

NamedEmbeddings import_embeddings(std::istream& in) {
  NamedEmbeddings named;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty embedding file");
  std::istringstream header(line);
  std::size_t n = 0;
  if (!(header >> n >> named.dim) || named.dim < 1) {
    throw ParseError(1, "embedding header must be 'N d'");
  }
  named.vectors.reserve(n * static_cast<std::size_t>(named.dim));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    // the key is everything before the final `dim` fields
    std::vector<std::size_t> spaces;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == ' ') spaces.push_back(i);
    }
    if (spaces.size() < static_cast<std::size_t>(named.dim)) {
      throw ParseError(line_no, "expected key plus " + std::to_string(named.dim) + " values");
    }
    std::size_t key_end = spaces[spaces.size() - static_cast<std::size_t>(named.dim)];
    std::string key = line.substr(0, key_end);
    named.row_of.emplace(key, static_cast<int>(named.names.size()));
    named.names.push_back(key);
    const char* p = line.data() + key_end;
    const char* end = line.data() + line.size();
    for (int i = 0; i < named.dim; ++i) {
      while (p < end && *p == ' ') ++p;
      double value = 0.0;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc{}) throw ParseError(line_no, "bad number in embedding row");
      named.vectors.push_back(value);
      p = next;
    }
  }
  if (named.names.size() != n) {
    throw ParseError(line_no, "embedding row count does not match header");
  }
  return named;
}

EmbeddingMatrix to_matrix(const NamedEmbeddings& named,
                          const std::unordered_map<std::string, VertexId>& key_to_id) {
  EmbeddingMatrix m;
  m.dim = named.dim;
  const std::size_t d = static_cast<std::size_t>(named.dim);
  for (std::size_t r = 0; r < named.names.size(); ++r) {
    auto it = key_to_id.find(named.names[r]);
    if (it == key_to_id.end()) continue;
    int row = static_cast<int>(m.tokens.size());
    m.tokens.push_back(it->second);
    m.row_of.emplace(it->second, row);
    m.input.insert(m.input.end(), named.vectors.begin() + static_cast<std::ptrdiff_t>(r * d),
                   named.vectors.begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
  }
  m.context.assign(m.tokens.size() * d, 0.0);
  return m;
}

}  // namespace tbw
