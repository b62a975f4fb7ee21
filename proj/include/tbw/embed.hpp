#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tbw/core.hpp"
#include "tbw/sampler.hpp"

namespace tbw {

struct TrainConfig {
  int dim = 128;
  int window = 5;
  int negatives_per_positive = 5;
  int epochs = 5;
  double initial_lr = 0.025;
  double min_lr = 0.025 * 1e-4;
  double noise_exponent = 0.75;
  std::uint64_t rng_seed = 1;
  bool deterministic = true;  // single ordered update stream
  int threads = 1;            // used only when deterministic is off
  // optional pull between a vertex's per-snapshot vectors (SnapshotId tokens)
  double snapshot_tie_strength = 0.0;

  void validate() const;
};

struct Vocabulary {
  std::vector<std::int64_t> tokens;  // row -> token
  std::vector<std::int64_t> counts;
  std::unordered_map<std::int64_t, int> row_of;
  std::vector<double> noise_probs;  // proportional to count^noise_exponent

  int size() const { return static_cast<int>(tokens.size()); }
};

// Token occurrence counts over the corpus plus the negative-sampling noise
// distribution. Throws DataError on an empty corpus.
Vocabulary build_vocab(std::span<const Walk> corpus, double noise_exponent);

// All ordered (center, context) token pairs within the window; pairs of equal
// tokens from self-connection repeats are kept.
std::vector<std::pair<std::int64_t, std::int64_t>> positive_pairs(const Walk& walk, int window);

struct EmbeddingMatrix {
  int dim = 0;
  std::vector<std::int64_t> tokens;
  std::unordered_map<std::int64_t, int> row_of;
  std::vector<double> input;    // |V| x dim
  std::vector<double> context;  // |V| x dim

  std::span<double> row(int r) { return {input.data() + static_cast<std::size_t>(r) * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> row(int r) const { return {input.data() + static_cast<std::size_t>(r) * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> vector_of(std::int64_t token) const;
  bool has_token(std::int64_t token) const { return row_of.contains(token); }
};

// Loss of one positive pair with the given negatives:
//   -log sigma(in . ctx) - sum_neg log sigma(-(in . neg))
double sgns_pair_loss(std::span<const double> in, std::span<const double> ctx,
                      std::span<const std::span<const double>> negs);

// Analytic gradients of sgns_pair_loss, accumulated into the g_* buffers.
// Returns the loss.
double sgns_pair_grad(std::span<const double> in, std::span<const double> ctx,
                      std::span<const std::span<const double>> negs, std::span<double> g_in,
                      std::span<double> g_ctx, std::span<std::span<double>> g_negs);

struct TrainDiagnostics {
  std::vector<double> epoch_mean_loss;
  std::size_t pair_updates = 0;
  std::size_t oov_pairs = 0;
};

// Skip-Gram with negative sampling over the walk corpus. Input vectors start
// uniform in [-0.5/d, 0.5/d], context vectors at zero; lr decays linearly to
// min_lr over epochs * pairs updates. Returns input vectors as embeddings.
// Throws DataError if a non-finite value appears during training.
EmbeddingMatrix sgd_train(std::span<const Walk> corpus, const TrainConfig& cfg,
                          TrainDiagnostics* diag = nullptr);

// Averages per-snapshot state vectors into one vector per base id
// (SnapshotId-token matrices only; BaseId matrices pass through unchanged).
EmbeddingMatrix collapse_states_to_base(const EmbeddingMatrix& m, TokenMode mode);

// "N d" header then one line per vertex: name followed by d numbers
// (shortest round-trip formatting).
void export_embeddings(const EmbeddingMatrix& m, TokenMode mode,
                       const std::vector<std::string>& keys, std::ostream& out);

struct NamedEmbeddings {
  int dim = 0;
  std::vector<std::string> names;
  std::vector<double> vectors;  // n x dim
  std::unordered_map<std::string, int> row_of;
};

NamedEmbeddings import_embeddings(std::istream& in);

// Named vectors -> token-addressed matrix via the ingest key dictionary.
// Names without a known key are skipped.
EmbeddingMatrix to_matrix(const NamedEmbeddings& named,
                          const std::unordered_map<std::string, VertexId>& key_to_id);

}  // namespace tbw
