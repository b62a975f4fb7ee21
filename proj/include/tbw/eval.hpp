#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tbw/core.hpp"
#include "tbw/embed.hpp"
#include "tbw/rng.hpp"
#include "tbw/sampler.hpp"
#include "tbw/tssn.hpp"

namespace tbw {

enum class Protocol : std::uint8_t { Traditional, TimePreserving };
enum class FeatureOp : std::uint8_t { Average, Hadamard };

struct SplitSpec {
  Protocol protocol = Protocol::Traditional;
  double test_fraction = 0.25;
  double negative_ratio = 1.0;
  bool restrict_cross_role = false;  // negatives from user-developer pairs only

  void validate() const;
};

using VertexPair = std::pair<VertexId, VertexId>;  // normalized u < v

struct Split {
  TemporalEdgeList train;
  std::vector<VertexPair> test_pos;
  std::vector<VertexPair> test_neg;
};

// Traditional: hides test_fraction of the distinct linked pairs (all their
// events). TimePreserving: keeps the first (1 - test_fraction) of the
// time-sorted events; positives are pairs appearing only in the suffix.
// Negatives are distinct pairs unconnected anywhere in the full data.
// Throws DataError when the negative pool is too small.
Split make_split(const TemporalEdgeList& edges, const RoleTable& roles, const SplitSpec& spec,
                 Rng& rng);

struct FeatureResult {
  std::vector<double> features;   // kept pairs x dim, row-major
  std::vector<VertexPair> pairs;  // pairs actually featurized
  std::size_t dropped_oov = 0;
};

// Average: (f(u)+f(v))/2; Hadamard: elementwise product. Pairs with an
// endpoint missing from the vocabulary are dropped and counted.
FeatureResult edge_features(const EmbeddingMatrix& m, std::span<const VertexPair> pairs,
                            FeatureOp op = FeatureOp::Average);

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double final_grad_norm = 0.0;
  int iterations = 0;

  double score(std::span<const double> x) const;  // sigma(w.x + b)
};

// Full-batch gradient descent on the L2-penalized mean logistic loss with a
// Lipschitz step; stops at gradient norm < 1e-6 or max_iters. Throws DataError
// when only one class is present.
LogRegModel train_logreg(std::span<const double> features, std::span<const int> labels, int dim,
                         double l2 = 0.01, int max_iters = 5000);

// Mann-Whitney AUC; tied scores contribute 1/2.
double auc(std::span<const double> scores, std::span<const int> labels);

struct SeedOutcome {
  std::uint64_t seed = 0;
  double auc = 0.0;
  std::size_t dropped_pairs = 0;
  bool ok = false;
  std::string error;
};

struct EvalReport {
  Protocol protocol = Protocol::Traditional;
  std::vector<SeedOutcome> seeds;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  std::size_t completed = 0;
  std::map<std::string, std::string> config_echo;
};

// Hook for swapping the walk stage (used to compare against reference
// pipelines); default is generate_corpus.
using CorpusGenerator = std::function<std::vector<Walk>(const TssnGraph&, const WalkConfig&)>;

struct ExperimentConfig {
  TssnBuildConfig tssn;
  WalkConfig walk;
  TrainConfig train;
  SplitSpec split;
  FeatureOp feature_op = FeatureOp::Average;
  double logreg_l2 = 0.01;
  int logreg_iters = 5000;
  double holdout_fraction = 0.25;  // labeled pairs held out for AUC
  int threads = 1;                 // seeds run in parallel
  CorpusGenerator corpus_generator;  // optional override
  // evaluation-only mode: score these embeddings instead of re-embedding
  const EmbeddingMatrix* fixed_embeddings = nullptr;
};

// Per seed: split -> TSSN on train events -> corpus -> embeddings -> features
// -> logistic regression on a stratified (1 - holdout) share of the labeled
// pairs -> AUC on the holdout. A failing stage marks that seed and continues.
EvalReport run_experiment(const TemporalEdgeList& edges, const RoleTable& roles,
                          const ExperimentConfig& cfg, std::span<const std::uint64_t> seeds);

struct SweepCell {
  double r = 1.0, q = 1.0, alpha = 0.5, beta = 0.5;
  EvalReport report;
};

struct SweepGrid {
  std::vector<double> r, q, alpha, beta;  // empty -> keep the base value
};

std::vector<SweepCell> parameter_sweep(const TemporalEdgeList& edges, const RoleTable& roles,
                                       const ExperimentConfig& base, const SweepGrid& grid,
                                       std::span<const std::uint64_t> seeds);

// "protocol r q alpha beta seed auc" rows plus a trailing summary row
void write_report(const EvalReport& report, const std::map<std::string, std::string>& params,
                  std::ostream& out);
void write_sweep(std::span<const SweepCell> cells, std::ostream& out);

}  // namespace tbw
