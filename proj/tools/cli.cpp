#include "tbw/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tbw/embed.hpp"
#include "tbw/eval.hpp"
#include "tbw/ingest.hpp"
#include "tbw/num.hpp"
#include "tbw/sampler.hpp"
#include "tbw/stats.hpp"
#include "tbw/tssn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tbw::cli {

namespace {

struct Options {
  // paths
  std::string events, roles, aliases;
  std::string out = "out";
  std::string embeddings_file;   // external embeddings for evaluate/recommend
  std::string classifier_file;   // recommend
  // global
  std::uint64_t seed = 1;
  int seed_count = 10;
  int threads = 1;
  bool deterministic = true;
  // tssn
  double epsilon_days = 30.0;
  std::int64_t events_per_snapshot = 0;  // 0 = unset
  bool calendar_months = false;
  double self_weight = 1.0;
  // walk
  WalkConfig walk;
  std::string role_mode = "unbiased";
  std::string token_mode = "base";
  // train
  TrainConfig train;
  // eval
  std::string protocol = "traditional";
  double test_fraction = 0.25;
  bool cross_role_negatives = false;
  std::string feature_op = "average";
  double logreg_l2 = 0.01;
  int logreg_iters = 5000;
  double holdout_fraction = 0.25;
  // sweep grids, comma-separated
  std::string grid_r, grid_q, grid_alpha, grid_beta;
  // recommend
  std::string target;
  int top_k = 10;
  bool cross_role_only = false;
  // synth
  SyntheticSpec synth;
};

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::ostringstream hex;
  hex << "fnv1a64:" << std::hex << num::fnv1a64(buf.str());
  return hex.str();
}

std::string fmt(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  return values;
}

std::ifstream open_input(const fs::path& path, const std::string& hint) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("missing input '" + path.string() + "'" + (hint.empty() ? "" : "; " + hint));
  }
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

class Stage {
 public:
  Stage(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
    fs::create_directories(opt.out);
  }

  fs::path out(const std::string& name) const { return fs::path(opt_.out) / name; }

  void note_input(const fs::path& p) { inputs_[p.filename().string()] = hash_file(p); }
  void note_artifact(const fs::path& p) { artifacts_[p.filename().string()] = hash_file(p); }

  void write_manifest(const std::map<std::string, std::string>& config) {
    json m;
    m["command"] = command_;
    m["seed"] = opt_.seed;
    m["config"] = config;
    m["inputs"] = inputs_;
    m["artifacts"] = artifacts_;
    auto path = out("manifest." + command_ + ".json");
    open_output(path) << m.dump(2) << '\n';
    // the same settings as a key=value file, loadable via --config
    auto cfg = open_output(out(command_ + ".config"));
    for (const auto& [k, v] : config) cfg << k << '=' << v << '\n';
  }

 private:
  std::string command_;
  const Options& opt_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> artifacts_;
};

TssnBuildConfig tssn_config(const Options& opt) {
  TssnBuildConfig cfg;
  if (opt.calendar_months) {
    cfg.calendar_months = true;
  } else if (opt.events_per_snapshot > 0) {
    cfg.events_per_snapshot = opt.events_per_snapshot;
  } else {
    cfg.epsilon_seconds = static_cast<std::int64_t>(std::llround(opt.epsilon_days * 86400.0));
  }
  cfg.self_connection_weight = opt.self_weight;
  return cfg;
}

WalkConfig walk_config(const Options& opt) {
  WalkConfig cfg = opt.walk;
  cfg.role_mode = opt.role_mode == "biased" ? RoleMode::Biased : RoleMode::Unbiased;
  cfg.token_mode = opt.token_mode == "snapshot" ? TokenMode::SnapshotId : TokenMode::BaseId;
  cfg.rng_seed = opt.seed;
  cfg.threads = opt.threads;
  return cfg;
}

TrainConfig train_config(const Options& opt) {
  TrainConfig cfg = opt.train;
  cfg.rng_seed = opt.seed;
  cfg.deterministic = opt.deterministic;
  cfg.threads = opt.threads;
  return cfg;
}

SplitSpec split_spec(const Options& opt) {
  SplitSpec spec;
  spec.protocol =
      opt.protocol == "time-preserving" ? Protocol::TimePreserving : Protocol::Traditional;
  spec.test_fraction = opt.test_fraction;
  spec.restrict_cross_role = opt.cross_role_negatives;
  return spec;
}

ExperimentConfig experiment_config(const Options& opt) {
  ExperimentConfig cfg;
  cfg.tssn = tssn_config(opt);
  cfg.walk = walk_config(opt);
  cfg.train = train_config(opt);
  cfg.split = split_spec(opt);
  cfg.feature_op = opt.feature_op == "hadamard" ? FeatureOp::Hadamard : FeatureOp::Average;
  cfg.logreg_l2 = opt.logreg_l2;
  cfg.logreg_iters = opt.logreg_iters;
  cfg.holdout_fraction = opt.holdout_fraction;
  cfg.threads = opt.threads;
  return cfg;
}

std::vector<std::uint64_t> derive_seeds(const Options& opt) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(opt.seed_count));
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    seeds[i] = mix_seed(opt.seed, 0x73656564ull, i);
  }
  return seeds;
}

std::map<std::string, std::string> common_config(const Options& opt) {
  std::map<std::string, std::string> cfg;
  cfg["seed"] = std::to_string(opt.seed);
  cfg["threads"] = std::to_string(opt.threads);
  cfg["deterministic"] = opt.deterministic ? "true" : "false";
  return cfg;
}

void echo_tssn(const Options& opt, std::map<std::string, std::string>& cfg) {
  if (opt.calendar_months) {
    cfg["calendar-months"] = "true";
  } else if (opt.events_per_snapshot > 0) {
    cfg["events-per-snapshot"] = std::to_string(opt.events_per_snapshot);
  } else {
    cfg["epsilon-days"] = fmt(opt.epsilon_days);
  }
  cfg["self-weight"] = fmt(opt.self_weight);
}

void echo_walk(const Options& opt, std::map<std::string, std::string>& cfg) {
  cfg["r"] = fmt(opt.walk.r);
  cfg["q"] = fmt(opt.walk.q);
  cfg["alpha"] = fmt(opt.walk.alpha);
  cfg["beta"] = fmt(opt.walk.beta);
  cfg["role-mode"] = opt.role_mode;
  cfg["walks"] = std::to_string(opt.walk.walks_per_vertex);
  cfg["walk-length"] = std::to_string(opt.walk.walk_length);
  cfg["token-mode"] = opt.token_mode;
}

void echo_train(const Options& opt, std::map<std::string, std::string>& cfg) {
  cfg["dim"] = std::to_string(opt.train.dim);
  cfg["window"] = std::to_string(opt.train.window);
  cfg["negatives"] = std::to_string(opt.train.negatives_per_positive);
  cfg["epochs"] = std::to_string(opt.train.epochs);
  cfg["lr"] = fmt(opt.train.initial_lr);
  cfg["min-lr"] = fmt(opt.train.min_lr);
  cfg["noise-exponent"] = fmt(opt.train.noise_exponent);
}

void echo_eval(const Options& opt, std::map<std::string, std::string>& cfg) {
  cfg["protocol"] = opt.protocol;
  cfg["test-fraction"] = fmt(opt.test_fraction);
  cfg["cross-role-negatives"] = opt.cross_role_negatives ? "true" : "false";
  cfg["feature-op"] = opt.feature_op;
  cfg["l2"] = fmt(opt.logreg_l2);
  cfg["seeds"] = std::to_string(opt.seed_count);
}

std::pair<TemporalEdgeList, RoleTable> load_ingested(Stage& stage, const Options& opt) {
  auto edges_path = stage.out("edges.tsv");
  auto verts_path = stage.out("vertices.tsv");
  auto edges_in = open_input(edges_path, "run 'tbw ingest' first");
  auto verts_in = open_input(verts_path, "run 'tbw ingest' first");
  stage.note_input(edges_path);
  stage.note_input(verts_path);
  return read_edges_and_vertices(edges_in, verts_in);
}

std::string render_token(std::int64_t token, TokenMode mode) {
  if (mode == TokenMode::BaseId) return std::to_string(token);
  TssnVertex v = state_of_token(token, TokenMode::SnapshotId);
  return std::to_string(v.base) + "@" + std::to_string(v.snap);
}

std::int64_t parse_token(const std::string& text, TokenMode mode) {
  if (mode == TokenMode::BaseId) return std::stoll(text);
  auto at = text.find('@');
  if (at == std::string::npos) throw DataError("corpus token '" + text + "' lacks '@'");
  TssnVertex v{static_cast<VertexId>(std::stol(text.substr(0, at))),
               static_cast<std::int32_t>(std::stol(text.substr(at + 1)))};
  return token_of(v, TokenMode::SnapshotId);
}

int cmd_ingest(const Options& opt) {
  Stage stage("ingest", opt);
  auto events_in = open_input(opt.events, "pass --events");
  stage.note_input(opt.events);
  ParseResult parsed = parse_events(events_in);
  if (!parsed.issues.empty()) {
    for (const auto& issue : parsed.issues) {
      std::cerr << "events line " << issue.line << ": " << issue.message << '\n';
    }
    throw DataError(std::to_string(parsed.issues.size()) + " malformed event line(s)");
  }
  auto roles_in = open_input(opt.roles, "pass --roles");
  stage.note_input(opt.roles);
  RoleMap roles = parse_roles(roles_in);
  if (!opt.aliases.empty()) {
    auto alias_in = open_input(opt.aliases, "pass --aliases");
    stage.note_input(opt.aliases);
    parsed.events = apply_alias_map(std::move(parsed.events), parse_alias_map(alias_in));
  }
  auto [edges, role_table] = clean_and_index(parsed.events, roles);
  if (edges.events.empty()) throw DataError("no events survive cleaning");

  write_edges(edges, open_output(stage.out("edges.tsv")));
  write_vertices(edges, role_table, open_output(stage.out("vertices.tsv")));
  stage.note_artifact(stage.out("edges.tsv"));
  stage.note_artifact(stage.out("vertices.tsv"));

  auto cfg = common_config(opt);
  cfg["events"] = opt.events;
  cfg["roles"] = opt.roles;
  if (!opt.aliases.empty()) cfg["aliases"] = opt.aliases;
  stage.write_manifest(cfg);
  std::cout << "ingested " << edges.events.size() << " events over " << edges.keys.size()
            << " vertices\n";
  return 0;
}

int cmd_stats(const Options& opt) {
  Stage stage("stats", opt);
  auto [edges, roles] = load_ingested(stage, opt);
  RoleActivitySummary summary = role_ttest(edges, roles);
  TendencyReport tendency = tendency_ratio(edges, roles);
  write_ttest_report(summary, open_output(stage.out("ttest.tsv")));
  write_tendency_report(tendency, open_output(stage.out("tendency.tsv")));
  stage.note_artifact(stage.out("ttest.tsv"));
  stage.note_artifact(stage.out("tendency.tsv"));
  stage.write_manifest(common_config(opt));
  std::cout << "sent: t=" << summary.sent.t << " p=" << summary.sent.p_two_sided
            << "; received: t=" << summary.received.t << " p=" << summary.received.p_two_sided
            << '\n';
  if (tendency.cross_ratio) {
    std::cout << "cross-role tendency ratio " << *tendency.cross_ratio << '\n';
  }
  return 0;
}

int cmd_build(const Options& opt) {
  Stage stage("build", opt);
  auto [edges, roles] = load_ingested(stage, opt);
  TssnGraph graph = build_tssn(edges, roles, tssn_config(opt));
  dump_edges(graph, open_output(stage.out("tssn.tsv")));
  auto stats = snapshot_stats(graph);
  auto snap_out = open_output(stage.out("snapshots.tsv"));
  snap_out << "snapshot\tvertices\tedges\ttotal_weight\n";
  for (std::size_t t = 0; t < stats.size(); ++t) {
    snap_out << t << '\t' << stats[t].vertex_count << '\t' << stats[t].edge_count << '\t'
             << fmt(stats[t].total_weight) << '\n';
  }
  stage.note_artifact(stage.out("tssn.tsv"));
  stage.note_artifact(stage.out("snapshots.tsv"));
  auto cfg = common_config(opt);
  echo_tssn(opt, cfg);
  stage.write_manifest(cfg);
  std::cout << "tssn: " << graph.snapshot_count() << " snapshots, " << graph.state_count()
            << " states, " << graph.intra_edge_count() << " intra edges, "
            << graph.self_connection_count() << " self-connections\n";
  return 0;
}

int cmd_walk(const Options& opt) {
  Stage stage("walk", opt);
  auto [edges, roles] = load_ingested(stage, opt);
  TssnGraph graph = build_tssn(edges, roles, tssn_config(opt));
  WalkConfig wcfg = walk_config(opt);
  std::vector<Walk> corpus = generate_corpus(graph, wcfg);
  auto out = open_output(stage.out("corpus.txt"));
  for (const Walk& walk : corpus) {
    for (std::size_t i = 0; i < walk.tokens.size(); ++i) {
      if (i) out << ' ';
      out << render_token(walk.tokens[i], wcfg.token_mode);
    }
    out << '\n';
  }
  out.close();
  stage.note_artifact(stage.out("corpus.txt"));
  auto cfg = common_config(opt);
  echo_tssn(opt, cfg);
  echo_walk(opt, cfg);
  stage.write_manifest(cfg);
  std::cout << "corpus: " << corpus.size() << " walks\n";
  return 0;
}

int cmd_embed(const Options& opt) {
  Stage stage("embed", opt);
  auto corpus_path = stage.out("corpus.txt");
  auto corpus_in = open_input(corpus_path, "run 'tbw walk' first");
  stage.note_input(corpus_path);
  auto verts_path = stage.out("vertices.tsv");
  auto verts_in = open_input(verts_path, "run 'tbw ingest' first");
  stage.note_input(verts_path);

  std::vector<std::string> keys;
  {
    std::string line;
    while (std::getline(verts_in, line)) {
      if (line.empty()) continue;
      auto tab1 = line.find('\t');
      auto tab2 = line.find('\t', tab1 + 1);
      keys.push_back(line.substr(tab1 + 1, tab2 - tab1 - 1));
    }
  }

  TokenMode mode = TokenMode::BaseId;
  std::vector<Walk> corpus;
  std::string line;
  bool first_token = true;
  while (std::getline(corpus_in, line)) {
    if (line.empty()) continue;
    Walk walk;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (first_token) {
        mode = tok.find('@') == std::string::npos ? TokenMode::BaseId : TokenMode::SnapshotId;
        first_token = false;
      }
      walk.tokens.push_back(parse_token(tok, mode));
    }
    if (walk.tokens.size() >= 2) corpus.push_back(std::move(walk));
  }
  if (corpus.empty()) throw DataError("corpus is empty");

  TrainConfig tcfg = train_config(opt);
  TrainDiagnostics diag;
  EmbeddingMatrix matrix = sgd_train(corpus, tcfg, &diag);
  export_embeddings(matrix, mode, keys, open_output(stage.out("embeddings.txt")));
  stage.note_artifact(stage.out("embeddings.txt"));
  auto cfg = common_config(opt);
  echo_train(opt, cfg);
  stage.write_manifest(cfg);
  std::cout << "trained " << matrix.tokens.size() << " vectors, dim " << matrix.dim;
  if (!diag.epoch_mean_loss.empty()) std::cout << ", final loss " << diag.epoch_mean_loss.back();
  std::cout << '\n';
  return 0;
}

int cmd_evaluate(const Options& opt) {
  Stage stage("evaluate", opt);
  auto [edges, roles] = load_ingested(stage, opt);
  ExperimentConfig cfg = experiment_config(opt);

  EmbeddingMatrix fixed;
  if (!opt.embeddings_file.empty()) {
    auto emb_in = open_input(opt.embeddings_file, "pass --embeddings");
    stage.note_input(opt.embeddings_file);
    fixed = to_matrix(import_embeddings(emb_in), edges.key_to_id);
    cfg.fixed_embeddings = &fixed;
  }

  auto seeds = derive_seeds(opt);
  EvalReport report = run_experiment(edges, roles, cfg, seeds);

  std::map<std::string, std::string> params;
  echo_walk(opt, params);
  write_report(report, params, open_output(stage.out("report.tsv")));
  stage.note_artifact(stage.out("report.tsv"));

  auto manifest_cfg = common_config(opt);
  echo_tssn(opt, manifest_cfg);
  echo_walk(opt, manifest_cfg);
  echo_train(opt, manifest_cfg);
  echo_eval(opt, manifest_cfg);
  stage.write_manifest(manifest_cfg);
  std::cout << "mean AUC " << report.mean_auc << " (std " << report.std_auc << ", "
            << report.completed << '/' << report.seeds.size() << " seeds)\n";
  for (const auto& s : report.seeds) {
    if (!s.ok) std::cerr << "seed " << s.seed << " failed: " << s.error << '\n';
  }
  return report.completed == 0 ? 3 : 0;
}

int cmd_sweep(const Options& opt) {
  Stage stage("sweep", opt);
  auto [edges, roles] = load_ingested(stage, opt);
  ExperimentConfig base = experiment_config(opt);
  SweepGrid grid;
  grid.r = parse_grid(opt.grid_r);
  grid.q = parse_grid(opt.grid_q);
  grid.alpha = parse_grid(opt.grid_alpha);
  grid.beta = parse_grid(opt.grid_beta);
  auto seeds = derive_seeds(opt);
  auto cells = parameter_sweep(edges, roles, base, grid, seeds);
  write_sweep(cells, open_output(stage.out("sweep.tsv")));
  stage.note_artifact(stage.out("sweep.tsv"));
  auto cfg = common_config(opt);
  echo_tssn(opt, cfg);
  echo_walk(opt, cfg);
  echo_train(opt, cfg);
  echo_eval(opt, cfg);
  cfg["grid-r"] = opt.grid_r;
  cfg["grid-q"] = opt.grid_q;
  cfg["grid-alpha"] = opt.grid_alpha;
  cfg["grid-beta"] = opt.grid_beta;
  stage.write_manifest(cfg);
  std::cout << cells.size() << " sweep cells written\n";
  return 0;
}

int cmd_recommend(const Options& opt) {
  Stage stage("recommend", opt);
  auto [edges, roles] = load_ingested(stage, opt);

  fs::path emb_path = opt.embeddings_file.empty() ? stage.out("embeddings.txt")
                                                  : fs::path(opt.embeddings_file);
  auto emb_in = open_input(emb_path, "run 'tbw embed' first or pass --embeddings");
  stage.note_input(emb_path);
  EmbeddingMatrix matrix = to_matrix(import_embeddings(emb_in), edges.key_to_id);
  matrix = collapse_states_to_base(matrix, TokenMode::BaseId);

  auto target_it = edges.key_to_id.find(opt.target);
  if (target_it == edges.key_to_id.end()) {
    throw DataError("unknown target vertex '" + opt.target + "'");
  }
  VertexId target = target_it->second;
  if (!matrix.has_token(target)) throw DataError("target vertex has no embedding");

  std::set<VertexPair> linked;
  for (const Event& e : edges.events) {
    linked.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
  }

  FeatureOp op = opt.feature_op == "hadamard" ? FeatureOp::Hadamard : FeatureOp::Average;
  fs::path clf_path =
      opt.classifier_file.empty() ? stage.out("classifier.json") : fs::path(opt.classifier_file);
  LogRegModel model;
  if (fs::exists(clf_path)) {
    json j = json::parse(std::ifstream(clf_path));
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    stage.note_input(clf_path);
  } else {
    // fit on the observed links vs an equal sample of unlinked pairs
    std::vector<VertexPair> positives(linked.begin(), linked.end());
    SplitSpec spec;
    spec.test_fraction = 0.5;  // unused below; reuse the negative sampler only
    Rng rng(mix_seed(opt.seed, 0x7265636full));
    std::set<VertexPair> negatives;
    std::size_t attempts = 0;
    const std::size_t n_verts = static_cast<std::size_t>(edges.vertex_count());
    while (negatives.size() < positives.size() && attempts < 200 * positives.size()) {
      ++attempts;
      VertexId a = static_cast<VertexId>(rng.uniform_index(n_verts));
      VertexId b = static_cast<VertexId>(rng.uniform_index(n_verts));
      if (a == b) continue;
      VertexPair p{std::min(a, b), std::max(a, b)};
      if (!linked.contains(p)) negatives.insert(p);
    }
    FeatureResult pos_f = edge_features(matrix, positives, op);
    std::vector<VertexPair> neg_pairs(negatives.begin(), negatives.end());
    FeatureResult neg_f = edge_features(matrix, neg_pairs, op);
    std::vector<double> xs;
    std::vector<int> ys;
    xs.insert(xs.end(), pos_f.features.begin(), pos_f.features.end());
    ys.insert(ys.end(), pos_f.pairs.size(), 1);
    xs.insert(xs.end(), neg_f.features.begin(), neg_f.features.end());
    ys.insert(ys.end(), neg_f.pairs.size(), 0);
    model = train_logreg(xs, ys, matrix.dim, opt.logreg_l2, opt.logreg_iters);
    json j;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["feature_op"] = opt.feature_op;
    open_output(clf_path) << j.dump(2) << '\n';
    stage.note_artifact(clf_path);
  }

  struct Candidate {
    VertexId id;
    double score;
  };
  std::vector<Candidate> candidates;
  for (VertexId v = 0; v < edges.vertex_count(); ++v) {
    if (v == target || !matrix.has_token(v)) continue;
    if (linked.contains({std::min(target, v), std::max(target, v)})) continue;
    if (opt.cross_role_only &&
        roles[static_cast<std::size_t>(v)] == roles[static_cast<std::size_t>(target)]) {
      continue;
    }
    VertexPair p{std::min(target, v), std::max(target, v)};
    FeatureResult f = edge_features(matrix, std::vector<VertexPair>{p}, op);
    candidates.push_back({v, model.score(f.features)});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(opt.top_k), candidates.size());

  auto out = open_output(stage.out("recommendations.tsv"));
  out << "rank\tkey\trole\tscore\n";
  for (std::size_t i = 0; i < k; ++i) {
    out << (i + 1) << '\t' << edges.keys[static_cast<std::size_t>(candidates[i].id)] << '\t'
        << role_name(roles[static_cast<std::size_t>(candidates[i].id)]) << '\t'
        << fmt(candidates[i].score) << '\n';
  }
  out.close();
  stage.note_artifact(stage.out("recommendations.tsv"));
  auto cfg = common_config(opt);
  cfg["target"] = opt.target;
  cfg["top-k"] = std::to_string(opt.top_k);
  cfg["cross-role-only"] = opt.cross_role_only ? "true" : "false";
  stage.write_manifest(cfg);
  std::cout << "wrote " << k << " recommendations for " << opt.target << '\n';
  return 0;
}

int cmd_synth(const Options& opt) {
  Stage stage("synth", opt);
  SyntheticSpec spec = opt.synth;
  spec.rng_seed = opt.seed;
  auto [edges, roles] = generate_synthetic(spec);
  // emit in the ingest file formats
  auto events_out = open_output(stage.out("events.tsv"));
  for (const Event& e : edges.events) {
    events_out << edges.keys[static_cast<std::size_t>(e.u)] << '\t'
               << edges.keys[static_cast<std::size_t>(e.v)] << '\t' << e.ts << '\n';
  }
  events_out.close();
  auto roles_out = open_output(stage.out("roles.tsv"));
  for (VertexId id = 0; id < edges.vertex_count(); ++id) {
    roles_out << edges.keys[static_cast<std::size_t>(id)] << '\t'
              << role_name(roles[static_cast<std::size_t>(id)]) << '\n';
  }
  roles_out.close();
  stage.note_artifact(stage.out("events.tsv"));
  stage.note_artifact(stage.out("roles.tsv"));
  auto cfg = common_config(opt);
  cfg["synth-users"] = std::to_string(spec.n_users);
  cfg["synth-developers"] = std::to_string(spec.n_developers);
  cfg["synth-snapshots"] = std::to_string(spec.snapshots);
  cfg["synth-events"] = std::to_string(spec.events_per_snapshot);
  cfg["synth-affinity"] = fmt(spec.cross_role_affinity);
  cfg["synth-skew"] = fmt(spec.activity_skew);
  cfg["synth-drift"] = fmt(spec.community_drift);
  stage.write_manifest(cfg);
  std::cout << "synthetic dataset: " << edges.events.size() << " events, " << edges.keys.size()
            << " vertices\n";
  return 0;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->set_config("--config");
  cmd->add_option("--out", opt.out, "output directory for artifacts");
  cmd->add_option("--seed", opt.seed, "global rng seed");
  cmd->add_option("--threads", opt.threads, "worker threads");
  cmd->add_flag("--deterministic,!--no-deterministic", opt.deterministic,
                "single-stream updates in training");
}

void add_tssn(CLI::App* cmd, Options& opt) {
  auto* eps = cmd->add_option("--epsilon-days", opt.epsilon_days, "snapshot span in days");
  auto* evs = cmd->add_option("--events-per-snapshot", opt.events_per_snapshot,
                              "fixed-activity bucketing: events per snapshot");
  auto* cal = cmd->add_flag("--calendar-months", opt.calendar_months,
                            "bucket by UTC calendar month");
  eps->excludes(evs);
  eps->excludes(cal);
  evs->excludes(cal);
  cmd->add_option("--self-weight", opt.self_weight, "self-connection edge weight");
}

void add_walk(CLI::App* cmd, Options& opt) {
  cmd->add_option("--r", opt.walk.r, "return parameter");
  cmd->add_option("--q", opt.walk.q, "in-out parameter");
  cmd->add_option("--alpha", opt.walk.alpha, "temporal bias in [0.1, 0.9]");
  cmd->add_option("--beta", opt.walk.beta, "role bias in [0.1, 0.9]");
  cmd->add_option("--role-mode", opt.role_mode, "unbiased | biased")
      ->check(CLI::IsMember({"unbiased", "biased"}));
  cmd->add_option("--walks", opt.walk.walks_per_vertex, "walks per (vertex, snapshot) state");
  cmd->add_option("--walk-length", opt.walk.walk_length, "steps per walk");
  cmd->add_option("--token-mode", opt.token_mode, "base | snapshot")
      ->check(CLI::IsMember({"base", "snapshot"}));
}

void add_train(CLI::App* cmd, Options& opt) {
  cmd->add_option("--dim", opt.train.dim, "embedding dimension");
  cmd->add_option("--window", opt.train.window, "skip-gram context window");
  cmd->add_option("--negatives", opt.train.negatives_per_positive, "negatives per positive");
  cmd->add_option("--epochs", opt.train.epochs, "training epochs");
  cmd->add_option("--lr", opt.train.initial_lr, "initial learning rate");
  cmd->add_option("--min-lr", opt.train.min_lr, "learning-rate floor");
  cmd->add_option("--noise-exponent", opt.train.noise_exponent, "negative-sampling exponent");
  cmd->add_option("--tie-strength", opt.train.snapshot_tie_strength,
                  "pull between a vertex's per-snapshot vectors (snapshot tokens)");
}

void add_eval(CLI::App* cmd, Options& opt) {
  cmd->add_option("--protocol", opt.protocol, "traditional | time-preserving")
      ->check(CLI::IsMember({"traditional", "time-preserving"}));
  cmd->add_option("--test-fraction", opt.test_fraction, "held-out fraction");
  cmd->add_flag("--cross-role-negatives", opt.cross_role_negatives,
                "sample negatives from user-developer pairs only");
  cmd->add_option("--feature-op", opt.feature_op, "average | hadamard")
      ->check(CLI::IsMember({"average", "hadamard"}));
  cmd->add_option("--l2", opt.logreg_l2, "logistic-regression L2 penalty");
  cmd->add_option("--lr-iters", opt.logreg_iters, "logistic-regression iteration cap");
  cmd->add_option("--holdout-fraction", opt.holdout_fraction,
                  "labeled pairs held out for AUC scoring");
  cmd->add_option("--seeds", opt.seed_count, "number of evaluation seeds");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  Options opt;
  CLI::App app{"time-series snapshot network embedding and partner recommendation"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "parse and clean an interaction log");
  add_common(ingest, opt);
  ingest->add_option("--events", opt.events, "events file (sender<TAB>recipient<TAB>unix_ts)")
      ->required();
  ingest->add_option("--roles", opt.roles, "roles file (key<TAB>user|developer)")->required();
  ingest->add_option("--aliases", opt.aliases, "alias file (alias<TAB>canonical)");

  auto* stats = app.add_subcommand("stats", "role activity t-test and communication tendency");
  add_common(stats, opt);

  auto* build = app.add_subcommand("build", "construct the snapshot network");
  add_common(build, opt);
  add_tssn(build, opt);

  auto* walk = app.add_subcommand("walk", "generate the temporal biased walk corpus");
  add_common(walk, opt);
  add_tssn(walk, opt);
  add_walk(walk, opt);

  auto* embed = app.add_subcommand("embed", "train skip-gram embeddings from the corpus");
  add_common(embed, opt);
  add_train(embed, opt);

  auto* evaluate = app.add_subcommand("evaluate", "link-prediction evaluation with AUC");
  add_common(evaluate, opt);
  add_tssn(evaluate, opt);
  add_walk(evaluate, opt);
  add_train(evaluate, opt);
  add_eval(evaluate, opt);
  evaluate->add_option("--embeddings", opt.embeddings_file,
                       "evaluate an externally produced embedding file");

  auto* sweep = app.add_subcommand("sweep", "grid sweep over r, q, alpha, beta");
  add_common(sweep, opt);
  add_tssn(sweep, opt);
  add_walk(sweep, opt);
  add_train(sweep, opt);
  add_eval(sweep, opt);
  sweep->add_option("--grid-r", opt.grid_r, "comma-separated r grid");
  sweep->add_option("--grid-q", opt.grid_q, "comma-separated q grid");
  sweep->add_option("--grid-alpha", opt.grid_alpha, "comma-separated alpha grid");
  sweep->add_option("--grid-beta", opt.grid_beta, "comma-separated beta grid");

  auto* recommend = app.add_subcommand("recommend", "rank partner candidates for a vertex");
  add_common(recommend, opt);
  recommend->add_option("--target", opt.target, "target vertex key")->required();
  recommend->add_option("--k,--top-k", opt.top_k, "number of candidates to return");
  recommend->add_flag("--cross-role-only", opt.cross_role_only,
                      "only candidates of the opposite role");
  recommend->add_option("--embeddings", opt.embeddings_file, "embedding file to score with");
  recommend->add_option("--classifier", opt.classifier_file, "classifier artifact (json)");
  recommend->add_option("--feature-op", opt.feature_op, "average | hadamard")
      ->check(CLI::IsMember({"average", "hadamard"}));
  recommend->add_option("--l2", opt.logreg_l2, "logistic-regression L2 penalty");

  auto* synth = app.add_subcommand("synth", "emit a synthetic benchmark dataset");
  add_common(synth, opt);
  synth->add_option("--synth-users", opt.synth.n_users, "user count");
  synth->add_option("--synth-developers", opt.synth.n_developers, "developer count");
  synth->add_option("--synth-snapshots", opt.synth.snapshots, "snapshot count");
  synth->add_option("--synth-events", opt.synth.events_per_snapshot, "events per snapshot");
  synth->add_option("--synth-affinity", opt.synth.cross_role_affinity,
                    "cross-role event probability");
  synth->add_option("--synth-skew", opt.synth.activity_skew, "sender activity skew");
  synth->add_option("--synth-drift", opt.synth.community_drift,
                    "community reassignment rate per snapshot");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(ingest)) return cmd_ingest(opt);
    if (app.got_subcommand(stats)) return cmd_stats(opt);
    if (app.got_subcommand(build)) return cmd_build(opt);
    if (app.got_subcommand(walk)) return cmd_walk(opt);
    if (app.got_subcommand(embed)) return cmd_embed(opt);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(opt);
    if (app.got_subcommand(recommend)) return cmd_recommend(opt);
    if (app.got_subcommand(synth)) return cmd_synth(opt);
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace tbw::cli
