// csyn: batch command-line front end.
//
// Exit codes: 0 success, 1 I/O error, 2 input format error, 3 a numeric
// check (gcn-check) failed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "csyn/attention.hpp"
#include "csyn/edit.hpp"
#include "csyn/ensemble.hpp"
#include "csyn/error.hpp"
#include "csyn/eval.hpp"
#include "csyn/oracle.hpp"
#include "csyn/project.hpp"
#include "csyn/subword.hpp"
#include "csyn/syntax_graph.hpp"
#include "csyn/tree.hpp"

namespace {

using namespace csyn;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A format error tied to a file.
struct InputError : std::runtime_error {
  InputError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + what) {}
};

struct RunConfig {
  std::uint64_t seed = 0;
  double lambda = 0.5;
  std::size_t d = 64;
  std::size_t layers = 3;
  double threshold = 0.5;
  double lr = 0.5;
  std::size_t epochs = 500;
  double l2 = 0.0;
  std::string placement = "below";
  bool self_loops = false;
  std::string summary_path;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("error reading " + path);
  return lines;
}

std::vector<M2Sentence> read_m2_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return read_m2(in);
  } catch (const FormatError& e) {
    throw InputError(path, 0, e.what());
  }
}

void require_same_length(const std::string& a, std::size_t na, const std::string& b, std::size_t nb) {
  if (na != nb)
    throw InputError(b, 0, std::to_string(nb) + " lines, but " + a + " has " + std::to_string(na));
}

std::pair<Tokens, Tokens> split_pair(const std::string& path, std::size_t line_no, const std::string& line) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
    throw InputError(path, line_no, "expected exactly one TAB between source and target");
  return {split_tokens(std::string_view(line).substr(0, tab)), split_tokens(std::string_view(line).substr(tab + 1))};
}

Tree parse_tree_line(const std::string& path, std::size_t line_no, const std::string& line) {
  try {
    return parse_bracketed(line);
  } catch (const FormatError& e) {
    throw InputError(path, line_no, e.what());
  }
}

PseudoPlacement placement_of(const RunConfig& cfg) {
  return cfg.placement == "above" ? PseudoPlacement::above : PseudoPlacement::below;
}

int cmd_align(const std::string& path) {
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto [src, tgt] = split_pair(path, i + 1, lines[i]);
    std::cout << to_json(align(src, tgt)).dump() << '\n';
  }
  return 0;
}

int cmd_project(const std::string& pairs_path, const std::string& trees_path, const RunConfig& cfg) {
  const auto pairs = read_lines(pairs_path);
  const auto trees = read_lines(trees_path);
  require_same_length(pairs_path, pairs.size(), trees_path, trees.size());
  const ProjectionSummary summary = build_training_trees(
      pairs, trees, [](const Tree& t) { std::cout << serialize(t) << '\n'; }, {placement_of(cfg)});
  for (const SkippedPair& s : summary.skipped) spdlog::warn("{}:{}: skipped: {}", pairs_path, s.line, s.reason);
  const std::string json = summary.to_json().dump();
  if (cfg.summary_path.empty()) {
    std::cerr << json << '\n';
  } else {
    std::ofstream out(cfg.summary_path);
    if (!(out << json << '\n')) throw IoError("cannot write " + cfg.summary_path);
  }
  return 0;
}

int cmd_strip(const std::string& path) {
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Tree t = parse_tree_line(path, i + 1, lines[i]);
    try {
      std::cout << serialize(strip_pseudo(t)) << '\n';
    } catch (const std::invalid_argument& e) {
      throw InputError(path, i + 1, e.what());
    }
  }
  return 0;
}

int cmd_subword(const std::string& trees_path, const std::string& seg_path) {
  const auto trees = read_lines(trees_path);
  const auto segs = read_lines(seg_path);
  require_same_length(trees_path, trees.size(), seg_path, segs.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const Tree t = parse_tree_line(trees_path, i + 1, trees[i]);
    try {
      std::cout << serialize(to_subword_tree(t, parse_segmentation_line(segs[i]))) << '\n';
    } catch (const std::exception& e) {
      throw InputError(seg_path, i + 1, e.what());
    }
  }
  return 0;
}

void collect_labels(const Tree& t, std::set<std::string>& out) {
  if (t.is_terminal()) return;
  out.insert(t.label);
  for (const Tree& c : t.children) collect_labels(c, out);
}

int cmd_gcn_check(const std::string& path, const RunConfig& cfg) {
  constexpr double kKinkMargin = 1e-4;
  constexpr int kAttempts = 200;
  const auto lines = read_lines(path);
  std::vector<Tree> trees;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    trees.push_back(parse_tree_line(path, i + 1, lines[i]));
    collect_labels(trees.back(), labels);
  }
  const GcnStack stack = GcnStack::random({labels.begin(), labels.end()}, cfg.d, cfg.layers, cfg.seed, cfg.self_loops);
  const auto d = static_cast<Eigen::Index>(cfg.d);

  bool all_ok = true;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const SyntaxGraph g = build_graph(trees[i]);
    const auto rows = static_cast<Eigen::Index>(g.terminal_count());
    Matrix inits = oracle::random_matrix(rows, d, cfg.seed * 1000003 + i);

    // layer-by-layer comparison with the dense oracle
    double oracle_diff = 0.0;
    Matrix h = initial_states(g, inits, stack);
    oracle::Dense dense = oracle::to_dense(h);
    const auto adj = oracle::adjacency(g);
    for (const GcnLayerParams& layer : stack.layers) {
      h = gcn_layer(g, h, layer, stack.self_loops);
      std::vector<double> bias(layer.bias.data(), layer.bias.data() + layer.bias.size());
      dense = oracle::dense_gcn_layer(adj, dense, oracle::to_dense(layer.weight), bias, stack.self_loops);
      oracle_diff = std::max(oracle_diff, oracle::max_abs_diff(oracle::to_dense(h), dense));
    }
    const double encode_diff = oracle::max_abs_diff(oracle::to_dense(gcn_encode(g, inits, stack)), dense);

    int attempt = 0;
    while (attempt < kAttempts && oracle::min_abs_preactivation(g, inits, stack) < kKinkMargin)
      inits = oracle::random_matrix(rows, d, cfg.seed * 1000003 + i + 7919 * static_cast<std::uint64_t>(++attempt));

    nlohmann::json report{{"line", i + 1},
                          {"nodes", g.size()},
                          {"edges", g.edge_count()},
                          {"max_oracle_diff", std::max(oracle_diff, encode_diff)},
                          {"resampled", attempt}};
    bool ok = oracle_diff <= 1e-6 && encode_diff <= 1e-6;
    if (attempt < kAttempts) {
      const auto grads = oracle::check_gcn_gradients(g, stack, inits);
      report["max_grad_rel_error"] = grads.max_relative_error;
      report["grad_checked"] = grads.checked;
      ok = ok && grads.max_relative_error <= 1e-4;
    } else {
      report["max_grad_rel_error"] = nullptr;
      spdlog::warn("{}:{}: no kink-free inputs found, gradient check skipped", path, i + 1);
    }
    report["ok"] = ok;
    all_ok = all_ok && ok;
    std::cout << report.dump() << '\n';
  }
  return all_ok ? 0 : 3;
}

int cmd_fuse_demo(const RunConfig& cfg, std::size_t tokens) {
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const auto n = static_cast<Eigen::Index>(tokens);
  const Matrix syn = oracle::random_matrix(n, d, cfg.seed);
  const Matrix basic = oracle::random_matrix(n, d, cfg.seed + 1);
  const Matrix out = fuse(syn, basic, cfg.lambda);
  double diff = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      diff = std::max(diff, std::abs(out(i, j) - (cfg.lambda * syn(i, j) + (1.0 - cfg.lambda) * basic(i, j))));
  std::cout << nlohmann::json{{"lambda", cfg.lambda},
                              {"h_syn", matrix_to_json(syn)},
                              {"h_basic", matrix_to_json(basic)},
                              {"h_final", matrix_to_json(out)},
                              {"max_oracle_diff", diff}}
                   .dump()
            << '\n';
  return 0;
}

struct SystemInputs {
  std::vector<Tokens> src;
  std::vector<std::vector<Tokens>> hyps;  // per sentence, one per system
};

SystemInputs read_systems(const std::string& src_path, const std::vector<std::string>& hyp_paths) {
  if (hyp_paths.empty()) throw InputError(src_path, 0, "at least one hypothesis file is required");
  SystemInputs in;
  for (const std::string& line : read_lines(src_path)) in.src.push_back(split_tokens(line));
  in.hyps.resize(in.src.size());
  for (const std::string& path : hyp_paths) {
    const auto lines = read_lines(path);
    require_same_length(src_path, in.src.size(), path, lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) in.hyps[i].push_back(split_tokens(lines[i]));
  }
  return in;
}

int cmd_ensemble_train(const std::vector<std::string>& files, const RunConfig& cfg) {
  const std::string& gold_path = files.back();
  const SystemInputs in = read_systems(files.front(), {files.begin() + 1, files.end() - 1});
  const auto gold = read_m2_file(gold_path);
  if (gold.size() != in.src.size())
    throw InputError(gold_path, 0,
                     std::to_string(gold.size()) + " sentences, but " + files.front() + " has " +
                         std::to_string(in.src.size()));
  std::vector<EditCandidate> all;
  std::vector<int> labels;
  for (std::size_t i = 0; i < in.src.size(); ++i) {
    if (gold[i].src != in.src[i]) throw InputError(gold_path, 0, "sentence " + std::to_string(i + 1) + " differs from the source file");
    const auto cands = gather(in.src[i], in.hyps[i]);
    const auto y = gold_labels(cands, gold[i].edits);
    all.insert(all.end(), cands.begin(), cands.end());
    labels.insert(labels.end(), y.begin(), y.end());
  }
  if (all.empty()) throw InputError(files.front(), 0, "the systems propose no edits to learn from");
  const LogRegModel model = train(all, labels, {cfg.lr, cfg.epochs, cfg.l2, cfg.threshold});
  spdlog::info("trained on {} candidates, final loss {}", all.size(), model.final_loss);
  std::cout << model.to_json().dump(2) << '\n';
  return 0;
}

int cmd_ensemble_apply(const std::vector<std::string>& files, const RunConfig& cfg, bool threshold_set) {
  const std::string& model_path = files.back();
  const SystemInputs in = read_systems(files.front(), {files.begin() + 1, files.end() - 1});
  std::ifstream model_in(model_path);
  if (!model_in) throw IoError("cannot open " + model_path);
  LogRegModel model;
  try {
    model = LogRegModel::from_json(nlohmann::json::parse(model_in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(model_path, 0, e.what());
  } catch (const FormatError& e) {
    throw InputError(model_path, 0, e.what());
  }
  if (threshold_set) model.threshold = cfg.threshold;
  const std::size_t k = files.size() - 2;
  if (model.weights.size() != k + 4)
    throw InputError(model_path, 0, "model expects " + std::to_string(model.weights.size() - 4) + " systems, got " +
                                        std::to_string(k));
  for (std::size_t i = 0; i < in.src.size(); ++i)
    std::cout << join_tokens(select_and_apply(in.src[i], gather(in.src[i], in.hyps[i]), model)) << '\n';
  return 0;
}

int cmd_score(const std::string& hyp_path, const std::string& gold_path) {
  const auto hyp = read_m2_file(hyp_path);
  const auto gold = read_m2_file(gold_path);
  if (hyp.size() != gold.size())
    throw InputError(gold_path, 0, std::to_string(gold.size()) + " sentences, but " + hyp_path + " has " +
                                       std::to_string(hyp.size()));
  std::vector<std::pair<EditScript, EditScript>> pairs;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    if (hyp[i].src != gold[i].src)
      throw InputError(hyp_path, 0, "sentence " + std::to_string(i + 1) + " has a different source than the gold file");
    pairs.emplace_back(hyp[i].edits, gold[i].edits);
  }
  const Scores s = corpus_score(pairs);
  std::cout << s.to_json().dump() << '\n';
  std::cerr << s.summary() << '\n';
  return 0;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("csyn");
  logger->set_pattern("csyn: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CSYN_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  RunConfig cfg;
  CLI::App app{"Syntax-enhanced grammatical error correction toolkit"};
  app.require_subcommand(1);
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "Fusion factor")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--d", cfg.d, "GCN hidden width")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--layers", cfg.layers, "GCN layer count")->capture_default_str();
  auto* threshold_opt =
      app.add_option("--threshold", cfg.threshold, "Ensemble keep threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--lr", cfg.lr, "Ensemble learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "Ensemble training epochs")->capture_default_str();
  app.add_option("--l2", cfg.l2, "Ensemble L2 penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--pseudo-placement", cfg.placement, "SUB/MISS placement relative to the POS node")
      ->check(CLI::IsMember({"below", "above"}))
      ->capture_default_str();
  app.add_flag("--self-loops", cfg.self_loops, "Add self loops to GCN layers");
  app.fallthrough();

  std::string a, b;
  std::vector<std::string> files;
  std::size_t tokens = 3;

  auto* align_cmd = app.add_subcommand("align", "Edit script JSON per parallel pair");
  align_cmd->add_option("pairs", a, "source TAB target file")->required();
  auto* project_cmd = app.add_subcommand("project", "Project target trees onto source sentences");
  project_cmd->add_option("pairs", a, "source TAB target file")->required();
  project_cmd->add_option("trees", b, "target trees, one per line")->required();
  project_cmd->add_option("--summary", cfg.summary_path, "Write the JSON summary here instead of stderr");
  auto* strip_cmd = app.add_subcommand("strip", "Remove pseudo nodes");
  strip_cmd->add_option("trees", a)->required();
  auto* subword_cmd = app.add_subcommand("subword", "Map word-level trees to subword-level trees");
  subword_cmd->add_option("trees", a)->required();
  subword_cmd->add_option("segmentation", b)->required();
  auto* gcn_cmd = app.add_subcommand("gcn-check", "Check the GCN encoder against its oracles");
  gcn_cmd->add_option("trees", a)->required();
  auto* fuse_cmd = app.add_subcommand("fuse-demo", "Fuse seeded syntax and basic states");
  fuse_cmd->add_option("--tokens", tokens, "Sentence length")->capture_default_str();
  auto* train_cmd = app.add_subcommand("ensemble-train", "Train the edit selector");
  train_cmd->add_option("files", files, "src hyp1..k gold.m2")->required()->expected(3, 1 << 20);
  auto* apply_cmd = app.add_subcommand("ensemble-apply", "Combine system outputs");
  apply_cmd->add_option("files", files, "src hyp1..k model.json")->required()->expected(3, 1 << 20);
  auto* score_cmd = app.add_subcommand("score", "Edit-level P/R/F0.5");
  score_cmd->add_option("hyp", a)->required();
  score_cmd->add_option("gold", b)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*align_cmd) return cmd_align(a);
    if (*project_cmd) return cmd_project(a, b, cfg);
    if (*strip_cmd) return cmd_strip(a);
    if (*subword_cmd) return cmd_subword(a, b);
    if (*gcn_cmd) return cmd_gcn_check(a, cfg);
    if (*fuse_cmd) return cmd_fuse_demo(cfg, tokens);
    if (*train_cmd) return cmd_ensemble_train(files, cfg);
    if (*apply_cmd) return cmd_ensemble_apply(files, cfg, threshold_opt->count() > 0);
    if (*score_cmd) return cmd_score(a, b);
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
