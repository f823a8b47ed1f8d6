#ifndef CSYN_SYNTAX_GRAPH_HPP
#define CSYN_SYNTAX_GRAPH_HPP

// Reference kernels for encoding syntax with a graph convolutional network.
//
// A constituency tree becomes an undirected graph over all of its nodes; a
// dependency tree becomes a graph over its tokens. One GCN layer computes,
// for every node v,
//
//   h_v' = ReLU( sum_{u in N(v)} W h_u + b )
//
// over one-hop neighbours only (no self term, no degree normalisation unless
// self loops are switched on). Terminal nodes start from the encoder states
// of their tokens, non-terminals from a label embedding table. The token
// rows of the final layer are then mixed with the plain encoder states:
//
//   h_final = lambda * h_syn + (1 - lambda) * h_basic

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "csyn/tree.hpp"

namespace csyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GraphNode {
  NodeKind kind = NodeKind::terminal;
  std::size_t position = 0;  // token index, terminals only
  std::string label;         // constituent label, non-terminals only
};

struct SyntaxGraph {
  // Terminals first in token order, then non-terminals in pre-order.
  std::vector<GraphNode> nodes;
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t size() const { return nodes.size(); }
  std::size_t terminal_count() const;
  std::size_t edge_count() const;
};

SyntaxGraph build_graph(const Tree& tree);

// heads[i] is the 1-based head of token i+1, or kDependencyRoot. Throws
// std::invalid_argument on out-of-range heads, self-heads, cycles, or a
// number of roots other than one.
inline constexpr int kDependencyRoot = 0;
SyntaxGraph build_graph_dep(std::span<const int> heads);

// "u v" per undirected edge (u < v), in ascending order.
std::string to_edge_list(const SyntaxGraph& graph);

struct GcnLayerParams {
  Matrix weight;  // d x d
  Vector bias;    // d
};

struct GcnStack {
  std::vector<GcnLayerParams> layers;
  Matrix label_embeddings;  // one row per entry of `labels`
  std::vector<std::string> labels;
  bool self_loops = false;

  std::size_t width() const { return static_cast<std::size_t>(label_embeddings.cols()); }
  std::optional<std::size_t> label_index(std::string_view label) const;

  // Weights and biases uniform in +-1/sqrt(d), label embeddings uniform in
  // [-0.1, 0.1], all drawn from one seeded generator.
  static GcnStack random(std::vector<std::string> labels, std::size_t width, std::size_t layer_count,
                         std::uint64_t seed, bool self_loops = false);
};

// One layer over row-per-node states. Throws std::invalid_argument on
// dimension mismatch.
Matrix gcn_layer(const SyntaxGraph& graph, const Matrix& states, const GcnLayerParams& params,
                 bool self_loops = false);

// Layer-0 states: token rows from `terminal_inits` (one row per terminal, in
// token order), label rows from the embedding table.
Matrix initial_states(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack);

Matrix gcn_encode(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack);

struct GcnGradients {
  std::vector<GcnLayerParams> layers;
  Matrix label_embeddings;
  Matrix terminal_inits;
};

// Gradients of sum(upstream .* gcn_encode(...)) with respect to every
// parameter and to the terminal inputs. ReLU'(0) is taken as 0.
GcnGradients gcn_backward(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack,
                          const Matrix& upstream);

// Token rows of a node matrix, in token order.
Matrix terminal_rows(const SyntaxGraph& graph, const Matrix& states);

struct FusionConfig {
  double lambda = 0.5;
};

// lambda * syn + (1 - lambda) * basic. Throws std::invalid_argument on shape
// mismatch or lambda outside [0, 1].
Matrix fuse(const Matrix& syn, const Matrix& basic, double lambda);

// {d, n, labels, self_loops, layers:[{W, b}], E_nt}
nlohmann::json to_json(const GcnStack& stack);
GcnStack gcn_stack_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace csyn

#endif
