#include "csyn/syntax_graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "csyn/error.hpp"

namespace csyn {

namespace {

void add_edge(SyntaxGraph& g, std::size_t u, std::size_t v) {
  g.neighbors[u].push_back(v);
  g.neighbors[v].push_back(u);
}

// Returns the node id assigned to `node`.
std::size_t add_subtree(const Tree& node, SyntaxGraph& g, std::size_t& next_terminal,
                        std::size_t& next_nonterminal) {
  if (node.is_terminal()) {
    const std::size_t id = next_terminal++;
    g.nodes[id] = GraphNode{NodeKind::terminal, id, {}};
    return id;
  }
  const std::size_t id = next_nonterminal++;
  g.nodes[id] = GraphNode{NodeKind::nonterminal, 0, node.label};
  for (const Tree& child : node.children) add_edge(g, id, add_subtree(child, g, next_terminal, next_nonterminal));
  return id;
}

// Neighbour sums, plus the node itself when self loops are on.
Matrix aggregate(const SyntaxGraph& graph, const Matrix& states, bool self_loops) {
  Matrix out = self_loops ? states : Matrix::Zero(states.rows(), states.cols());
  for (std::size_t v = 0; v < graph.size(); ++v)
    for (std::size_t u : graph.neighbors[v]) out.row(static_cast<Eigen::Index>(v)) += states.row(static_cast<Eigen::Index>(u));
  return out;
}

void check_layer_shapes(const SyntaxGraph& graph, const Matrix& states, const GcnLayerParams& params) {
  const auto d = states.cols();
  if (static_cast<std::size_t>(states.rows()) != graph.size())
    throw std::invalid_argument("state rows (" + std::to_string(states.rows()) + ") != graph nodes (" +
                                std::to_string(graph.size()) + ")");
  if (params.weight.rows() != d || params.weight.cols() != d || params.bias.size() != d)
    throw std::invalid_argument("layer parameters do not match state width " + std::to_string(d));
}

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace

std::size_t SyntaxGraph::terminal_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const GraphNode& n) { return n.kind == NodeKind::terminal; }));
}

std::size_t SyntaxGraph::edge_count() const {
  std::size_t degree_sum = 0;
  for (const auto& adj : neighbors) degree_sum += adj.size();
  return degree_sum / 2;
}

SyntaxGraph build_graph(const Tree& tree) {
  const std::size_t terminals = terminal_count(tree);
  const std::size_t total = terminals + nonterminal_count(tree);
  SyntaxGraph g;
  g.nodes.resize(total);
  g.neighbors.resize(total);
  std::size_t next_terminal = 0, next_nonterminal = terminals;
  add_subtree(tree, g, next_terminal, next_nonterminal);
  return g;
}

SyntaxGraph build_graph_dep(std::span<const int> heads) {
  const std::size_t n = heads.size();
  SyntaxGraph g;
  g.nodes.resize(n);
  g.neighbors.resize(n);
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes[i] = GraphNode{NodeKind::terminal, i, {}};
    const int h = heads[i];
    if (h == kDependencyRoot) {
      ++roots;
      continue;
    }
    if (h < 1 || static_cast<std::size_t>(h) > n)
      throw std::invalid_argument("token " + std::to_string(i + 1) + ": head " + std::to_string(h) + " out of range");
    if (static_cast<std::size_t>(h) == i + 1)
      throw std::invalid_argument("token " + std::to_string(i + 1) + " is its own head");
  }
  if (roots != 1) throw std::invalid_argument("dependency tree has " + std::to_string(roots) + " roots, expected 1");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i, steps = 0;
    while (heads[cur] != kDependencyRoot) {
      cur = static_cast<std::size_t>(heads[cur] - 1);
      if (++steps > n) throw std::invalid_argument("dependency heads contain a cycle");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (heads[i] != kDependencyRoot) add_edge(g, i, static_cast<std::size_t>(heads[i] - 1));
  return g;
}

std::string to_edge_list(const SyntaxGraph& graph) {
  std::ostringstream out;
  for (std::size_t u = 0; u < graph.size(); ++u) {
    std::vector<std::size_t> adj = graph.neighbors[u];
    std::sort(adj.begin(), adj.end());
    for (std::size_t v : adj)
      if (u < v) out << u << ' ' << v << '\n';
  }
  return out.str();
}

std::optional<std::size_t> GcnStack::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  return std::nullopt;
}

GcnStack GcnStack::random(std::vector<std::string> labels, std::size_t width, std::size_t layer_count,
                          std::uint64_t seed, bool self_loops) {
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> param(-scale, scale);
  std::uniform_real_distribution<double> embed(-0.1, 0.1);
  const auto d = static_cast<Eigen::Index>(width);

  GcnStack stack;
  stack.self_loops = self_loops;
  for (std::size_t l = 0; l < layer_count; ++l) {
    GcnLayerParams layer{Matrix(d, d), Vector(d)};
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) layer.weight(i, j) = param(rng);
    for (Eigen::Index i = 0; i < d; ++i) layer.bias(i) = param(rng);
    stack.layers.push_back(std::move(layer));
  }
  stack.label_embeddings.resize(static_cast<Eigen::Index>(labels.size()), d);
  for (Eigen::Index i = 0; i < stack.label_embeddings.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) stack.label_embeddings(i, j) = embed(rng);
  stack.labels = std::move(labels);
  return stack;
}

Matrix gcn_layer(const SyntaxGraph& graph, const Matrix& states, const GcnLayerParams& params, bool self_loops) {
  check_layer_shapes(graph, states, params);
  Matrix pre = aggregate(graph, states, self_loops) * params.weight.transpose();
  pre.rowwise() += params.bias.transpose();
  return relu(pre);
}

Matrix initial_states(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack) {
  const std::size_t terminals = graph.terminal_count();
  if (static_cast<std::size_t>(terminal_inits.rows()) != terminals)
    throw std::invalid_argument("got " + std::to_string(terminal_inits.rows()) + " terminal vectors for " +
                                std::to_string(terminals) + " terminals");
  if (terminal_inits.cols() != stack.label_embeddings.cols())
    throw std::invalid_argument("terminal vectors have width " + std::to_string(terminal_inits.cols()) +
                                ", stack width is " + std::to_string(stack.width()));
  Matrix h(static_cast<Eigen::Index>(graph.size()), terminal_inits.cols());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    const GraphNode& node = graph.nodes[v];
    const auto row = static_cast<Eigen::Index>(v);
    if (node.kind == NodeKind::terminal) {
      h.row(row) = terminal_inits.row(static_cast<Eigen::Index>(node.position));
    } else {
      const auto idx = stack.label_index(node.label);
      if (!idx) throw std::invalid_argument("no embedding row for label " + node.label);
      h.row(row) = stack.label_embeddings.row(static_cast<Eigen::Index>(*idx));
    }
  }
  return h;
}

Matrix gcn_encode(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack) {
  Matrix h = initial_states(graph, terminal_inits, stack);
  for (const GcnLayerParams& layer : stack.layers) h = gcn_layer(graph, h, layer, stack.self_loops);
  return h;
}

GcnGradients gcn_backward(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack,
                          const Matrix& upstream) {
  // Forward pass, keeping each layer's input and pre-activation.
  std::vector<Matrix> inputs, aggregated, pre;
  Matrix h = initial_states(graph, terminal_inits, stack);
  for (const GcnLayerParams& layer : stack.layers) {
    check_layer_shapes(graph, h, layer);
    inputs.push_back(h);
    aggregated.push_back(aggregate(graph, h, stack.self_loops));
    Matrix z = aggregated.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    pre.push_back(z);
    h = relu(z);
  }
  if (upstream.rows() != h.rows() || upstream.cols() != h.cols())
    throw std::invalid_argument("upstream gradient shape does not match the encoder output");

  GcnGradients grads;
  grads.layers.resize(stack.layers.size());
  Matrix grad_h = upstream;
  for (std::size_t l = stack.layers.size(); l-- > 0;) {
    const Matrix grad_pre = grad_h.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
    grads.layers[l].weight = grad_pre.transpose() * aggregated[l];
    grads.layers[l].bias = grad_pre.colwise().sum().transpose();
    // The adjacency is symmetric, so pushing back through it is another
    // neighbour aggregation.
    grad_h = aggregate(graph, grad_pre * stack.layers[l].weight, stack.self_loops);
  }

  grads.label_embeddings = Matrix::Zero(stack.label_embeddings.rows(), stack.label_embeddings.cols());
  grads.terminal_inits = Matrix::Zero(terminal_inits.rows(), terminal_inits.cols());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    const GraphNode& node = graph.nodes[v];
    const auto row = static_cast<Eigen::Index>(v);
    if (node.kind == NodeKind::terminal)
      grads.terminal_inits.row(static_cast<Eigen::Index>(node.position)) += grad_h.row(row);
    else
      grads.label_embeddings.row(static_cast<Eigen::Index>(*stack.label_index(node.label))) += grad_h.row(row);
  }
  return grads;
}

Matrix terminal_rows(const SyntaxGraph& graph, const Matrix& states) {
  const std::size_t terminals = graph.terminal_count();
  Matrix out(static_cast<Eigen::Index>(terminals), states.cols());
  for (std::size_t v = 0; v < graph.size(); ++v)
    if (graph.nodes[v].kind == NodeKind::terminal)
      out.row(static_cast<Eigen::Index>(graph.nodes[v].position)) = states.row(static_cast<Eigen::Index>(v));
  return out;
}

Matrix fuse(const Matrix& syn, const Matrix& basic, double lambda) {
  if (syn.rows() != basic.rows() || syn.cols() != basic.cols())
    throw std::invalid_argument("fuse: shape mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("fuse: lambda must lie in [0, 1]");
  return lambda * syn + (1.0 - lambda) * basic;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.front().size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

nlohmann::json to_json(const GcnStack& stack) {
  nlohmann::json layers = nlohmann::json::array();
  for (const GcnLayerParams& layer : stack.layers)
    layers.push_back({{"W", matrix_to_json(layer.weight)},
                      {"b", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  return {{"d", stack.width()},
          {"n", stack.labels.size()},
          {"labels", stack.labels},
          {"self_loops", stack.self_loops},
          {"layers", std::move(layers)},
          {"E_nt", matrix_to_json(stack.label_embeddings)}};
}

GcnStack gcn_stack_from_json(const nlohmann::json& j) {
  GcnStack stack;
  try {
    const auto d = j.at("d").get<Eigen::Index>();
    stack.labels = j.at("labels").get<std::vector<std::string>>();
    stack.self_loops = j.value("self_loops", false);
    stack.label_embeddings = matrix_from_json(j.at("E_nt"));
    if (stack.labels.size() != j.at("n").get<std::size_t>() ||
        stack.label_embeddings.rows() != static_cast<Eigen::Index>(stack.labels.size()))
      throw FormatError("label count does not match E_nt");
    if (stack.label_embeddings.rows() > 0 && stack.label_embeddings.cols() != d)
      throw FormatError("E_nt width does not match d");
    stack.label_embeddings.conservativeResize(Eigen::NoChange, d);
    for (const auto& layer : j.at("layers")) {
      const auto b = layer.at("b").get<std::vector<double>>();
      GcnLayerParams p{matrix_from_json(layer.at("W")), Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()))};
      if (p.weight.rows() != d || p.weight.cols() != d || p.bias.size() != d)
        throw FormatError("layer shape does not match d");
      stack.layers.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad GCN parameter JSON: ") + ex.what());
  }
  return stack;
}

}  // namespace csyn
