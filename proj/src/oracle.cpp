#include "csyn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace csyn::oracle {

Dense to_dense(const Matrix& m) {
  Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

Dense adjacency(const SyntaxGraph& graph) {
  Dense a(graph.size(), std::vector<double>(graph.size(), 0.0));
  for (std::size_t v = 0; v < graph.size(); ++v)
    for (std::size_t u : graph.neighbors[v]) a[v][u] = 1.0;
  return a;
}

Dense dense_gcn_layer(const Dense& adj, const Dense& states, const Dense& weight, const std::vector<double>& bias,
                      bool self_loops) {
  const std::size_t n = adj.size();
  const std::size_t d = bias.size();
  // A H
  Dense ah(n, std::vector<double>(d, 0.0));
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u) {
      const double a = adj[v][u] + (self_loops && u == v ? 1.0 : 0.0);
      if (a == 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) ah[v][k] += a * states[u][k];
    }
  // (A H) W^T + b, then ReLU
  Dense out(n, std::vector<double>(d, 0.0));
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < d; ++i) {
      double z = bias[i];
      for (std::size_t k = 0; k < d; ++k) z += ah[v][k] * weight[i][k];
      out[v][i] = z > 0.0 ? z : 0.0;
    }
  return out;
}

double max_abs_diff(const Dense& a, const Dense& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  }
  return worst;
}

double central_difference(const std::function<double()>& f, double& x, double step) {
  const double saved = x;
  x = saved + step;
  const double up = f();
  x = saved - step;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * step);
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradientReport check_gcn_gradients(const SyntaxGraph& graph, GcnStack stack, Matrix terminal_inits, double step) {
  auto loss = [&] { return gcn_encode(graph, terminal_inits, stack).sum(); };
  const Matrix out = gcn_encode(graph, terminal_inits, stack);
  const GcnGradients grads = gcn_backward(graph, terminal_inits, stack, Matrix::Ones(out.rows(), out.cols()));

  GradientReport report;
  auto compare = [&](Matrix& param, const Matrix& analytic) {
    for (Eigen::Index i = 0; i < param.rows(); ++i)
      for (Eigen::Index j = 0; j < param.cols(); ++j) {
        const double numeric = central_difference(loss, param(i, j), step);
        report.max_relative_error = std::max(report.max_relative_error, relative_error(analytic(i, j), numeric));
        ++report.checked;
      }
  };
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    compare(stack.layers[l].weight, grads.layers[l].weight);
    Vector& bias = stack.layers[l].bias;
    for (Eigen::Index i = 0; i < bias.size(); ++i) {
      const double numeric = central_difference(loss, bias(i), step);
      report.max_relative_error = std::max(report.max_relative_error, relative_error(grads.layers[l].bias(i), numeric));
      ++report.checked;
    }
  }
  compare(stack.label_embeddings, grads.label_embeddings);
  compare(terminal_inits, grads.terminal_inits);
  return report;
}

double min_abs_preactivation(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack) {
  double smallest = std::numeric_limits<double>::infinity();
  Dense h = to_dense(initial_states(graph, terminal_inits, stack));
  const Dense adj = adjacency(graph);
  for (const GcnLayerParams& layer : stack.layers) {
    // Recompute pre-activations densely so this check does not lean on the
    // code under test.
    const std::size_t n = adj.size(), d = static_cast<std::size_t>(layer.bias.size());
    const Dense w = to_dense(layer.weight);
    Dense next(n, std::vector<double>(d, 0.0));
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < d; ++i) {
        double z = layer.bias(static_cast<Eigen::Index>(i));
        for (std::size_t u = 0; u < n; ++u) {
          const double a = adj[v][u] + (stack.self_loops && u == v ? 1.0 : 0.0);
          if (a == 0.0) continue;
          for (std::size_t k = 0; k < d; ++k) z += a * h[u][k] * w[i][k];
        }
        smallest = std::min(smallest, std::abs(z));
        next[v][i] = z > 0.0 ? z : 0.0;
      }
    h = std::move(next);
  }
  return smallest;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace csyn::oracle
