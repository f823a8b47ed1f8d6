#ifndef CSYN_ORACLE_HPP
#define CSYN_ORACLE_HPP

// Independent reference computations for checking the numeric kernels:
// a dense adjacency-matrix GCN written with plain loops, and central finite
// differences. Nothing here calls into the optimised code paths except the
// forward/backward functions being checked.

#include <cstdint>
#include <functional>
#include <vector>

#include "csyn/syntax_graph.hpp"

namespace csyn::oracle {

using Dense = std::vector<std::vector<double>>;

Dense to_dense(const Matrix& m);

// 0/1 adjacency matrix of a graph's neighbour lists.
Dense adjacency(const SyntaxGraph& graph);

// ReLU(A H W^T + 1 b^T), with A + I when self loops are on.
Dense dense_gcn_layer(const Dense& adj, const Dense& states, const Dense& weight, const std::vector<double>& bias,
                      bool self_loops = false);

double max_abs_diff(const Dense& a, const Dense& b);

// (f(x + h) - f(x - h)) / 2h, restoring x afterwards.
double central_difference(const std::function<double()>& f, double& x, double step);

// |a - b| / max(|a|, |b|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-3);

struct GradientReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

// Compares gcn_backward against finite differences of sum(gcn_encode(...))
// over every weight, bias, label-embedding entry and terminal input.
GradientReport check_gcn_gradients(const SyntaxGraph& graph, GcnStack stack, Matrix terminal_inits,
                                   double step = 1e-5);

// Smallest |pre-activation| over all layers; gradient checks need this away
// from zero.
double min_abs_preactivation(const SyntaxGraph& graph, const Matrix& terminal_inits, const GcnStack& stack);

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0);

}  // namespace csyn::oracle

#endif
