#include "csyn/attention.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "csyn/error.hpp"

namespace csyn {

namespace {

void check_shapes(const Matrix& queries, const Matrix& memory, const AttentionParams& p) {
  const auto d = queries.cols();
  if (memory.rows() == 0) throw std::invalid_argument("cross attention over an empty memory");
  if (memory.cols() != d) throw std::invalid_argument("query and memory widths differ");
  for (const Matrix* w : {&p.query, &p.key, &p.value})
    if (w->rows() != d || w->cols() != d) throw std::invalid_argument("attention projection is not d x d");
}

Matrix row_softmax(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    out.row(i) = (scores.row(i).array() - top).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix stack_rows(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("memories have different widths");
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

}  // namespace

AttentionParams AttentionParams::random(std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> dist(-scale, scale);
  const auto d = static_cast<Eigen::Index>(width);
  AttentionParams p{Matrix(d, d), Matrix(d, d), Matrix(d, d)};
  for (Matrix* w : {&p.query, &p.key, &p.value})
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) (*w)(i, j) = dist(rng);
  return p;
}

Matrix attention_weights(const Matrix& queries, const Matrix& memory, const AttentionParams& params) {
  check_shapes(queries, memory, params);
  const double scale = 1.0 / std::sqrt(static_cast<double>(queries.cols()));
  return row_softmax((queries * params.query) * (memory * params.key).transpose() * scale);
}

Matrix cross_attention(const Matrix& queries, const Matrix& memory, const AttentionParams& params) {
  return attention_weights(queries, memory, params) * (memory * params.value);
}

AttentionGradients cross_attention_backward(const Matrix& queries, const Matrix& memory,
                                            const AttentionParams& params, const Matrix& upstream) {
  check_shapes(queries, memory, params);
  const double scale = 1.0 / std::sqrt(static_cast<double>(queries.cols()));
  const Matrix q = queries * params.query;
  const Matrix k = memory * params.key;
  const Matrix v = memory * params.value;
  const Matrix weights = row_softmax(q * k.transpose() * scale);
  if (upstream.rows() != queries.rows() || upstream.cols() != queries.cols())
    throw std::invalid_argument("upstream gradient shape does not match the attention output");

  const Matrix grad_weights = upstream * v.transpose();
  const Matrix grad_v = weights.transpose() * upstream;
  // Softmax Jacobian, row by row: a .* (g - <g, a>).
  const Eigen::VectorXd inner = grad_weights.cwiseProduct(weights).rowwise().sum();
  const Matrix grad_scores = weights.cwiseProduct(grad_weights - inner.replicate(1, weights.cols()));
  const Matrix grad_q = grad_scores * k * scale;
  const Matrix grad_k = grad_scores.transpose() * q * scale;

  AttentionGradients g;
  g.params.query = queries.transpose() * grad_q;
  g.params.key = memory.transpose() * grad_k;
  g.params.value = memory.transpose() * grad_v;
  g.queries = grad_q * params.query.transpose();
  g.memory = grad_k * params.key.transpose() + grad_v * params.value.transpose();
  return g;
}

Matrix dual_combine(const Matrix& queries, const Matrix& constituency_memory, const Matrix& dependency_memory,
                    const DualAttentionParams& params) {
  if (params.mode == CombineMode::sharing)
    return cross_attention(queries, stack_rows(constituency_memory, dependency_memory), params.constituency);
  return cross_attention(queries, constituency_memory, params.constituency) +
         cross_attention(queries, dependency_memory, params.dependency);
}

DualAttentionGradients dual_combine_backward(const Matrix& queries, const Matrix& constituency_memory,
                                             const Matrix& dependency_memory, const DualAttentionParams& params,
                                             const Matrix& upstream) {
  DualAttentionGradients g;
  const auto d = queries.cols();
  if (params.mode == CombineMode::sharing) {
    g.constituency =
        cross_attention_backward(queries, stack_rows(constituency_memory, dependency_memory), params.constituency, upstream)
            .params;
    g.dependency = AttentionParams{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
    return g;
  }
  g.constituency = cross_attention_backward(queries, constituency_memory, params.constituency, upstream).params;
  g.dependency = cross_attention_backward(queries, dependency_memory, params.dependency, upstream).params;
  return g;
}

nlohmann::json to_json(const AttentionParams& params) {
  return {{"Wq", matrix_to_json(params.query)}, {"Wk", matrix_to_json(params.key)}, {"Wv", matrix_to_json(params.value)}};
}

AttentionParams attention_params_from_json(const nlohmann::json& j) {
  try {
    AttentionParams p{matrix_from_json(j.at("Wq")), matrix_from_json(j.at("Wk")), matrix_from_json(j.at("Wv"))};
    if (p.query.rows() != p.query.cols() || p.key.rows() != p.query.rows() || p.key.cols() != p.query.cols() ||
        p.value.rows() != p.query.rows() || p.value.cols() != p.query.cols())
      throw FormatError("attention matrices must share one d x d shape");
    return p;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad attention parameter JSON: ") + ex.what());
  }
}

}  // namespace csyn
