#ifndef CSYN_ENSEMBLE_HPP
#define CSYN_ENSEMBLE_HPP

// Edit-level system combination. Edits proposed by k systems are pooled,
// a logistic-regression classifier decides which ones to keep, conflicts
// among the kept edits are resolved greedily by score, and the survivors
// are applied to the source sentence.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "csyn/edit.hpp"

namespace csyn {

using FeatureRow = std::vector<double>;

struct EditCandidate {
  Edit edit;
  std::vector<int> votes;  // one 0/1 indicator per system
  FeatureRow features;     // votes..., vote fraction, one-hot SUB/RED/MISS
};

std::vector<std::string> feature_names(std::size_t systems);

FeatureRow candidate_features(const Edit& edit, const std::vector<int>& votes);

// Union of align(src, hyp) over all hypotheses, deduplicated by edit
// identity. Ordered by span start, then category (MISS, SUB, RED), then
// target tokens.
std::vector<EditCandidate> gather(const Tokens& src, const std::vector<Tokens>& hypotheses);

// 1 where the candidate exactly matches an edit of `gold`, else 0.
std::vector<int> gold_labels(std::span<const EditCandidate> candidates, const EditScript& gold);

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;
  double final_loss = 0.0;
  std::vector<std::string> feature_names;

  double probability(const FeatureRow& x) const;

  nlohmann::json to_json() const;
  static LogRegModel from_json(const nlohmann::json& j);
};

struct TrainOptions {
  double learning_rate = 0.5;
  std::size_t epochs = 500;
  double l2 = 0.0;
  double threshold = 0.5;
};

// Mean logistic loss plus (l2 / 2) |w|^2; the bias is not regularised.
double logistic_loss(const LogRegModel& model, std::span<const FeatureRow> x, std::span<const int> y, double l2);

struct LogRegGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

LogRegGradient logistic_gradient(const LogRegModel& model, std::span<const FeatureRow> x, std::span<const int> y,
                                 double l2);

// Full-batch gradient descent from all-zero parameters. Throws
// std::invalid_argument on empty or ragged input, std::runtime_error if the
// loss stops being finite.
LogRegModel train(std::span<const FeatureRow> x, std::span<const int> y, const TrainOptions& options);
LogRegModel train(std::span<const EditCandidate> candidates, std::span<const int> labels,
                  const TrainOptions& options);

// Kept, conflict-free edits in script order. Candidates scoring at least the
// threshold are taken greedily by descending score (ties: leftmost, then
// SUB > RED > MISS); SUB/RED edits on one word, or two MISS edits at one
// point, conflict.
std::vector<Edit> select_edits(std::span<const EditCandidate> candidates, const LogRegModel& model);

Tokens select_and_apply(const Tokens& src, std::span<const EditCandidate> candidates, const LogRegModel& model);

}  // namespace csyn

#endif
