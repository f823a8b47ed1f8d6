#include "csyn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "csyn/error.hpp"

namespace csyn {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(const std::vector<double>& w, const FeatureRow& x) {
  return std::inner_product(w.begin(), w.end(), x.begin(), 0.0);
}

int gather_rank(EditCategory c) {
  switch (c) {
    case EditCategory::miss: return 0;
    case EditCategory::sub: return 1;
    case EditCategory::red: return 2;
  }
  return 3;
}

// Conflict tie-break: SUB before RED before MISS.
int select_rank(EditCategory c) {
  switch (c) {
    case EditCategory::sub: return 0;
    case EditCategory::red: return 1;
    case EditCategory::miss: return 2;
  }
  return 3;
}

void check_batch(std::span<const FeatureRow> x, std::span<const int> y, std::size_t width) {
  if (x.size() != y.size()) throw std::invalid_argument("feature and label counts differ");
  for (const FeatureRow& row : x)
    if (row.size() != width) throw std::invalid_argument("feature rows have inconsistent widths");
}

}  // namespace

std::vector<std::string> feature_names(std::size_t systems) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < systems; ++i) names.push_back("sys" + std::to_string(i + 1));
  names.insert(names.end(), {"vote_fraction", "is_SUB", "is_RED", "is_MISS"});
  return names;
}

FeatureRow candidate_features(const Edit& edit, const std::vector<int>& votes) {
  FeatureRow f(votes.begin(), votes.end());
  const double total = std::accumulate(votes.begin(), votes.end(), 0.0);
  f.push_back(votes.empty() ? 0.0 : total / static_cast<double>(votes.size()));
  f.push_back(edit.category == EditCategory::sub ? 1.0 : 0.0);
  f.push_back(edit.category == EditCategory::red ? 1.0 : 0.0);
  f.push_back(edit.category == EditCategory::miss ? 1.0 : 0.0);
  return f;
}

std::vector<EditCandidate> gather(const Tokens& src, const std::vector<Tokens>& hypotheses) {
  const std::size_t k = hypotheses.size();
  std::vector<EditCandidate> pool;
  for (std::size_t s = 0; s < k; ++s) {
    for (Edit& e : align(src, hypotheses[s]).edits) {
      auto hit = std::find_if(pool.begin(), pool.end(), [&](const EditCandidate& c) { return same_edit(c.edit, e); });
      if (hit == pool.end()) {
        pool.push_back({std::move(e), std::vector<int>(k, 0), {}});
        hit = std::prev(pool.end());
      }
      hit->votes[s] = 1;
    }
  }
  std::sort(pool.begin(), pool.end(), [](const EditCandidate& a, const EditCandidate& b) {
    if (a.edit.begin != b.edit.begin) return a.edit.begin < b.edit.begin;
    if (a.edit.category != b.edit.category) return gather_rank(a.edit.category) < gather_rank(b.edit.category);
    return a.edit.tgt < b.edit.tgt;
  });
  for (EditCandidate& c : pool) c.features = candidate_features(c.edit, c.votes);
  return pool;
}

std::vector<int> gold_labels(std::span<const EditCandidate> candidates, const EditScript& gold) {
  std::vector<int> labels;
  labels.reserve(candidates.size());
  for (const EditCandidate& c : candidates)
    labels.push_back(std::any_of(gold.edits.begin(), gold.edits.end(),
                                 [&](const Edit& g) { return same_edit(c.edit, g); })
                         ? 1
                         : 0);
  return labels;
}

double LogRegModel::probability(const FeatureRow& x) const {
  if (x.size() != weights.size())
    throw std::invalid_argument("feature width " + std::to_string(x.size()) + " does not match model width " +
                                std::to_string(weights.size()));
  return sigmoid(dot(weights, x) + bias);
}

nlohmann::json LogRegModel::to_json() const {
  return {{"weights", weights},
          {"bias", bias},
          {"threshold", threshold},
          {"feature_names", feature_names},
          {"final_loss", final_loss}};
}

LogRegModel LogRegModel::from_json(const nlohmann::json& j) {
  LogRegModel m;
  try {
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.threshold = j.at("threshold").get<double>();
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    m.final_loss = j.value("final_loss", 0.0);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad model JSON: ") + ex.what());
  }
  if (!m.feature_names.empty() && m.feature_names.size() != m.weights.size())
    throw FormatError("feature_names and weights differ in length");
  return m;
}

double logistic_loss(const LogRegModel& model, std::span<const FeatureRow> x, std::span<const int> y, double l2) {
  check_batch(x, y, model.weights.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = dot(model.weights, x[i]) + model.bias;
    loss += softplus(z) - y[i] * z;
  }
  if (!x.empty()) loss /= static_cast<double>(x.size());
  double norm = 0.0;
  for (double w : model.weights) norm += w * w;
  return loss + 0.5 * l2 * norm;
}

LogRegGradient logistic_gradient(const LogRegModel& model, std::span<const FeatureRow> x, std::span<const int> y,
                                 double l2) {
  check_batch(x, y, model.weights.size());
  LogRegGradient g{std::vector<double>(model.weights.size(), 0.0), 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = sigmoid(dot(model.weights, x[i]) + model.bias) - y[i];
    for (std::size_t f = 0; f < x[i].size(); ++f) g.weights[f] += r * x[i][f];
    g.bias += r;
  }
  const double n = x.empty() ? 1.0 : static_cast<double>(x.size());
  for (std::size_t f = 0; f < g.weights.size(); ++f) g.weights[f] = g.weights[f] / n + l2 * model.weights[f];
  g.bias /= n;
  return g;
}

LogRegModel train(std::span<const FeatureRow> x, std::span<const int> y, const TrainOptions& options) {
  if (x.empty()) throw std::invalid_argument("no training examples");
  const std::size_t width = x.front().size();
  if (width == 0) throw std::invalid_argument("zero feature width");
  check_batch(x, y, width);

  LogRegModel model;
  model.weights.assign(width, 0.0);
  model.threshold = options.threshold;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const LogRegGradient g = logistic_gradient(model, x, y, options.l2);
    for (std::size_t f = 0; f < width; ++f) model.weights[f] -= options.learning_rate * g.weights[f];
    model.bias -= options.learning_rate * g.bias;
    const double loss = logistic_loss(model, x, y, options.l2);
    if (!std::isfinite(loss)) throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1));
  }
  model.final_loss = logistic_loss(model, x, y, options.l2);
  return model;
}

LogRegModel train(std::span<const EditCandidate> candidates, std::span<const int> labels,
                  const TrainOptions& options) {
  std::vector<FeatureRow> x;
  x.reserve(candidates.size());
  for (const EditCandidate& c : candidates) x.push_back(c.features);
  LogRegModel model = train(x, labels, options);
  const std::size_t systems = candidates.empty() ? 0 : candidates.front().votes.size();
  model.feature_names = feature_names(systems);
  return model;
}

std::vector<Edit> select_edits(std::span<const EditCandidate> candidates, const LogRegModel& model) {
  struct Scored {
    const Edit* edit;
    double score;
  };
  std::vector<Scored> kept;
  for (const EditCandidate& c : candidates) {
    const double p = model.probability(c.features);
    if (p >= model.threshold) kept.push_back({&c.edit, p});
  }
  std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.edit->begin != b.edit->begin) return a.edit->begin < b.edit->begin;
    if (a.edit->category != b.edit->category) return select_rank(a.edit->category) < select_rank(b.edit->category);
    return a.edit->tgt < b.edit->tgt;
  });

  std::set<std::size_t> words, gaps;
  std::vector<Edit> out;
  for (const Scored& s : kept) {
    const Edit& e = *s.edit;
    auto& taken = e.category == EditCategory::miss ? gaps : words;
    if (!taken.insert(e.begin).second) continue;
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), script_order);
  return out;
}

Tokens select_and_apply(const Tokens& src, std::span<const EditCandidate> candidates, const LogRegModel& model) {
  return csyn::apply(src, EditScript{select_edits(candidates, model)});
}

}  // namespace csyn
