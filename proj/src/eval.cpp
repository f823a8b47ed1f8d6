#include "csyn/eval.hpp"

#include <cstdio>

namespace csyn {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EditCounts match_edits(const EditScript& hyp, const EditScript& gold) {
  std::vector<bool> used(gold.size(), false);
  EditCounts c;
  for (const Edit& h : hyp.edits) {
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (!used[g] && same_edit(h, gold.edits[g])) {
        used[g] = true;
        ++c.tp;
        break;
      }
    }
  }
  c.fp = hyp.size() - c.tp;
  c.fn = gold.size() - c.tp;
  return c;
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * precision + recall;
  if (den == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / den;
}

Scores Scores::from_counts(const EditCounts& counts) {
  Scores s;
  s.counts = counts;
  s.precision = ratio(counts.tp, counts.tp + counts.fp);
  s.recall = ratio(counts.tp, counts.tp + counts.fn);
  s.f05 = f_beta(s.precision, s.recall, 0.5);
  return s;
}

Scores corpus_score(const std::vector<std::pair<EditScript, EditScript>>& hyp_gold) {
  EditCounts total;
  for (const auto& [hyp, gold] : hyp_gold) total += match_edits(hyp, gold);
  return Scores::from_counts(total);
}

nlohmann::json Scores::to_json() const {
  return {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn},
          {"P", precision}, {"R", recall},      {"F05", f05}};
}

std::string Scores::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "TP=%zu FP=%zu FN=%zu  P=%.4f R=%.4f F0.5=%.4f", counts.tp, counts.fp, counts.fn,
                precision, recall, f05);
  return buf;
}

}  // namespace csyn
