#ifndef CSYN_EVAL_HPP
#define CSYN_EVAL_HPP

// Edit-level precision / recall / F0.5. Edits match when category, span and
// target tokens agree exactly. Corpus scores are micro-averaged: counts are
// summed over sentences before dividing.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csyn/edit.hpp"

namespace csyn {

struct EditCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  EditCounts& operator+=(const EditCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct Scores {
  EditCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f05 = 0.0;

  static Scores from_counts(const EditCounts& counts);

  nlohmann::json to_json() const;  // {tp, fp, fn, P, R, F05}
  std::string summary() const;
};

EditCounts match_edits(const EditScript& hyp, const EditScript& gold);

// (1 + b^2) P R / (b^2 P + R); 0 when the denominator is 0.
double f_beta(double precision, double recall, double beta = 0.5);

Scores corpus_score(const std::vector<std::pair<EditScript, EditScript>>& hyp_gold);

}  // namespace csyn

#endif
