#ifndef CSYN_PROJECT_HPP
#define CSYN_PROJECT_HPP

// Projection of a target-side (corrected) constituency tree onto the source
// (ungrammatical) sentence. Erroneous words are marked with pseudo
// non-terminals:
//
//   SUB   inserted as the new head of a substituted word
//   RED   a redundant word, placed into the phrase of its right-side word
//         (left-side word at the sentence end), under a RED node
//   MISS  inserted as the head of the word right of a gap where target words
//         are missing (left-side word at the sentence end); one node per gap
//
// Everything the edit script does not touch is kept verbatim.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "csyn/edit.hpp"
#include "csyn/tree.hpp"

namespace csyn {

// Where SUB and MISS nodes go relative to a word's POS preterminal.
//   below: (NN (SUB cat))      above: (SUB (NN cat))
enum class PseudoPlacement { below, above };

struct ProjectOptions {
  PseudoPlacement placement = PseudoPlacement::below;
};

struct InsertedNode {
  std::string label;
  std::size_t position;  // source token the node marks

  friend bool operator==(const InsertedNode&, const InsertedNode&) = default;
};

struct ProjectionResult {
  Tree source_tree;
  std::vector<InsertedNode> inserted;  // ordered by position
};

// Throws std::invalid_argument when the target tree contains pseudo labels,
// the script is invalid for `src`, the source is empty, or the target yield
// differs from apply(src, script).
ProjectionResult project(const Tree& target_tree, const EditScript& script, const Tokens& src,
                         const ProjectOptions& options = {});

// Removes every SUB/RED/MISS node. RED nodes go away together with the
// words under them; SUB and MISS nodes are spliced out and their children
// promoted. Constituents left empty are dropped. Throws std::invalid_argument
// if nothing (or more than one root) would remain.
Tree strip_pseudo(const Tree& tree);

struct SkippedPair {
  std::size_t line;  // 1-based
  std::string reason;
};

struct ProjectionSummary {
  std::size_t pairs = 0;
  std::vector<SkippedPair> skipped;
  std::map<std::string, std::size_t> pseudo_counts{{"SUB", 0}, {"RED", 0}, {"MISS", 0}};

  nlohmann::json to_json() const;
};

// Streams a parallel corpus: one "source TAB target" line and one bracketed
// target tree per pair. `emit` receives each projected tree in input order;
// malformed pairs are skipped and recorded with their line numbers. Throws
// std::invalid_argument when the two streams differ in length.
template <typename Emit>
ProjectionSummary build_training_trees(const std::vector<std::string>& pair_lines,
                                       const std::vector<std::string>& tree_lines, Emit&& emit,
                                       const ProjectOptions& options = {});

// One pair; returns the projected tree or throws with a human-readable reason.
Tree project_pair_line(const std::string& pair_line, const std::string& tree_line,
                       const ProjectOptions& options, ProjectionSummary& summary);

template <typename Emit>
ProjectionSummary build_training_trees(const std::vector<std::string>& pair_lines,
                                       const std::vector<std::string>& tree_lines, Emit&& emit,
                                       const ProjectOptions& options) {
  if (pair_lines.size() != tree_lines.size())
    throw std::invalid_argument("parallel file has " + std::to_string(pair_lines.size()) +
                                " lines but tree file has " + std::to_string(tree_lines.size()));
  ProjectionSummary summary;
  summary.pairs = pair_lines.size();
  for (std::size_t i = 0; i < pair_lines.size(); ++i) {
    try {
      emit(project_pair_line(pair_lines[i], tree_lines[i], options, summary));
    } catch (const std::exception& ex) {
      summary.skipped.push_back({i + 1, ex.what()});
    }
  }
  return summary;
}

}  // namespace csyn

#endif
