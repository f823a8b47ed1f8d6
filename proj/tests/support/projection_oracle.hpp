#ifndef CSYN_TESTS_PROJECTION_ORACLE_HPP
#define CSYN_TESTS_PROJECTION_ORACLE_HPP

// Expected shape of a projected tree, computed from the edit script and the
// target tree without going through the projection code.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "csyn/edit.hpp"
#include "csyn/project.hpp"
#include "csyn/tree.hpp"

namespace csyn::testing {

struct PseudoSpan {
  std::string label;
  std::size_t first;  // index of the first word it dominates
  Tokens words;

  bool operator<(const PseudoSpan& o) const { return std::tie(first, label, words) < std::tie(o.first, o.label, o.words); }
  bool operator==(const PseudoSpan& o) const = default;
};

namespace detail {

inline void collect_pseudo(const Tree& t, std::size_t& cursor, std::vector<PseudoSpan>& out) {
  if (t.is_terminal()) {
    ++cursor;
    return;
  }
  const std::size_t first = cursor;
  for (const Tree& c : t.children) collect_pseudo(c, cursor, out);
  if (is_pseudo_label(t.label)) out.push_back({t.label, first, yield_tokens(t)});
}

inline bool prune(Tree& t, const std::vector<bool>& drop, std::size_t& cursor) {
  if (t.is_terminal()) return !drop[cursor++];
  std::vector<Tree> kept;
  for (Tree& c : t.children)
    if (prune(c, drop, cursor)) kept.push_back(std::move(c));
  t.children = std::move(kept);
  return !t.children.empty();
}

inline void relabel_words(Tree& t, const Tokens& words, std::size_t& cursor) {
  if (t.is_terminal()) {
    t.label = words[cursor++];
    return;
  }
  for (Tree& c : t.children) relabel_words(c, words, cursor);
}

}  // namespace detail

// Pseudo nodes of a tree with the words they cover, sorted.
inline std::vector<PseudoSpan> pseudo_spans(const Tree& t) {
  std::vector<PseudoSpan> out;
  std::size_t cursor = 0;
  detail::collect_pseudo(t, cursor, out);
  std::sort(out.begin(), out.end());
  return out;
}

// One node per edit: SUB and RED over their own word, MISS over the word
// right of the gap (the last word for a sentence-final gap).
inline std::vector<PseudoSpan> expected_pseudo_spans(const EditScript& script, const Tokens& src) {
  std::vector<PseudoSpan> out;
  for (const Edit& e : script.edits) {
    std::size_t at = e.begin;
    if (e.category == EditCategory::miss && at == src.size()) at = src.size() - 1;
    out.push_back({std::string(to_string(e.category)), at, {src[at]}});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Replaces the terminals of `t`, left to right, by `words`.
inline Tree relabel_words(Tree t, const Tokens& words) {
  std::size_t cursor = 0;
  detail::relabel_words(t, words, cursor);
  return t;
}

// The target tree with the missing words removed and emptied constituents
// dropped, plus the target words that remain, in order. Empty when nothing
// would remain.
struct PrunedTarget {
  Tree tree;
  Tokens words;
};

inline std::optional<PrunedTarget> prune_missing(const Tree& target, const EditScript& script, const Tokens& src) {
  const Tokens tgt = yield_tokens(target);
  std::vector<bool> missing(tgt.size(), false);
  Tokens kept;
  std::map<std::size_t, const Edit*> miss_at, word_at;
  for (const Edit& e : script.edits) (e.category == EditCategory::miss ? miss_at : word_at)[e.begin] = &e;
  std::size_t t = 0;
  for (std::size_t i = 0; i <= src.size(); ++i) {
    if (auto it = miss_at.find(i); it != miss_at.end())
      for (std::size_t k = 0; k < it->second->tgt.size(); ++k) missing[t++] = true;
    if (i == src.size()) break;
    if (auto it = word_at.find(i); it != word_at.end() && it->second->category == EditCategory::red) continue;
    kept.push_back(tgt[t++]);
  }
  PrunedTarget out{target, std::move(kept)};
  std::size_t cursor = 0;
  if (!detail::prune(out.tree, missing, cursor)) return std::nullopt;
  return out;
}

// Empty string when strip_pseudo(projected) removes exactly the inserted
// nodes and leaves the rest of the target tree intact; otherwise a reason.
// Sentences whose words are all redundant have nothing left to strip to and
// are reported as "n/a".
inline std::string strip_mismatch(const Tree& target, const EditScript& script, const Tokens& src,
                                  const Tree& projected) {
  std::size_t reds = 0;
  for (const Edit& e : script.edits) reds += e.category == EditCategory::red;
  if (reds == src.size()) return "n/a";
  const Tree stripped = strip_pseudo(projected);
  if (count_label(stripped, kSubLabel) + count_label(stripped, kRedLabel) + count_label(stripped, kMissLabel) != 0)
    return "pseudo labels survive stripping";
  if (nonterminal_count(stripped) + script.size() != nonterminal_count(projected))
    return "stripping removed more than the inserted nodes";
  const auto pruned = prune_missing(target, script, src);
  if (!pruned) return "n/a";
  if (relabel_words(stripped, pruned->words) != pruned->tree) return "untouched structure changed";
  return {};
}

}  // namespace csyn::testing

#endif
