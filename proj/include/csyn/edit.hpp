#ifndef CSYN_EDIT_HPP
#define CSYN_EDIT_HPP

// Word-level edit scripts between a source (ungrammatical) and a target
// (corrected) token sequence. Only three structural categories exist:
//
//   SUB   [i, i+1)  one source word replaced by one target word
//   RED   [i, i+1)  one source word deleted
//   MISS  [i, i)    one or more target words inserted before source word i
//
// Many-to-many replacements are decomposed into these per-word edits.

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace csyn {

using Tokens = std::vector<std::string>;

enum class EditCategory { sub, red, miss };

std::string_view to_string(EditCategory cat);
// Throws FormatError for anything other than "SUB", "RED" or "MISS".
EditCategory parse_category(std::string_view text);

struct Edit {
  EditCategory category = EditCategory::sub;
  std::size_t begin = 0;  // half-open source span [begin, end)
  std::size_t end = 0;
  Tokens src;  // empty for MISS
  Tokens tgt;  // empty for RED

  static Edit sub(std::size_t i, std::string from, std::string to);
  static Edit red(std::size_t i, std::string word);
  static Edit miss(std::size_t i, Tokens words);

  friend bool operator==(const Edit&, const Edit&) = default;
};

// Identity used for matching and deduplication: category, span and target
// tokens. The recorded source tokens are not part of it.
bool same_edit(const Edit& a, const Edit& b);

// Script order: span start, then MISS before SUB/RED at the same position.
bool script_order(const Edit& a, const Edit& b);

struct EditScript {
  std::vector<Edit> edits;

  bool empty() const { return edits.empty(); }
  std::size_t size() const { return edits.size(); }
  friend bool operator==(const EditScript&, const EditScript&) = default;
};

// Unit cost of a script: one per SUB/RED, one per inserted target word.
std::size_t script_cost(const EditScript& script);

// Throws std::invalid_argument describing the first problem: malformed
// edit shape, span out of range for `src_size`, overlapping SUB/RED spans,
// two MISS edits at one insertion point, or recorded source tokens that
// disagree with `src` (checked only when `src` is non-null).
void validate_script(const EditScript& script, std::size_t src_size, const Tokens* src = nullptr);

// Minimal-cost, deterministic word alignment. Ties are broken left to right,
// preferring match > substitute > delete > insert.
EditScript align(const Tokens& src, const Tokens& tgt);

// Reconstructs the target. Edits may be given in any order.
Tokens apply(const Tokens& src, const EditScript& script);

// {"edits":[{"cat":"SUB","i":1,"j":2,"src":["cat"],"tgt":["dog"]}, ...]}
nlohmann::json to_json(const EditScript& script);
EditScript edit_script_from_json(const nlohmann::json& j);

// Simplified M2 blocks:
//
//   S a cat sat
//   A 1 2|||SUB|||dog
//   <blank line>
//
// "A -1 -1|||noop|||..." lines are accepted and ignored. Fields after the
// replacement are ignored.
struct M2Sentence {
  Tokens src;
  EditScript edits;
};

std::vector<M2Sentence> read_m2(std::istream& in);
void write_m2(std::ostream& out, const M2Sentence& sentence);

Tokens split_tokens(std::string_view text);
std::string join_tokens(const Tokens& tokens);

}  // namespace csyn

#endif
