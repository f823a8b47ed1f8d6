#ifndef CSYN_TREE_HPP
#define CSYN_TREE_HPP

// Constituency trees over token sequences, in the usual one-tree-per-line
// bracketed notation:
//
//   (S (NP (DT the) (NN cat)) (VP (VBD sat)))
//
// A tree is a plain value: a node carries its label (or token, for
// terminals) and an ordered list of children. Terminal positions are implied
// by left-to-right order.

#include <string>
#include <string_view>
#include <vector>

namespace csyn {

enum class NodeKind { terminal, nonterminal };

inline constexpr std::string_view kSubLabel = "SUB";
inline constexpr std::string_view kRedLabel = "RED";
inline constexpr std::string_view kMissLabel = "MISS";

// True for the reserved error-marking labels SUB, RED and MISS.
bool is_pseudo_label(std::string_view label);

struct Tree {
  NodeKind kind = NodeKind::nonterminal;
  std::string label;  // constituent label, or the token itself for terminals
  std::vector<Tree> children;

  static Tree terminal(std::string token);
  static Tree nonterminal(std::string label, std::vector<Tree> children);

  bool is_terminal() const { return kind == NodeKind::terminal; }
  bool is_nonterminal() const { return kind == NodeKind::nonterminal; }
  // A non-terminal whose only child is a terminal (a POS tag node).
  bool is_preterminal() const;

  friend bool operator==(const Tree& a, const Tree& b) = default;
};

// Parses one bracketed tree. Tokens spelled -LRB- / -RRB- are unescaped to
// "(" / ")". Throws FormatError on unbalanced parentheses, empty constituents,
// label-less or childless constituents, trailing material, or empty input.
Tree parse_bracketed(std::string_view text);

// Canonical single-line form: single spaces, parentheses inside tokens
// escaped as -LRB- / -RRB-.
std::string serialize(const Tree& tree);

std::vector<std::string> yield_tokens(const Tree& tree);

std::size_t terminal_count(const Tree& tree);
std::size_t nonterminal_count(const Tree& tree);
// Number of non-terminals carrying `label`.
std::size_t count_label(const Tree& tree, std::string_view label);

struct Violation {
  std::string path;  // child indices from the root, e.g. "0.1"; "" for the root
  std::string message;
};

// Reports every structural problem found: bad labels or tokens, childless
// non-terminals, terminals with children, a terminal root, and (unless
// allowed) pseudo labels. An empty result means the tree is well formed.
std::vector<Violation> validate(const Tree& tree, bool allow_pseudo);

}  // namespace csyn

#endif
