#include "csyn/tree.hpp"

#include <algorithm>
#include <cctype>

#include "csyn/error.hpp"

namespace csyn {

namespace {

constexpr std::string_view kLrb = "-LRB-";
constexpr std::string_view kRrb = "-RRB-";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(from, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::string escape_token(std::string_view token) {
  if (token.find_first_of("()") == std::string_view::npos) return std::string(token);
  std::string out;
  for (char c : token) {
    if (c == '(')
      out += kLrb;
    else if (c == ')')
      out += kRrb;
    else
      out += c;
  }
  return out;
}

std::string unescape_token(std::string_view token) {
  if (token.find('-') == std::string_view::npos) return std::string(token);
  return replace_all(replace_all(token, kLrb, "("), kRrb, ")");
}

struct Lexeme {
  enum Kind { open, close, atom } kind;
  std::string_view text;
};

std::vector<Lexeme> lex(std::string_view text) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
    } else if (c == '(') {
      out.push_back({Lexeme::open, text.substr(i, 1)});
      ++i;
    } else if (c == ')') {
      out.push_back({Lexeme::close, text.substr(i, 1)});
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j]) && text[j] != '(' && text[j] != ')') ++j;
      out.push_back({Lexeme::atom, text.substr(i, j - i)});
      i = j;
    }
  }
  return out;
}

void serialize_into(const Tree& node, std::string& out) {
  if (node.is_terminal()) {
    out += escape_token(node.label);
    return;
  }
  out += '(';
  out += node.label;
  for (const Tree& child : node.children) {
    out += ' ';
    serialize_into(child, out);
  }
  out += ')';
}

template <typename F>
void for_each_node(const Tree& node, F&& visit) {
  visit(node);
  for (const Tree& child : node.children) for_each_node(child, visit);
}

bool has_bad_char(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_space(c) || c == '(' || c == ')'; });
}

std::string child_path(const std::string& parent, std::size_t index) {
  return parent.empty() ? std::to_string(index) : parent + "." + std::to_string(index);
}

void validate_into(const Tree& node, const std::string& path, bool allow_pseudo,
                   std::vector<Violation>& out) {
  if (node.is_terminal()) {
    if (node.label.empty())
      out.push_back({path, "empty token"});
    else if (std::any_of(node.label.begin(), node.label.end(), is_space))
      out.push_back({path, "token contains whitespace"});
    if (!node.children.empty()) out.push_back({path, "terminal has children"});
    return;
  }
  if (node.label.empty())
    out.push_back({path, "empty label"});
  else if (has_bad_char(node.label))
    out.push_back({path, "label contains whitespace or parentheses: " + node.label});
  if (!allow_pseudo && is_pseudo_label(node.label))
    out.push_back({path, "pseudo label not allowed here: " + node.label});
  if (node.children.empty()) out.push_back({path, "non-terminal " + node.label + " has no children"});
  for (std::size_t i = 0; i < node.children.size(); ++i)
    validate_into(node.children[i], child_path(path, i), allow_pseudo, out);
}

}  // namespace

bool is_pseudo_label(std::string_view label) {
  return label == kSubLabel || label == kRedLabel || label == kMissLabel;
}

Tree Tree::terminal(std::string token) { return Tree{NodeKind::terminal, std::move(token), {}}; }

Tree Tree::nonterminal(std::string label, std::vector<Tree> children) {
  return Tree{NodeKind::nonterminal, std::move(label), std::move(children)};
}

bool Tree::is_preterminal() const {
  return is_nonterminal() && children.size() == 1 && children.front().is_terminal();
}

Tree parse_bracketed(std::string_view text) {
  const std::vector<Lexeme> lexemes = lex(text);
  if (lexemes.empty()) throw FormatError("empty tree");
  if (lexemes.front().kind != Lexeme::open)
    throw FormatError("tree must start with '(': " + std::string(lexemes.front().text));

  // Open constituents, innermost last.
  std::vector<Tree> stack;
  std::size_t i = 0;
  while (i < lexemes.size()) {
    const Lexeme& lx = lexemes[i];
    switch (lx.kind) {
      case Lexeme::open: {
        if (i + 1 >= lexemes.size()) throw FormatError("unbalanced parentheses");
        const Lexeme& next = lexemes[i + 1];
        if (next.kind == Lexeme::close) throw FormatError("empty constituent \"()\"");
        if (next.kind == Lexeme::open) throw FormatError("constituent without a label");
        stack.push_back(Tree::nonterminal(std::string(next.text), {}));
        i += 2;
        break;
      }
      case Lexeme::close: {
        if (stack.empty()) throw FormatError("unbalanced parentheses: unexpected ')'");
        Tree done = std::move(stack.back());
        stack.pop_back();
        if (done.children.empty())
          throw FormatError("constituent " + done.label + " has no children");
        if (stack.empty()) {
          if (i + 1 != lexemes.size()) throw FormatError("trailing material after the tree");
          return done;
        }
        stack.back().children.push_back(std::move(done));
        ++i;
        break;
      }
      case Lexeme::atom: {
        if (stack.empty()) throw FormatError("trailing material after the tree");
        stack.back().children.push_back(Tree::terminal(unescape_token(lx.text)));
        ++i;
        break;
      }
    }
  }
  throw FormatError("unbalanced parentheses: missing ')'");
}

std::string serialize(const Tree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

std::vector<std::string> yield_tokens(const Tree& tree) {
  std::vector<std::string> out;
  for_each_node(tree, [&](const Tree& n) {
    if (n.is_terminal()) out.push_back(n.label);
  });
  return out;
}

std::size_t terminal_count(const Tree& tree) {
  std::size_t n = 0;
  for_each_node(tree, [&](const Tree& t) { n += t.is_terminal(); });
  return n;
}

std::size_t nonterminal_count(const Tree& tree) {
  std::size_t n = 0;
  for_each_node(tree, [&](const Tree& t) { n += t.is_nonterminal(); });
  return n;
}

std::size_t count_label(const Tree& tree, std::string_view label) {
  std::size_t n = 0;
  for_each_node(tree, [&](const Tree& t) { n += t.is_nonterminal() && t.label == label; });
  return n;
}

std::vector<Violation> validate(const Tree& tree, bool allow_pseudo) {
  std::vector<Violation> out;
  if (tree.is_terminal()) out.push_back({"", "root is a terminal"});
  validate_into(tree, "", allow_pseudo, out);
  return out;
}

}  // namespace csyn
