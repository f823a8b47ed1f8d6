#include "csyn/subword.hpp"

#include <stdexcept>

#include "csyn/error.hpp"

namespace csyn {

namespace {

void replace_words(Tree& node, const SubwordSegmentation& seg, std::size_t& next) {
  std::vector<Tree> children;
  children.reserve(node.children.size());
  for (Tree& child : node.children) {
    if (child.is_terminal()) {
      for (const std::string& piece : seg[next]) children.push_back(Tree::terminal(piece));
      ++next;
    } else {
      replace_words(child, seg, next);
      children.push_back(std::move(child));
    }
  }
  node.children = std::move(children);
}

}  // namespace

std::string SubwordMarker::strip(std::string_view piece) const {
  if (marker.empty() || piece.size() < marker.size()) return std::string(piece);
  if (side == Side::prefix && piece.substr(0, marker.size()) == marker)
    return std::string(piece.substr(marker.size()));
  if (side == Side::suffix && piece.substr(piece.size() - marker.size()) == marker)
    return std::string(piece.substr(0, piece.size() - marker.size()));
  return std::string(piece);
}

std::string join_pieces(const std::vector<std::string>& pieces, const SubwordMarker& marker) {
  std::string word;
  for (const std::string& piece : pieces) word += marker.strip(piece);
  return word;
}

Tree to_subword_tree(const Tree& tree, const SubwordSegmentation& seg, const SubwordMarker& marker) {
  const std::vector<std::string> words = yield_tokens(tree);
  if (words.size() != seg.size())
    throw std::invalid_argument("segmentation has " + std::to_string(seg.size()) + " words, tree has " +
                                std::to_string(words.size()));
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (seg[i].empty()) throw std::invalid_argument("word " + std::to_string(i) + " has no subwords");
    const std::string joined = join_pieces(seg[i], marker);
    if (joined != words[i])
      throw std::invalid_argument("word " + std::to_string(i) + ": subwords spell '" + joined + "', tree has '" +
                                  words[i] + "'");
  }
  if (tree.is_terminal()) throw std::invalid_argument("tree root is a terminal");

  Tree out = tree;
  std::size_t next = 0;
  replace_words(out, seg, next);
  return out;
}

SubwordSegmentation parse_segmentation_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  SubwordSegmentation seg;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    const std::string_view word = line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos);
    std::vector<std::string> pieces;
    std::size_t p = 0;
    while (true) {
      const std::size_t sp = word.find(' ', p);
      const std::string_view piece = word.substr(p, sp == std::string_view::npos ? std::string_view::npos : sp - p);
      if (piece.empty()) throw FormatError("empty subword in segmentation");
      pieces.emplace_back(piece);
      if (sp == std::string_view::npos) break;
      p = sp + 1;
    }
    seg.push_back(std::move(pieces));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return seg;
}

}  // namespace csyn
