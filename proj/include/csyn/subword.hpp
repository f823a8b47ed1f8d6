#ifndef CSYN_SUBWORD_HPP
#define CSYN_SUBWORD_HPP

// Word-level to subword-level trees: every word is replaced in place by its
// subword pieces, all attached to the word's own head node.
//
//   (S (VBG playing))  +  playing -> play @@ing   =>   (S (VBG play @@ing))

#include <string>
#include <string_view>
#include <vector>

#include "csyn/tree.hpp"

namespace csyn {

// How continuation pieces are marked. The default is a "@@" prefix on every
// piece after the first ("play @@ing"); suffix style is "play@@ ing".
struct SubwordMarker {
  enum class Side { prefix, suffix };
  std::string marker = "@@";
  Side side = Side::prefix;

  std::string strip(std::string_view piece) const;
};

// One entry per word, each a non-empty list of pieces.
using SubwordSegmentation = std::vector<std::vector<std::string>>;

// Concatenation of the pieces with markers removed.
std::string join_pieces(const std::vector<std::string>& pieces, const SubwordMarker& marker);

// Throws std::invalid_argument if a word has no pieces or the segmentation
// does not reproduce the tree's words.
Tree to_subword_tree(const Tree& tree, const SubwordSegmentation& seg, const SubwordMarker& marker = {});

// Parses one line of a segmentation file: words separated by TAB, pieces
// inside a word separated by single spaces.
SubwordSegmentation parse_segmentation_line(std::string_view line);

}  // namespace csyn

#endif
