#include "csyn/project.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "csyn/error.hpp"

namespace csyn {

namespace {

// Mutable, parent-linked copy of a tree used while rewriting.
struct WorkNode {
  NodeKind kind = NodeKind::nonterminal;
  std::string label;
  std::vector<std::unique_ptr<WorkNode>> children;
  WorkNode* parent = nullptr;

  bool is_terminal() const { return kind == NodeKind::terminal; }
};

using WorkPtr = std::unique_ptr<WorkNode>;

WorkPtr make_node(NodeKind kind, std::string label) {
  auto node = std::make_unique<WorkNode>();
  node->kind = kind;
  node->label = std::move(label);
  return node;
}

WorkPtr from_tree(const Tree& tree, WorkNode* parent, std::vector<WorkNode*>& terminals) {
  WorkPtr node = make_node(tree.kind, tree.label);
  node->parent = parent;
  if (tree.is_terminal()) terminals.push_back(node.get());
  node->children.reserve(tree.children.size());
  for (const Tree& child : tree.children) node->children.push_back(from_tree(child, node.get(), terminals));
  return node;
}

Tree to_tree(const WorkNode& node) {
  Tree out{node.kind, node.label, {}};
  out.children.reserve(node.children.size());
  for (const WorkPtr& child : node.children) out.children.push_back(to_tree(*child));
  return out;
}

std::size_t index_in_parent(const WorkNode* node) {
  const auto& siblings = node->parent->children;
  for (std::size_t i = 0; i < siblings.size(); ++i)
    if (siblings[i].get() == node) return i;
  throw std::logic_error("node is not a child of its parent");
}

void insert_child(WorkNode* parent, std::size_t index, WorkPtr child) {
  child->parent = parent;
  parent->children.insert(parent->children.begin() + static_cast<std::ptrdiff_t>(index), std::move(child));
}

class Rewriter {
public:
  Rewriter(const Tree& tree, PseudoPlacement placement) : placement_(placement) {
    root_ = from_tree(tree, nullptr, terminals_);
  }

  const std::vector<WorkNode*>& terminals() const { return terminals_; }
  WorkNode* root() const { return root_.get(); }

  // Puts a new unary node labelled `label` between `node` and its parent.
  void wrap(WorkNode* node, std::string label) {
    WorkPtr wrapper = make_node(NodeKind::nonterminal, std::move(label));
    WorkNode* parent = node->parent;
    if (parent == nullptr) {
      wrapper->children.push_back(std::move(root_));
      node->parent = wrapper.get();
      root_ = std::move(wrapper);
      return;
    }
    const std::size_t at = index_in_parent(node);
    WorkPtr owned = std::move(parent->children[at]);
    owned->parent = wrapper.get();
    wrapper->children.push_back(std::move(owned));
    wrapper->parent = parent;
    parent->children[at] = std::move(wrapper);
  }

  // Detaches a terminal, then every ancestor it leaves childless. The root
  // itself is kept even when emptied.
  void remove_terminal(WorkNode* terminal) {
    WorkNode* node = terminal;
    while (node->parent != nullptr) {
      WorkNode* parent = node->parent;
      parent->children.erase(parent->children.begin() + static_cast<std::ptrdiff_t>(index_in_parent(node)));
      if (!parent->children.empty()) break;
      node = parent;
    }
  }

  // Walks up from `terminal` through unary nodes until the parent has at
  // least two children or is the root. Returns {parent, branch just exited}.
  static std::pair<WorkNode*, WorkNode*> phrase_of(WorkNode* terminal) {
    WorkNode* branch = terminal;
    WorkNode* parent = terminal->parent;
    while (parent->children.size() < 2 && parent->parent != nullptr) {
      branch = parent;
      parent = parent->parent;
    }
    return {parent, branch};
  }

  // The node a SUB wraps for this word.
  WorkNode* word_base(WorkNode* terminal) const {
    if (placement_ == PseudoPlacement::above) {
      WorkNode* parent = terminal->parent;
      if (parent != nullptr && parent->children.size() == 1 && !is_pseudo_label(parent->label))
        return parent;
    }
    return terminal;
  }

  // Top of the stack of unary pseudo nodes already marking this word.
  WorkNode* word_unit(WorkNode* terminal) const {
    WorkNode* node = word_base(terminal);
    while (node->parent != nullptr && node->parent->children.size() == 1 && is_pseudo_label(node->parent->label))
      node = node->parent;
    return node;
  }

private:
  PseudoPlacement placement_;
  WorkPtr root_;
  std::vector<WorkNode*> terminals_;
};

const Edit* find_miss_before(const std::vector<const Edit*>& misses, std::size_t point) {
  for (const Edit* e : misses)
    if (e->begin == point) return e;
  return nullptr;
}

}  // namespace

ProjectionResult project(const Tree& target_tree, const EditScript& script, const Tokens& src,
                         const ProjectOptions& options) {
  if (src.empty()) throw std::invalid_argument("empty source sentence");
  for (const Violation& v : validate(target_tree, /*allow_pseudo=*/false))
    throw std::invalid_argument("target tree: " + v.message + (v.path.empty() ? "" : " at " + v.path));
  validate_script(script, src.size(), &src);
  const Tokens target_words = yield_tokens(target_tree);
  if (csyn::apply(src, script) != target_words)
    throw std::invalid_argument("target tree yield does not match the corrected sentence");

  const std::size_t n = src.size();
  std::vector<const Edit*> at_word(n, nullptr);  // SUB/RED edit touching each source word
  std::vector<const Edit*> misses;
  for (const Edit& e : script.edits) {
    if (e.category == EditCategory::miss)
      misses.push_back(&e);
    else
      at_word[e.begin] = &e;
  }

  Rewriter rw(target_tree, options.placement);

  // Pair source words with target terminals; collect the terminals of
  // missing words.
  std::vector<WorkNode*> word_terminal(n, nullptr);
  std::vector<WorkNode*> missing;
  std::size_t t = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    if (const Edit* gap = find_miss_before(misses, i))
      for (std::size_t k = 0; k < gap->tgt.size(); ++k) missing.push_back(rw.terminals()[t++]);
    if (i == n) break;
    if (at_word[i] && at_word[i]->category == EditCategory::red) continue;
    word_terminal[i] = rw.terminals()[t++];
  }

  // Phase order: delete missing words, place redundant words, then add SUB
  // and MISS heads. SUB and MISS only add unary nodes, so they never change
  // where a redundant word lands.
  for (WorkNode* term : missing) rw.remove_terminal(term);

  std::vector<InsertedNode> inserted;
  for (std::size_t p = n; p-- > 0;) {
    if (!at_word[p] || at_word[p]->category != EditCategory::red) continue;
    WorkPtr red = make_node(NodeKind::nonterminal, std::string(kRedLabel));
    WorkPtr word = make_node(NodeKind::terminal, src[p]);
    word->parent = red.get();
    word_terminal[p] = word.get();
    red->children.push_back(std::move(word));

    if (p + 1 < n) {
      auto [phrase, branch] = Rewriter::phrase_of(word_terminal[p + 1]);
      insert_child(phrase, index_in_parent(branch), std::move(red));
    } else {
      // Sentence-final: attach right of the nearest word to the left that
      // is already in the tree.
      std::size_t left = p;
      while (left > 0 && word_terminal[left - 1] == nullptr) --left;
      if (left == 0) {
        insert_child(rw.root(), rw.root()->children.size(), std::move(red));
      } else {
        auto [phrase, branch] = Rewriter::phrase_of(word_terminal[left - 1]);
        insert_child(phrase, index_in_parent(branch) + 1, std::move(red));
      }
    }
    inserted.push_back({std::string(kRedLabel), p});
  }

  for (std::size_t p = 0; p < n; ++p) {
    if (!at_word[p] || at_word[p]->category != EditCategory::sub) continue;
    word_terminal[p]->label = src[p];
    rw.wrap(rw.word_base(word_terminal[p]), std::string(kSubLabel));
    inserted.push_back({std::string(kSubLabel), p});
  }

  for (const Edit* gap : misses) {
    const std::size_t anchor = gap->begin < n ? gap->begin : n - 1;
    rw.wrap(rw.word_unit(word_terminal[anchor]), std::string(kMissLabel));
    inserted.push_back({std::string(kMissLabel), anchor});
  }

  std::stable_sort(inserted.begin(), inserted.end(),
                   [](const InsertedNode& a, const InsertedNode& b) { return a.position < b.position; });
  return {to_tree(*rw.root()), std::move(inserted)};
}

namespace {

// Returns the nodes that replace `node` once pseudo nodes are removed.
std::vector<Tree> strip_into(const Tree& node) {
  if (node.is_terminal()) return {node};
  if (node.label == kRedLabel) return {};
  std::vector<Tree> kept;
  for (const Tree& child : node.children) {
    std::vector<Tree> part = strip_into(child);
    std::move(part.begin(), part.end(), std::back_inserter(kept));
  }
  if (node.label == kSubLabel || node.label == kMissLabel) return kept;
  if (kept.empty()) return {};
  return {Tree::nonterminal(node.label, std::move(kept))};
}

}  // namespace

Tree strip_pseudo(const Tree& tree) {
  std::vector<Tree> out = strip_into(tree);
  if (out.size() != 1 || !out.front().is_nonterminal())
    throw std::invalid_argument("stripping pseudo nodes leaves no single rooted tree");
  return std::move(out.front());
}

nlohmann::json ProjectionSummary::to_json() const {
  return {{"pairs", pairs}, {"skipped", skipped.size()}, {"pseudo_counts", pseudo_counts}};
}

Tree project_pair_line(const std::string& pair_line, const std::string& tree_line,
                       const ProjectOptions& options, ProjectionSummary& summary) {
  const std::size_t tab = pair_line.find('\t');
  if (tab == std::string::npos) throw FormatError("no TAB between source and target");
  if (pair_line.find('\t', tab + 1) != std::string::npos) throw FormatError("more than one TAB");
  const Tokens src = split_tokens(std::string_view(pair_line).substr(0, tab));
  const Tokens tgt = split_tokens(std::string_view(pair_line).substr(tab + 1));
  if (src.empty() || tgt.empty()) throw FormatError("empty source or target sentence");

  const Tree target_tree = parse_bracketed(tree_line);
  if (yield_tokens(target_tree) != tgt) throw std::invalid_argument("tree yield does not match the target sentence");

  ProjectionResult result = project(target_tree, align(src, tgt), src, options);
  for (const InsertedNode& node : result.inserted) ++summary.pseudo_counts[node.label];
  return std::move(result.source_tree);
}

}  // namespace csyn
