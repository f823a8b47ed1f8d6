#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "csyn/edit.hpp"
#include "csyn/error.hpp"

namespace csyn {

namespace {

int category_rank(EditCategory c) {
  switch (c) {
    case EditCategory::miss: return 0;
    case EditCategory::sub: return 1;
    case EditCategory::red: return 2;
  }
  return 3;
}

std::string describe(const Edit& e) {
  return std::string(to_string(e.category)) + " [" + std::to_string(e.begin) + "," +
         std::to_string(e.end) + ")";
}

enum class Op : std::uint8_t { match, substitute, remove, insert };

// Suffix edit distances: cost[i][j] = distance(src[i:], tgt[j:]). Tracing
// forward from (0, 0) is what makes ties resolve left to right.
class SuffixTable {
public:
  SuffixTable(const Tokens& src, const Tokens& tgt)
      : rows_(src.size() + 1), cols_(tgt.size() + 1), cost_(rows_ * cols_) {
    const std::size_t n = src.size(), m = tgt.size();
    for (std::size_t i = n + 1; i-- > 0;) {
      for (std::size_t j = m + 1; j-- > 0;) {
        if (i == n) {
          at(i, j) = static_cast<std::uint32_t>(m - j);
        } else if (j == m) {
          at(i, j) = static_cast<std::uint32_t>(n - i);
        } else {
          const std::uint32_t diag = at(i + 1, j + 1) + (src[i] == tgt[j] ? 0u : 1u);
          at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
        }
      }
    }
  }

  std::uint32_t operator()(std::size_t i, std::size_t j) const { return cost_[i * cols_ + j]; }

private:
  std::uint32_t& at(std::size_t i, std::size_t j) { return cost_[i * cols_ + j]; }

  std::size_t rows_, cols_;
  std::vector<std::uint32_t> cost_;
};

// Flushes one maximal run of non-match operations as per-word edits.
void emit_region(std::size_t start, const Tokens& region_src, const Tokens& region_tgt,
                 std::vector<Edit>& out) {
  const std::size_t m = region_src.size(), n = region_tgt.size();
  const std::size_t paired = std::min(m, n);
  for (std::size_t k = 0; k < paired; ++k) out.push_back(Edit::sub(start + k, region_src[k], region_tgt[k]));
  for (std::size_t k = paired; k < m; ++k) out.push_back(Edit::red(start + k, region_src[k]));
  if (n > m) out.push_back(Edit::miss(start + m, Tokens(region_tgt.begin() + m, region_tgt.end())));
}

std::vector<std::string> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = line.find(sep, pos);
    if (hit == std::string_view::npos) {
      out.emplace_back(line.substr(pos));
      return out;
    }
    out.emplace_back(line.substr(pos, hit - pos));
    pos = hit + sep.size();
  }
}

}  // namespace

std::string_view to_string(EditCategory cat) {
  switch (cat) {
    case EditCategory::sub: return "SUB";
    case EditCategory::red: return "RED";
    case EditCategory::miss: return "MISS";
  }
  return "?";
}

EditCategory parse_category(std::string_view text) {
  if (text == "SUB") return EditCategory::sub;
  if (text == "RED") return EditCategory::red;
  if (text == "MISS") return EditCategory::miss;
  throw FormatError("unknown edit category: " + std::string(text));
}

Edit Edit::sub(std::size_t i, std::string from, std::string to) {
  return Edit{EditCategory::sub, i, i + 1, {std::move(from)}, {std::move(to)}};
}

Edit Edit::red(std::size_t i, std::string word) {
  return Edit{EditCategory::red, i, i + 1, {std::move(word)}, {}};
}

Edit Edit::miss(std::size_t i, Tokens words) {
  return Edit{EditCategory::miss, i, i, {}, std::move(words)};
}

bool same_edit(const Edit& a, const Edit& b) {
  return a.category == b.category && a.begin == b.begin && a.end == b.end && a.tgt == b.tgt;
}

bool script_order(const Edit& a, const Edit& b) {
  if (a.begin != b.begin) return a.begin < b.begin;
  return category_rank(a.category) < category_rank(b.category);
}

std::size_t script_cost(const EditScript& script) {
  std::size_t cost = 0;
  for (const Edit& e : script.edits) cost += e.category == EditCategory::miss ? e.tgt.size() : 1;
  return cost;
}

void validate_script(const EditScript& script, std::size_t src_size, const Tokens* src) {
  std::vector<bool> covered(src_size, false);
  std::set<std::size_t> miss_points;
  for (const Edit& e : script.edits) {
    switch (e.category) {
      case EditCategory::sub:
      case EditCategory::red: {
        if (e.end != e.begin + 1) throw std::invalid_argument(describe(e) + ": span must cover one word");
        if (e.end > src_size) throw std::invalid_argument(describe(e) + ": span out of range");
        if (e.src.size() != 1) throw std::invalid_argument(describe(e) + ": needs exactly one source token");
        const std::size_t want_tgt = e.category == EditCategory::sub ? 1 : 0;
        if (e.tgt.size() != want_tgt)
          throw std::invalid_argument(describe(e) + ": wrong number of target tokens");
        if (covered[e.begin]) throw std::invalid_argument(describe(e) + ": overlaps another edit");
        covered[e.begin] = true;
        if (src && (*src)[e.begin] != e.src.front())
          throw std::invalid_argument(describe(e) + ": source token mismatch ('" + e.src.front() +
                                      "' vs '" + (*src)[e.begin] + "')");
        break;
      }
      case EditCategory::miss: {
        if (e.end != e.begin) throw std::invalid_argument(describe(e) + ": span must be empty");
        if (e.begin > src_size) throw std::invalid_argument(describe(e) + ": span out of range");
        if (e.tgt.empty()) throw std::invalid_argument(describe(e) + ": no target tokens");
        if (!e.src.empty()) throw std::invalid_argument(describe(e) + ": must not carry source tokens");
        if (!miss_points.insert(e.begin).second)
          throw std::invalid_argument(describe(e) + ": second insertion at the same point");
        break;
      }
    }
  }
}

EditScript align(const Tokens& src, const Tokens& tgt) {
  const SuffixTable cost(src, tgt);
  const std::size_t n = src.size(), m = tgt.size();

  EditScript script;
  Tokens region_src, region_tgt;
  std::size_t region_start = 0;
  bool in_region = false;
  auto flush = [&] {
    if (!in_region) return;
    emit_region(region_start, region_src, region_tgt, script.edits);
    region_src.clear();
    region_tgt.clear();
    in_region = false;
  };

  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const std::uint32_t here = cost(i, j);
    Op op;
    if (i < n && j < m && src[i] == tgt[j] && here == cost(i + 1, j + 1))
      op = Op::match;
    else if (i < n && j < m && src[i] != tgt[j] && here == cost(i + 1, j + 1) + 1)
      op = Op::substitute;
    else if (i < n && here == cost(i + 1, j) + 1)
      op = Op::remove;
    else
      op = Op::insert;

    if (op == Op::match) {
      flush();
      ++i;
      ++j;
      continue;
    }
    if (!in_region) {
      in_region = true;
      region_start = i;
    }
    if (op == Op::substitute || op == Op::remove) region_src.push_back(src[i++]);
    if (op == Op::substitute || op == Op::insert) region_tgt.push_back(tgt[j++]);
  }
  flush();
  return script;
}

Tokens apply(const Tokens& src, const EditScript& script) {
  validate_script(script, src.size(), &src);
  std::vector<Edit> edits = script.edits;
  std::stable_sort(edits.begin(), edits.end(), script_order);

  Tokens out;
  out.reserve(src.size() + script.size());
  auto next = edits.cbegin();
  for (std::size_t i = 0; i <= src.size(); ++i) {
    bool consumed = false;
    for (; next != edits.cend() && next->begin == i; ++next) {
      switch (next->category) {
        case EditCategory::miss: out.insert(out.end(), next->tgt.begin(), next->tgt.end()); break;
        case EditCategory::sub: out.push_back(next->tgt.front()); consumed = true; break;
        case EditCategory::red: consumed = true; break;
      }
    }
    if (i < src.size() && !consumed) out.push_back(src[i]);
  }
  return out;
}

nlohmann::json to_json(const EditScript& script) {
  nlohmann::json edits = nlohmann::json::array();
  for (const Edit& e : script.edits) {
    edits.push_back({{"cat", to_string(e.category)},
                     {"i", e.begin},
                     {"j", e.end},
                     {"src", e.src},
                     {"tgt", e.tgt}});
  }
  return {{"edits", std::move(edits)}};
}

EditScript edit_script_from_json(const nlohmann::json& j) {
  EditScript script;
  try {
    for (const auto& item : j.at("edits")) {
      Edit e;
      e.category = parse_category(item.at("cat").get<std::string>());
      e.begin = item.at("i").get<std::size_t>();
      e.end = item.at("j").get<std::size_t>();
      e.src = item.value("src", Tokens{});
      e.tgt = item.value("tgt", Tokens{});
      script.edits.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad edit script JSON: ") + ex.what());
  }
  return script;
}

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<M2Sentence> read_m2(std::istream& in) {
  std::vector<M2Sentence> out;
  std::string line;
  std::size_t lineno = 0, sentence_line = 0;
  bool open = false;

  auto close = [&] {
    if (!open) return;
    M2Sentence& s = out.back();
    try {
      validate_script(s.edits, s.src.size(), &s.src);
    } catch (const std::invalid_argument& ex) {
      throw FormatError(ex.what(), sentence_line);
    }
    std::stable_sort(s.edits.edits.begin(), s.edits.edits.end(), script_order);
    open = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_tokens(line).empty()) {
      close();
      continue;
    }
    if (line.rfind("S ", 0) == 0 || line == "S") {
      close();
      out.push_back({split_tokens(std::string_view(line).substr(1)), {}});
      open = true;
      sentence_line = lineno;
      continue;
    }
    if (line.rfind("A ", 0) != 0) throw FormatError("expected an S or A line", lineno);
    if (!open) throw FormatError("A line outside a sentence block", lineno);

    const std::vector<std::string> fields = split_fields(std::string_view(line).substr(2), "|||");
    if (fields.size() < 3) throw FormatError("A line needs span|||category|||replacement", lineno);
    const Tokens span = split_tokens(fields[0]);
    if (span.size() != 2) throw FormatError("bad span: " + fields[0], lineno);
    if (fields[1] == "noop") continue;

    long long i = 0, j = 0;
    try {
      i = std::stoll(span[0]);
      j = std::stoll(span[1]);
    } catch (const std::exception&) {
      throw FormatError("bad span: " + fields[0], lineno);
    }
    M2Sentence& s = out.back();
    if (i < 0 || j < i || static_cast<std::size_t>(j) > s.src.size())
      throw FormatError("span out of range: " + fields[0], lineno);

    EditCategory cat;
    try {
      cat = parse_category(fields[1]);
    } catch (const FormatError&) {
      throw FormatError("unknown edit category: " + fields[1], lineno);
    }
    Tokens replacement = split_tokens(fields[2]);
    if (replacement.size() == 1 && replacement.front() == "-NONE-") replacement.clear();
    const auto b = static_cast<std::size_t>(i), e = static_cast<std::size_t>(j);
    Edit edit;
    switch (cat) {
      case EditCategory::sub:
        if (e != b + 1 || replacement.size() != 1)
          throw FormatError("SUB must replace one word by one word", lineno);
        edit = Edit::sub(b, s.src[b], replacement.front());
        break;
      case EditCategory::red:
        if (e != b + 1 || !replacement.empty())
          throw FormatError("RED must delete exactly one word", lineno);
        edit = Edit::red(b, s.src[b]);
        break;
      case EditCategory::miss:
        if (e != b || replacement.empty())
          throw FormatError("MISS must insert at an empty span", lineno);
        edit = Edit::miss(b, std::move(replacement));
        break;
    }
    s.edits.edits.push_back(std::move(edit));
  }
  close();
  return out;
}

void write_m2(std::ostream& out, const M2Sentence& sentence) {
  out << "S " << join_tokens(sentence.src) << '\n';
  for (const Edit& e : sentence.edits.edits)
    out << "A " << e.begin << ' ' << e.end << "|||" << to_string(e.category) << "|||"
        << join_tokens(e.tgt) << '\n';
  out << '\n';
}

}  // namespace csyn
