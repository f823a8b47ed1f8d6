#include <doctest.h>

#include "csyn/project.hpp"
#include "support/generators.hpp"
#include "support/projection_oracle.hpp"

using namespace csyn;

namespace {

std::string projected(const std::string& target, const EditScript& script, const Tokens& src,
                      PseudoPlacement placement = PseudoPlacement::below) {
  return serialize(project(parse_bracketed(target), script, src, {placement}).source_tree);
}

}  // namespace

TEST_CASE("error-free pair keeps the tree") {
  CHECK(projected("(S (NP (DT a) (NN cat)))", {}, {"a", "cat"}) == "(S (NP (DT a) (NN cat)))");
}

TEST_CASE("one worked example per pseudo label") {
  CHECK(projected("(S (NP (DT a) (NN dog)))", EditScript{{Edit::sub(1, "cat", "dog")}}, {"a", "cat"}) ==
        "(S (NP (DT a) (NN (SUB cat))))");
  CHECK(projected("(S (NP (DT a) (NN cat)) (VP (VBD sat)))", EditScript{{Edit::red(1, "the")}},
                  {"a", "the", "cat", "sat"}) == "(S (NP (DT a) (RED the) (NN cat)) (VP (VBD sat)))");
  CHECK(projected("(S (NP (DT the) (NN cat)) (VP (VBD sat)))", EditScript{{Edit::miss(0, {"the"})}},
                  {"cat", "sat"}) == "(S (NP (NN (MISS cat))) (VP (VBD sat)))");
}

TEST_CASE("inserted nodes are reported by position") {
  const auto r = project(parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBD sat)))"),
                         EditScript{{Edit::miss(0, {"the"}), Edit::sub(0, "cat", "dog")}}, {"cat", "sat"});
  CHECK(serialize(r.source_tree) == "(S (NP (NN (MISS (SUB cat)))) (VP (VBD sat)))");
  CHECK(r.inserted == std::vector<InsertedNode>{{"SUB", 0}, {"MISS", 0}});
}

TEST_CASE("redundant words at the sentence end and in chains") {
  CHECK(projected("(S (NP (DT a) (NN cat)) (VP (VBD sat)))", EditScript{{Edit::red(3, "sat")}},
                  {"a", "cat", "sat", "sat"}) == "(S (NP (DT a) (NN cat)) (VP (VBD sat)) (RED sat))");
  CHECK(projected("(S (NP (DT a) (NN cat)) (VP (VBD sat)))",
                  EditScript{{Edit::red(1, "the"), Edit::red(2, "the")}}, {"a", "the", "the", "cat", "sat"}) ==
        "(S (NP (DT a) (RED the) (RED the) (NN cat)) (VP (VBD sat)))");
  // sentence-final chain hangs after the last kept word, in order
  CHECK(projected("(S (NP (DT a) (NN cat)) (VP (VBD sat)))",
                  EditScript{{Edit::red(3, "x"), Edit::red(4, "y")}}, {"a", "cat", "sat", "x", "y"}) ==
        "(S (NP (DT a) (NN cat)) (VP (VBD sat)) (RED x) (RED y))");
}

TEST_CASE("missing words at the sentence end mark the last word") {
  CHECK(projected("(S (NP (PRP it)) (VP (VBD sat) (PRT (RP down))))", EditScript{{Edit::miss(2, {"down"})}},
                  {"it", "sat"}) == "(S (NP (PRP it)) (VP (VBD (MISS sat))))");
}

TEST_CASE("above placement") {
  CHECK(projected("(S (NP (DT a) (NN dog)))", EditScript{{Edit::sub(1, "cat", "dog")}}, {"a", "cat"},
                  PseudoPlacement::above) == "(S (NP (DT a) (SUB (NN cat))))");
  CHECK(projected("(S (NP (DT the) (NN cat)) (VP (VBD sat)))", EditScript{{Edit::miss(0, {"the"})}}, {"cat", "sat"},
                  PseudoPlacement::above) == "(S (NP (MISS (NN cat))) (VP (VBD sat)))");
  // a bare word has no preterminal to climb over
  CHECK(projected("(S (DT a) dog)", EditScript{{Edit::sub(1, "cat", "dog")}}, {"a", "cat"}, PseudoPlacement::above) ==
        "(S (DT a) (SUB cat))");
}

TEST_CASE("projection preconditions") {
  const Tree t = parse_bracketed("(S (NP (DT a) (NN dog)))");
  CHECK_THROWS_AS(project(t, {}, {"a", "cat"}), std::invalid_argument);
  CHECK_THROWS_AS(project(t, EditScript{{Edit::sub(1, "cat", "dog")}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(project(t, EditScript{{Edit::sub(5, "cat", "dog")}}, {"a", "cat"}), std::invalid_argument);
  CHECK_THROWS_AS(project(parse_bracketed("(S (NP (DT a) (NN (SUB dog))))"), {}, {"a", "dog"}), std::invalid_argument);
}

TEST_CASE("strip_pseudo") {
  CHECK(serialize(strip_pseudo(parse_bracketed("(S (NP (DT a) (NN cat)))"))) == "(S (NP (DT a) (NN cat)))");
  CHECK(serialize(strip_pseudo(parse_bracketed("(S (NP (DT a) (RED the) (NN cat)))"))) == "(S (NP (DT a) (NN cat)))");
  CHECK(serialize(strip_pseudo(parse_bracketed("(NN (SUB cat))"))) == "(NN cat)");
  CHECK(serialize(strip_pseudo(parse_bracketed("(S (NP (NN (MISS (SUB cat)))) (VP (VBD sat)))"))) ==
        "(S (NP (NN cat)) (VP (VBD sat)))");
  CHECK(serialize(strip_pseudo(parse_bracketed("(S (NP (RED the)) (VP (VBD sat)))"))) == "(S (VP (VBD sat)))");
  CHECK_THROWS_AS(strip_pseudo(parse_bracketed("(S (RED the))")), std::invalid_argument);
  CHECK_THROWS_AS(strip_pseudo(parse_bracketed("(SUB (NN a) (NN b))")), std::invalid_argument);
}

TEST_CASE("projection properties on random trees and scripts") {
  testing::Rng rng(2024);
  for (int trial = 0; trial < 1500; ++trial) {
    const Tokens src = testing::random_tokens(rng, testing::uniform(rng, 1, 14));
    const EditScript script = testing::random_script(rng, src);
    const Tokens tgt = csyn::apply(src, script);
    if (tgt.empty()) continue;
    const Tree target = testing::random_tree(rng, tgt);
    const auto placement = testing::coin(rng, 0.5) ? PseudoPlacement::below : PseudoPlacement::above;
    CAPTURE(serialize(target));
    CAPTURE(to_json(script).dump());

    const ProjectionResult r = project(target, script, src, {placement});
    REQUIRE(yield_tokens(r.source_tree) == src);
    CHECK(validate(r.source_tree, true).empty());

    CHECK(testing::pseudo_spans(r.source_tree) == testing::expected_pseudo_spans(script, src));
    CHECK(r.inserted.size() == script.size());
    CHECK(std::is_sorted(r.inserted.begin(), r.inserted.end(),
                         [](const InsertedNode& a, const InsertedNode& b) { return a.position < b.position; }));
    const std::string strip = testing::strip_mismatch(target, script, src, r.source_tree);
    CHECK_MESSAGE((strip.empty() || strip == "n/a"), strip);
  }
}

TEST_CASE("SUB-only scripts round trip to the target") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Tokens src = testing::random_tokens(rng, testing::uniform(rng, 1, 12));
    const EditScript script = testing::random_script(rng, src, 0.4, 0.0, 0.0);
    const Tokens tgt = csyn::apply(src, script);
    const Tree target = testing::random_tree(rng, tgt);
    CHECK(testing::relabel_words(strip_pseudo(project(target, script, src).source_tree), tgt) == target);
  }
}

TEST_CASE("empty script is the identity on random trees") {
  testing::Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const Tokens words = testing::random_tokens(rng, testing::uniform(rng, 1, 12));
    const Tree t = testing::random_tree(rng, words);
    CHECK(project(t, {}, words, {PseudoPlacement::above}).source_tree == t);
    CHECK(project(t, {}, words).source_tree == t);
  }
}

TEST_CASE("batch projection") {
  SUBCASE("three pairs give one pseudo node each") {
    const std::vector<std::string> pairs{"a cat\ta dog", "a the cat sat\ta cat sat", "cat sat\tthe cat sat"};
    const std::vector<std::string> trees{"(S (NP (DT a) (NN dog)))", "(S (NP (DT a) (NN cat)) (VP (VBD sat)))",
                                         "(S (NP (DT the) (NN cat)) (VP (VBD sat)))"};
    std::vector<std::string> out;
    const auto summary = build_training_trees(pairs, trees, [&](const Tree& t) { out.push_back(serialize(t)); });
    REQUIRE(out.size() == 3);
    CHECK(out[0] == "(S (NP (DT a) (NN (SUB cat))))");
    CHECK(out[1] == "(S (NP (DT a) (RED the) (NN cat)) (VP (VBD sat)))");
    CHECK(out[2] == "(S (NP (NN (MISS cat))) (VP (VBD sat)))");
    for (std::size_t i = 0; i < 3; ++i) {
      const Tree t = parse_bracketed(out[i]);
      const std::string want = i == 0 ? "SUB" : i == 1 ? "RED" : "MISS";
      CHECK(count_label(t, want) == 1);
      CHECK(count_label(t, "SUB") + count_label(t, "RED") + count_label(t, "MISS") == 1);
    }
    CHECK(summary.to_json().dump() == R"({"pairs":3,"pseudo_counts":{"MISS":1,"RED":1,"SUB":1},"skipped":0})");
  }
  SUBCASE("identical pair returns the input tree") {
    std::vector<std::string> out;
    build_training_trees({"a cat\ta cat"}, {"(S (NP (DT a) (NN cat)))"},
                         [&](const Tree& t) { out.push_back(serialize(t)); });
    CHECK(out == std::vector<std::string>{"(S (NP (DT a) (NN cat)))"});
  }
  SUBCASE("malformed pairs are skipped with their line numbers") {
    std::vector<std::string> out;
    const auto summary =
        build_training_trees({"a cat\ta cat", "a cat\ta dog", "no tab here", "x\ty"},
                             {"(S (NP (DT a) (NN cat)))", "(S (NP (DT a) (NN cat)))", "(X a)", "(S (X y"},
                             [&](const Tree& t) { out.push_back(serialize(t)); });
    CHECK(out.size() == 1);
    REQUIRE(summary.skipped.size() == 3);
    CHECK(summary.skipped[0].line == 2);
    CHECK(summary.skipped[1].line == 3);
    CHECK(summary.skipped[2].line == 4);
    CHECK(summary.to_json()["skipped"] == 3);
  }
  SUBCASE("length mismatch is fatal") {
    CHECK_THROWS_AS(build_training_trees({"a\ta"}, {}, [](const Tree&) {}), std::invalid_argument);
  }
}
