#include <doctest.h>

#include <random>

#include "hmgi/query/ast.hpp"
#include "hmgi/errors.hpp"
#include "support/query_gen.hpp"

using namespace hmgi;
using namespace hmgi::query;

TEST_CASE("parses the canonical hybrid query") {
  auto ast = parse(
      "VECTOR_SEARCH(text, $q, k=100, ef=200) TRAVERSE hops=2 "
      "SIMILARITY_WEIGHT v=0.5 g=0.5 RETURN TOP 10");
  CHECK(ast.vector.modality == Modality::text());
  CHECK(std::get<std::string>(ast.vector.source) == "q");
  CHECK(ast.vector.k == 100);
  CHECK(ast.vector.ef == 200);
  CHECK(ast.traverse.hops == 2);
  CHECK(ast.w_v == doctest::Approx(0.5));
  CHECK(ast.w_g == doctest::Approx(0.5));
  CHECK(ast.top_n == 10);
}

TEST_CASE("weights normalize to sum 1") {
  auto ast = parse(
      "VECTOR_SEARCH(text, $q, k=10) SIMILARITY_WEIGHT v=2 g=2 RETURN TOP 5");
  CHECK(ast.w_v == doctest::Approx(0.5));
  CHECK(ast.w_g == doctest::Approx(0.5));

  auto skew = parse(
      "VECTOR_SEARCH(text, $q, k=10) SIMILARITY_WEIGHT v=3 g=1 RETURN TOP 5");
  CHECK(skew.w_v == doctest::Approx(0.75));
  CHECK(skew.w_g == doctest::Approx(0.25));
}

TEST_CASE("negative or empty weights are rejected") {
  CHECK_THROWS_AS(parse("VECTOR_SEARCH(text, $q, k=10) "
                        "SIMILARITY_WEIGHT v=-1 g=2 RETURN TOP 5"),
                  NegativeWeight);
  CHECK_THROWS_AS(parse("VECTOR_SEARCH(text, $q, k=10) "
                        "SIMILARITY_WEIGHT v=0 g=0 RETURN TOP 5"),
                  NegativeWeight);
}

TEST_CASE("default weights depend on the traversal clause") {
  auto pure = parse("VECTOR_SEARCH(text, $q, k=10) RETURN TOP 5");
  CHECK(pure.w_v == 1.0);
  CHECK(pure.w_g == 0.0);
  auto hybrid =
      parse("VECTOR_SEARCH(text, $q, k=10) TRAVERSE hops=2 RETURN TOP 5");
  CHECK(hybrid.w_v == 0.5);
  CHECK(hybrid.w_g == 0.5);
}

TEST_CASE("match pattern, predicates, literals") {
  auto ast = parse(
      "MATCH (doc:Paper {year: 2021, title: 'x'}) "
      "WHERE doc.score >= 0.5 AND doc.kind != 'draft' "
      "VECTOR_SEARCH(image, [0.5, -0.25], k=3) RETURN TOP 3");
  CHECK(ast.pattern.var == "doc");
  CHECK(ast.pattern.label == "Paper");
  CHECK(ast.pattern.equals.size() == 2);
  CHECK(std::get<std::int64_t>(ast.pattern.equals.at("year")) == 2021);
  REQUIRE(ast.predicates.size() == 2);
  CHECK(ast.predicates[0].op == CompareOp::Ge);
  CHECK(ast.predicates[1].op == CompareOp::Ne);
  CHECK(ast.pattern.binds_seeds());
  auto lits = std::get<std::vector<float>>(ast.vector.source);
  CHECK(lits == std::vector<float>{0.5f, -0.25f});
}

TEST_CASE("node-ref source and unknown modality names") {
  auto ast = parse("VECTOR_SEARCH(lidar, node(17), k=5) RETURN TOP 5");
  CHECK(ast.vector.modality.kind() == ModalityKind::Other);
  CHECK(ast.vector.modality.name() == "lidar");
  CHECK(std::get<NodeId>(ast.vector.source) == 17);
}

TEST_CASE("syntax errors carry position and expectation") {
  try {
    parse("VECTOR_SEARCH(text, $q, k=10) RETURN BOTTOM 5");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() > 30);
    CHECK(e.expected().find("TOP") != std::string::npos);
  }

  try {
    parse("VECTOR_SEARCH(text $q, k=10) RETURN TOP 5");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.column() == 20);  // the '$' where ',' was expected
  }

  try {
    parse("VECTOR_SEARCH(text, $q,\n k=) RETURN TOP 5");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("malformed corpus never crashes, always positioned SyntaxError") {
  const char* corpus[] = {
      "",
      "MATCH",
      "MATCH (",
      "MATCH (n",
      "MATCH (n:",
      "MATCH (n) WHERE",
      "MATCH (n) WHERE n.",
      "MATCH (n) WHERE n.x >",
      "VECTOR_SEARCH",
      "VECTOR_SEARCH(",
      "VECTOR_SEARCH()",
      "VECTOR_SEARCH(text)",
      "VECTOR_SEARCH(text,)",
      "VECTOR_SEARCH(text, $)",
      "VECTOR_SEARCH(text, $q)",
      "VECTOR_SEARCH(text, $q, k)",
      "VECTOR_SEARCH(text, $q, k=0x3) RETURN TOP 1",
      "VECTOR_SEARCH(text, $q, k=5",
      "VECTOR_SEARCH(text, $q, k=5) TRAVERSE",
      "VECTOR_SEARCH(text, $q, k=5) TRAVERSE hops",
      "VECTOR_SEARCH(text, $q, k=5) TRAVERSE hops=x",
      "VECTOR_SEARCH(text, $q, k=5) TRAVERSE hops=1 dir=sideways RETURN TOP 1",
      "VECTOR_SEARCH(text, $q, k=5) SIMILARITY_WEIGHT RETURN TOP 1",
      "VECTOR_SEARCH(text, $q, k=5) SIMILARITY_WEIGHT v=1 RETURN TOP 1",
      "VECTOR_SEARCH(text, $q, k=5) BUDGET RETURN TOP 1",
      "VECTOR_SEARCH(text, $q, k=5) RETURN",
      "VECTOR_SEARCH(text, $q, k=5) RETURN TOP",
      "VECTOR_SEARCH(text, $q, k=5) RETURN TOP -3",
      "VECTOR_SEARCH(text, $q, k=5) RETURN TOP 3 trailing",
      "VECTOR_SEARCH(text, [1,,2], k=5) RETURN TOP 1",
      "VECTOR_SEARCH(text, [1 2], k=5) RETURN TOP 1",
      "VECTOR_SEARCH(text, 'str', k=5) RETURN TOP 1",
      "MATCH (n {p: }) VECTOR_SEARCH(text, $q, k=5) RETURN TOP 1",
      "MATCH (n) VECTOR_SEARCH(text, $q, k=5) RETURN TOP 1e",
      "!!!",
      "\x01\x02\x03",
      "MATCH (n) WHERE n.x ! 3 VECTOR_SEARCH(text, $q, k=1) RETURN TOP 1",
      "VECTOR_SEARCH(text, $q, k=5) RETURN TOP 1 \"unterminated",
  };
  for (const char* text : corpus) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse(text), SyntaxError);
  }
}

TEST_CASE("round trip: parse(print(parse(s))) == parse(s) on 1000 queries") {
  std::mt19937_64 rng(4242);
  int checked = 0;
  while (checked < 1000) {
    std::string text = querygen::random_query(rng);
    HybridQueryAst first;
    try {
      first = parse(text);
    } catch (const NegativeWeight&) {
      continue;  // generator may emit g slightly above 0 only
    }
    ++checked;
    CAPTURE(text);
    std::string printed = print(first);
    HybridQueryAst second = parse(printed);
    CHECK(first == second);
    // Printing is a fixed point.
    CHECK(print(second) == printed);
  }
}

TEST_CASE("budget must be positive") {
  CHECK_THROWS_AS(
      parse("VECTOR_SEARCH(text, $q, k=5) BUDGET 0 RETURN TOP 1"),
      SyntaxError);
  auto ok = parse("VECTOR_SEARCH(text, $q, k=5) BUDGET 25 RETURN TOP 1");
  CHECK(ok.budget_ms == doctest::Approx(25.0));
}

TEST_CASE("hops=0 normalizes away traversal modifiers") {
  auto a = parse(
      "VECTOR_SEARCH(text, $q, k=5) TRAVERSE hops=0 types=(X) dir=both "
      "RETURN TOP 1");
  auto b = parse("VECTOR_SEARCH(text, $q, k=5) RETURN TOP 1");
  CHECK(a.traverse == b.traverse);
}
