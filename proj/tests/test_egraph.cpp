#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ecx/egraph.hpp"
#include "ecx/json_io.hpp"
#include "fixtures.hpp"

using namespace ecx;

TEST_CASE("parsing the square-root e-graph") {
  EGraph g = fixtures::square_root();
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_classes() == 3);
  CHECK(g.num_deps() == 3);  // sqrt->B, plus->A, plus->C
  CHECK(g.roots().size() == 1);
  CHECK(g.class_id(g.roots()[0]) == "A");

  auto sqrt = g.find_node("sqrt");
  REQUIRE(sqrt);
  CHECK(g.node(*sqrt).op == "sqrt");
  CHECK(g.class_id(g.node(*sqrt).cls) == "A");
  REQUIRE(g.node(*sqrt).deps.size() == 1);
  CHECK(g.class_id(g.node(*sqrt).deps[0]) == "B");

  auto plus = g.find_node("plus");
  REQUIRE(plus);
  CHECK(g.node(*plus).deps.size() == 2);  // A and C, deduplicated and sorted

  CHECK(g.class_members(*g.find_class("A")).size() == 2);
  CHECK(!g.find_node("missing"));
  CHECK(!g.find_class("missing"));
}

TEST_CASE("extraction cost is the sum over the domain") {
  EGraph g = fixtures::square_root();
  CHECK(extraction_cost(g, fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}})) == 2.0);
  CHECK(extraction_cost(g, fixtures::choose(g, {{"A", "plus"}, {"C", "zero"}})) == 2.0);
  CHECK(extraction_cost(g, fixtures::choose(g, {})) == 0.0);
}

TEST_CASE("cost scales linearly with node costs") {
  std::string text = fixtures::square_root_json();
  // every cost 1 -> every cost 3
  for (std::size_t at = text.find("\"cost\": 1"); at != std::string::npos;
       at = text.find("\"cost\": 1", at + 1)) {
    text[at + 8] = '3';
  }
  EGraph g = parse_egraph(text);
  CHECK(extraction_cost(g, fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}})) == 6.0);
}

TEST_CASE("validating the canonical choices") {
  EGraph g = fixtures::square_root();

  SUBCASE("sqrt and its leaf: satisfying, acyclic, minimal") {
    auto v = validate_extraction(g, fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}}));
    CHECK(v.is_extraction);
    CHECK(v.is_satisfying);
    CHECK(v.is_acyclic);
    CHECK(v.is_minimal);
    CHECK(v.violations.empty());
  }

  SUBCASE("plus depends on its own class: closed but cyclic") {
    auto v = validate_extraction(g, fixtures::choose(g, {{"A", "plus"}, {"C", "zero"}}));
    CHECK(v.is_extraction);
    CHECK(v.is_satisfying);
    CHECK(!v.is_acyclic);
    CHECK(v.is_minimal);
  }

  SUBCASE("root class left unchosen") {
    auto v = validate_extraction(g, fixtures::choose(g, {{"B", "two"}}));
    CHECK(v.is_extraction);
    CHECK(!v.is_satisfying);
  }

  SUBCASE("node assigned outside its own class") {
    Extraction x;
    x.choice[*g.find_class("A")] = *g.find_node("two");
    auto v = validate_extraction(g, x);
    CHECK(!v.is_extraction);
    CHECK(!v.violations.empty());
  }

  SUBCASE("dependency class missing from the domain") {
    auto v = validate_extraction(g, fixtures::choose(g, {{"A", "sqrt"}}));
    CHECK(!v.is_extraction);
  }

  SUBCASE("unreachable chosen class breaks minimality") {
    auto v = validate_extraction(
        g, fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}, {"C", "zero"}}));
    CHECK(v.is_extraction);
    CHECK(v.is_satisfying);
    CHECK(v.is_acyclic);
    CHECK(!v.is_minimal);
  }
}

TEST_CASE("parser rejects malformed inputs") {
  CHECK_THROWS_AS(parse_egraph("{nope"), ParseError);
  CHECK_THROWS_AS(parse_egraph("[]"), ParseError);
  CHECK_THROWS_AS(  // child names a node that does not exist
      parse_egraph(R"({"nodes": {"a": {"eclass": "A", "children": ["ghost"]}},
                      "root_eclasses": ["A"]})"),
      ParseError);
  CHECK_THROWS_AS(  // negative cost
      parse_egraph(R"({"nodes": {"a": {"eclass": "A", "cost": -1}},
                      "root_eclasses": ["A"]})"),
      ParseError);
  CHECK_THROWS_AS(  // non-numeric cost
      parse_egraph(R"({"nodes": {"a": {"eclass": "A", "cost": "free"}},
                      "root_eclasses": ["A"]})"),
      ParseError);
  CHECK_THROWS_AS(  // empty roots
      parse_egraph(R"({"nodes": {"a": {"eclass": "A"}}, "root_eclasses": []})"), ParseError);
  CHECK_THROWS_AS(  // missing roots array
      parse_egraph(R"({"nodes": {"a": {"eclass": "A"}}})"), ParseError);
  CHECK_THROWS_AS(  // root class with no members
      parse_egraph(R"({"nodes": {"a": {"eclass": "A"}}, "root_eclasses": ["Z"]})"), ParseError);
}

TEST_CASE("rendering and reparsing is faithful") {
  EGraph g = fixtures::square_root();
  EGraph h = parse_egraph(render_egraph(g));
  REQUIRE(h.num_nodes() == g.num_nodes());
  REQUIRE(h.num_classes() == g.num_classes());
  CHECK(h.num_deps() == g.num_deps());
  for (std::uint32_t n = 0; n < g.num_nodes(); ++n) {
    auto m = h.find_node(g.node(n).id);
    REQUIRE(m);
    CHECK(h.node(*m).op == g.node(n).op);
    CHECK(h.node(*m).cost == g.node(n).cost);
    CHECK(h.node(*m).children == g.node(n).children);
    CHECK(h.class_id(h.node(*m).cls) == g.class_id(g.node(n).cls));
  }
}

TEST_CASE("extraction choices survive a JSON round trip") {
  EGraph g = fixtures::square_root();
  Extraction x = fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}});
  Extraction y = extraction_from_json(g, extraction_to_json(g, x, 2.0, true));
  CHECK(y.choice == x.choice);
  CHECK_THROWS_AS(extraction_from_json(g, R"({"choices": {"A": "zero"}})"), ParseError);
  CHECK_THROWS_AS(extraction_from_json(g, R"({"choices": {"Z": "two"}})"), ParseError);
}
