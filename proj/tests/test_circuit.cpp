#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "ecx/circuit.hpp"
#include "ecx/egraph.hpp"
#include "fixtures.hpp"

using namespace ecx;

namespace {

struct Converted {
  EGraph g;
  Circuit c;
  NodeMap m;
  std::uint32_t sqrt, plus, two, zero;  // node indices
  std::uint32_t A, B, C;                // class indices

  Converted() : g(fixtures::square_root()) {
    auto [cc, mm] = egraph_to_circuit(g);
    c = std::move(cc);
    m = std::move(mm);
    sqrt = *g.find_node("sqrt");
    plus = *g.find_node("plus");
    two = *g.find_node("two");
    zero = *g.find_node("zero");
    A = *g.find_class("A");
    B = *g.find_class("B");
    C = *g.find_class("C");
  }

  /// The evaluation choosing sqrt and its leaf: variables and AND gates of
  /// sqrt and two, plus the OR gates of their classes.
  Evaluation sqrt_eval() const {
    Evaluation a;
    a.value.assign(c.num_vertices(), 0);
    for (std::uint32_t v :
         {m.x_of[sqrt], m.and_of[sqrt], m.x_of[two], m.and_of[two], m.or_of[A], m.or_of[B]}) {
      a.value[v] = 1;
    }
    return a;
  }
};

}  // namespace

TEST_CASE("conversion layout of the square-root e-graph") {
  Converted t;
  CHECK(t.c.num_vertices() == 11);  // 2 per node + 1 per class
  CHECK(t.c.num_edges() == 11);     // 2 per node + 1 per dependency
  REQUIRE(t.c.outputs().size() == 1);
  CHECK(t.c.outputs()[0] == t.m.or_of[t.A]);

  for (std::uint32_t n : {t.sqrt, t.plus, t.two, t.zero}) {
    CHECK(t.c.kind(t.m.x_of[n]) == VertexKind::Input);
    CHECK(t.c.kind(t.m.and_of[n]) == VertexKind::And);
    CHECK(t.c.cost(t.m.x_of[n]) == t.g.node(n).cost);
    // variable feeds the AND, the AND feeds its class OR
    const auto& outs = t.c.out(t.m.x_of[n]);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0] == t.m.and_of[n]);
    const auto& gate_outs = t.c.out(t.m.and_of[n]);
    REQUIRE(gate_outs.size() == 1);
    CHECK(gate_outs[0] == t.m.or_of[t.g.node(n).cls]);
  }
  // plus's AND takes its variable and the ORs of classes A and C
  const auto& ins = t.c.in(t.m.and_of[t.plus]);
  CHECK(ins.size() == 3);
  CHECK(std::count(ins.begin(), ins.end(), t.m.or_of[t.A]) == 1);
  CHECK(std::count(ins.begin(), ins.end(), t.m.or_of[t.C]) == 1);
  CHECK_NOTHROW(t.c.validate());
}

TEST_CASE("evaluation predicates on hand-built assignments") {
  Converted t;

  SUBCASE("the sqrt evaluation is valid, satisfying, acyclic, minimal") {
    Evaluation a = t.sqrt_eval();
    CHECK(is_valid_evaluation(t.c, a));
    CHECK(is_satisfying(t.c, a));
    CHECK(is_acyclic_evaluation(t.c, a));
    CHECK(is_minimal(t.c, a));
    CHECK(evaluation_cost(t.c, a) == 2.0);
  }

  SUBCASE("all zeros is valid but not satisfying") {
    Evaluation a;
    a.value.assign(t.c.num_vertices(), 0);
    CHECK(is_valid_evaluation(t.c, a));
    CHECK(!is_satisfying(t.c, a));
  }

  SUBCASE("an OR without a true in-neighbor is invalid") {
    Evaluation a;
    a.value.assign(t.c.num_vertices(), 0);
    a.value[t.m.or_of[t.A]] = 1;
    CHECK(!is_valid_evaluation(t.c, a));
  }

  SUBCASE("all ones is valid and satisfying but cyclic and non-minimal") {
    Evaluation a;
    a.value.assign(t.c.num_vertices(), 1);
    CHECK(is_valid_evaluation(t.c, a));
    CHECK(is_satisfying(t.c, a));
    CHECK(!is_acyclic_evaluation(t.c, a));  // OR_A -> AND_plus -> OR_A
    CHECK(!is_minimal(t.c, a));
  }
}

TEST_CASE("least fixpoint from an input assignment") {
  Converted t;
  std::vector<std::uint8_t> inputs(t.c.num_vertices(), 0);
  inputs[t.m.x_of[t.sqrt]] = 1;
  inputs[t.m.x_of[t.two]] = 1;
  FixpointResult r = evaluate_from_inputs(t.c, inputs);
  CHECK(r.acyclic);
  CHECK(r.evaluation.value == t.sqrt_eval().value);

  std::fill(inputs.begin(), inputs.end(), 0);
  FixpointResult zero = evaluate_from_inputs(t.c, inputs);
  CHECK(is_valid_evaluation(t.c, zero.evaluation));
  CHECK(!is_satisfying(t.c, zero.evaluation));
}

TEST_CASE("empty AND gates are true, empty OR gates are false") {
  CircuitBuilder b;
  std::uint32_t and_v = b.add_vertex(VertexKind::And);
  std::uint32_t or_v = b.add_vertex(VertexKind::Or);
  b.mark_output(and_v);
  Circuit c = b.build();

  FixpointResult r = evaluate_from_inputs(c, {0, 0});
  CHECK(r.evaluation.truth(and_v));
  CHECK(!r.evaluation.truth(or_v));
  CHECK(is_valid_evaluation(c, r.evaluation));
  CHECK(is_satisfying(c, r.evaluation));
}

TEST_CASE("extraction and evaluation are two views of one choice") {
  Converted t;

  SUBCASE("acyclic choice maps to the sqrt evaluation and back") {
    Extraction x = fixtures::choose(t.g, {{"A", "sqrt"}, {"B", "two"}});
    Evaluation a = extraction_to_evaluation(t.g, t.m, x);
    CHECK(a.value == t.sqrt_eval().value);
    Extraction back = evaluation_to_extraction(t.g, t.m, a);
    CHECK(back.choice == x.choice);
  }

  SUBCASE("cyclic choice still maps to a valid satisfying evaluation") {
    Extraction x = fixtures::choose(t.g, {{"A", "plus"}, {"C", "zero"}});
    Evaluation a = extraction_to_evaluation(t.g, t.m, x);
    CHECK(is_valid_evaluation(t.c, a));
    CHECK(is_satisfying(t.c, a));
    CHECK(!is_acyclic_evaluation(t.c, a));
    CHECK(is_minimal(t.c, a));
    CHECK(evaluation_cost(t.c, a) == extraction_cost(t.g, x));
    Extraction back = evaluation_to_extraction(t.g, t.m, a);
    CHECK(back.choice == x.choice);
  }

  SUBCASE("two true AND gates in one class cannot be read back") {
    Evaluation a;
    a.value.assign(t.c.num_vertices(), 1);
    CHECK_THROWS_AS(evaluation_to_extraction(t.g, t.m, a), BijectionError);
  }
}

TEST_CASE("minimizing an evaluation drops everything droppable") {
  Converted t;
  Evaluation all;
  all.value.assign(t.c.num_vertices(), 1);
  Evaluation m = minimize_evaluation(t.c, all);
  CHECK(is_valid_evaluation(t.c, m));
  CHECK(is_satisfying(t.c, m));
  CHECK(is_minimal(t.c, m));
  for (std::uint32_t v = 0; v < t.c.num_vertices(); ++v) {
    CHECK(m.value[v] <= all.value[v]);
  }
  CHECK(evaluation_cost(t.c, m) <= 4.0);
}
