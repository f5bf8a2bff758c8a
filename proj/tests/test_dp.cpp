#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <string>

#include "ecx/dp.hpp"
#include "ecx/generator.hpp"
#include "ecx/oracle.hpp"
#include "ecx/treewidth.hpp"
#include "fixtures.hpp"

using namespace ecx;

namespace {

struct Prepared {
  Circuit circuit;
  std::uint32_t out = 0;
  NiceTree nice;
};

Prepared prepare(const Circuit& c0, EliminationHeuristic h = EliminationHeuristic::MinDegree) {
  Prepared p;
  auto [c, out] = add_output_gate(c0);
  p.circuit = std::move(c);
  p.out = out;
  p.nice = to_nice(tree_decomposition(underlying_graph(p.circuit), h), out);
  return p;
}

/// Bottom-up construction of hand-made nice trees; parent links are filled as
/// bags are attached.
struct TreeBuilder {
  NiceTree nt;

  std::uint32_t add(BagKind k, std::vector<std::uint32_t> verts, std::uint32_t special,
                    std::vector<std::uint32_t> children) {
    std::sort(verts.begin(), verts.end());
    auto id = static_cast<std::uint32_t>(nt.bags.size());
    NiceBag b;
    b.kind = k;
    b.vertices = std::move(verts);
    b.special = special;
    b.children = std::move(children);
    for (auto ch : b.children) nt.bags[ch].parent = id;
    nt.bags.push_back(std::move(b));
    return id;
  }
  std::uint32_t leaf() { return add(BagKind::Leaf, {}, kNoVertex, {}); }
  std::uint32_t ins(std::uint32_t child, std::vector<std::uint32_t> verts, std::uint32_t v) {
    return add(BagKind::Insert, std::move(verts), v, {child});
  }
  std::uint32_t fog(std::uint32_t child, std::vector<std::uint32_t> verts, std::uint32_t v) {
    return add(BagKind::Forget, std::move(verts), v, {child});
  }
  NiceTree finish(std::uint32_t root) {
    nt.root = root;
    return std::move(nt);
  }
};

}  // namespace

TEST_CASE("the square-root instance solves to its known optimum") {
  EGraph g = fixtures::square_root();
  auto [c0, m] = egraph_to_circuit(g);
  Prepared p = prepare(c0);

  auto r = run_dp(p.circuit, p.nice, p.out);
  REQUIRE(r);
  CHECK(r->cost == 2.0);
  CHECK(r->acyclic);
  CHECK(r->stats.bags == p.nice.bags.size());
  CHECK(r->stats.peak_table >= 1);

  Evaluation e;
  e.value.assign(r->evaluation.value.begin(), r->evaluation.value.begin() + c0.num_vertices());
  CHECK(is_valid_evaluation(c0, e));
  CHECK(is_satisfying(c0, e));
  Extraction x = evaluation_to_extraction(g, m, e);
  CHECK(x.choice == fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}}).choice);
}

TEST_CASE("purely cyclic support is found only without enforcement") {
  auto [c0, m] = egraph_to_circuit(fixtures::plus_only());
  Prepared p = prepare(c0);

  CHECK(!run_dp(p.circuit, p.nice, p.out));

  DpOptions loose;
  loose.enforce_acyclic = false;
  auto r = run_dp(p.circuit, p.nice, p.out, loose);
  REQUIRE(r);
  CHECK(r->cost == 2.0);
  CHECK(!r->acyclic);
}

TEST_CASE("a feedback loop is priced by the enforcement mode") {
  fixtures::CheapCycle f = fixtures::cheap_cycle_circuit();
  Prepared p = prepare(f.circuit);

  auto strict = run_dp(p.circuit, p.nice, p.out);
  REQUIRE(strict);
  CHECK(strict->cost == 10.0);
  CHECK(strict->acyclic);

  DpOptions loose;
  loose.enforce_acyclic = false;
  auto r = run_dp(p.circuit, p.nice, p.out, loose);
  REQUIRE(r);
  CHECK(r->cost == 1.0);
}

TEST_CASE("reachability summaries reject a cycle split across a join") {
  // The p->c->q->d->p cycle is laid out so c lives in the left subtree and d
  // in the right one: neither side sees the cycle locally, only the union of
  // reachability closures at the join can.
  fixtures::CrossCycle f = fixtures::cross_cycle_circuit();
  auto [c, u_out] = add_output_gate(f.circuit);
  const std::uint32_t out = f.out;

  TreeBuilder tb;
  auto l0 = tb.leaf();
  auto l1 = tb.ins(l0, {out}, out);
  auto l2 = tb.ins(l1, {out, f.p}, f.p);
  auto l3 = tb.ins(l2, {out, f.p, f.q}, f.q);
  auto l4 = tb.ins(l3, {out, f.p, f.q, f.c}, f.c);
  auto l5 = tb.ins(l4, {out, f.p, f.q, f.c, f.s}, f.s);
  auto l6 = tb.ins(l5, {out, f.p, f.q, f.c, f.s, f.x}, f.x);
  auto l7 = tb.fog(l6, {out, f.p, f.q, f.c, f.s}, f.x);
  auto l8 = tb.fog(l7, {out, f.p, f.q, f.c}, f.s);
  auto left = tb.fog(l8, {out, f.p, f.q}, f.c);

  auto r0 = tb.leaf();
  auto r1 = tb.ins(r0, {out}, out);
  auto r2 = tb.ins(r1, {out, f.p}, f.p);
  auto r3 = tb.ins(r2, {out, f.p, f.q}, f.q);
  auto r4 = tb.ins(r3, {out, f.p, f.q, f.d}, f.d);
  auto r5 = tb.ins(r4, {out, f.p, f.q, f.d, f.t}, f.t);
  auto r6 = tb.ins(r5, {out, f.p, f.q, f.d, f.t, f.y}, f.y);
  auto r7 = tb.fog(r6, {out, f.p, f.q, f.d, f.t}, f.y);
  auto r8 = tb.fog(r7, {out, f.p, f.q, f.d}, f.t);
  auto right = tb.fog(r8, {out, f.p, f.q}, f.d);

  auto j = tb.add(BagKind::Join, {out, f.p, f.q}, kNoVertex, {left, right});
  auto f1 = tb.fog(j, {out, f.p}, f.q);
  auto f2 = tb.fog(f1, {out}, f.p);
  auto i1 = tb.ins(f2, {out, u_out}, u_out);
  auto root = tb.fog(i1, {u_out}, out);
  NiceTree nt = tb.finish(root);

  std::string why;
  REQUIRE_MESSAGE(validate_nice(underlying_graph(c), nt, u_out, &why), why);

  auto strict = run_dp(c, nt, u_out);
  REQUIRE(strict);
  CHECK(strict->cost == 6.0);
  CHECK(strict->acyclic);
  CHECK(is_acyclic_evaluation(c, strict->evaluation));

  DpOptions loose;
  loose.enforce_acyclic = false;
  auto r = run_dp(c, nt, u_out, loose);
  REQUIRE(r);
  CHECK(r->cost == 2.0);
  CHECK(!is_acyclic_evaluation(c, r->evaluation));
}

TEST_CASE("justification flags in the key are load-bearing") {
  // r = OR(a, b) with a cheap and b expensive; the tree inserts a, forgets
  // it, then inserts b. The summary where r is true but not yet justified
  // must stay separate from the justified one: merging them (the flagless
  // key) loses the cheap justified entry and misprices the instance.
  CircuitBuilder cb;
  auto a = cb.add_vertex(VertexKind::Input, 1.0);
  auto b = cb.add_vertex(VertexKind::Input, 5.0);
  auto r = cb.add_vertex(VertexKind::Or);
  cb.add_edge(a, r);
  cb.add_edge(b, r);
  cb.mark_output(r);
  auto [c, u_out] = add_output_gate(cb.build());

  TreeBuilder tb;
  auto t0 = tb.leaf();
  auto t1 = tb.ins(t0, {u_out}, u_out);
  auto t2 = tb.ins(t1, {u_out, r}, r);
  auto t3 = tb.ins(t2, {u_out, r, a}, a);
  auto t4 = tb.fog(t3, {u_out, r}, a);
  auto t5 = tb.ins(t4, {u_out, r, b}, b);
  auto t6 = tb.fog(t5, {u_out, r}, b);
  auto root = tb.fog(t6, {u_out}, r);
  NiceTree nt = tb.finish(root);

  std::string why;
  REQUIRE_MESSAGE(validate_nice(underlying_graph(c), nt, u_out, &why), why);

  auto good = run_dp(c, nt, u_out);
  REQUIRE(good);
  CHECK(good->cost == 1.0);

  DpOptions shortcut;
  shortcut.known_flags_in_key = false;
  auto bad = run_dp(c, nt, u_out, shortcut);
  CHECK((!bad || bad->cost != 1.0));
}

TEST_CASE("chains solve to the closed-form optimum") {
  for (std::size_t n : {std::size_t{10}, std::size_t{50}}) {
    EGraph g = chain_egraph(n);
    auto [c0, m] = egraph_to_circuit(g);
    Prepared p = prepare(c0);
    auto r = run_dp(p.circuit, p.nice, p.out);
    REQUIRE(r);
    CHECK(r->cost == double(n - (n + 2) / 3));
  }
}

TEST_CASE("thread count never changes the answer") {
  std::mt19937_64 rng(64);
  EGraphGenOptions gopts;
  gopts.max_classes = 14;
  for (int i = 0; i < 12; ++i) {
    EGraph g = random_egraph(rng, gopts);
    auto [c0, m] = egraph_to_circuit(g);
    Prepared p = prepare(c0);
    for (bool enforce : {true, false}) {
      DpOptions serial;
      serial.enforce_acyclic = enforce;
      serial.num_threads = 1;
      DpOptions wide = serial;
      wide.num_threads = 4;
      auto rs = run_dp(p.circuit, p.nice, p.out, serial);
      auto rw = run_dp(p.circuit, p.nice, p.out, wide);
      REQUIRE(rs.has_value() == rw.has_value());
      if (rs) {
        CHECK(rs->cost == rw->cost);
        CHECK(rs->evaluation.value == rw->evaluation.value);
      }
    }
  }
}

TEST_CASE("retained tables expose the summaries") {
  auto [c0, m] = egraph_to_circuit(fixtures::square_root());
  Prepared p = prepare(c0);
  DpOptions opts;
  opts.keep_tables = true;
  DpEngine eng(p.circuit, p.nice, p.out, opts);
  auto r = eng.run();
  REQUIRE(r);
  CHECK(eng.num_bags() == p.nice.bags.size());

  // The root bag {out} holds a cheapest "out is true" summary; pick it the
  // way run() does.
  std::uint32_t root = p.nice.root;
  REQUIRE(eng.table_size(root) >= 1);
  std::uint32_t best = UINT32_MAX;
  for (std::uint32_t i = 0; i < eng.table_size(root); ++i) {
    auto e = eng.entry(root, i);
    if ((e.values & 1) == 0) continue;
    if (best == UINT32_MAX || e.cost < eng.entry(root, best).cost) best = i;
  }
  REQUIRE(best != UINT32_MAX);
  auto top = eng.entry(root, best);
  CHECK(top.cost == r->cost);
  CHECK((top.justified & 1) == 1);
  CHECK(!top.reach.empty());

  // The subtree below the root has decided every vertex, and the decisions
  // are the reported optimum assignment.
  auto partial = eng.partial_assignment(root, best);
  REQUIRE(partial.size() == p.circuit.num_vertices());
  for (std::uint32_t v = 0; v < partial.size(); ++v) {
    CHECK(partial[v] == std::int8_t(r->evaluation.value[v]));
  }

  // A leaf has one empty summary with nothing decided.
  for (std::uint32_t bag = 0; bag < eng.num_bags(); ++bag) {
    if (eng.bag(bag).kind != BagKind::Leaf) continue;
    REQUIRE(eng.table_size(bag) == 1);
    auto leaf_partial = eng.partial_assignment(bag, 0);
    CHECK(std::all_of(leaf_partial.begin(), leaf_partial.end(),
                      [](std::int8_t x) { return x == -1; }));
    break;
  }
}

TEST_CASE("a cancellation hook abandons the walk") {
  auto [c0, m] = egraph_to_circuit(fixtures::square_root());
  Prepared p = prepare(c0);
  DpOptions opts;
  opts.cancelled = [] { return true; };
  CHECK_THROWS_AS(run_dp(p.circuit, p.nice, p.out, opts), DpCancelled);
}

TEST_CASE("the appended output gate rewires only the outputs") {
  CircuitBuilder b;
  auto x1 = b.add_vertex(VertexKind::Input, 1.0);
  auto x2 = b.add_vertex(VertexKind::Input, 2.0);
  auto g1 = b.add_vertex(VertexKind::And);
  auto g2 = b.add_vertex(VertexKind::And);
  b.add_edge(x1, g1);
  b.add_edge(x2, g2);
  b.mark_output(g1);
  b.mark_output(g2);
  Circuit c0 = b.build();

  auto [c, u] = add_output_gate(c0);
  CHECK(u == c0.num_vertices());
  CHECK(c.num_vertices() == c0.num_vertices() + 1);
  CHECK(c.kind(u) == VertexKind::And);
  CHECK(c.outputs() == std::vector<std::uint32_t>{u});
  CHECK(c.in(u) == std::vector<std::uint32_t>{g1, g2});
  CHECK(!c.is_output(g1));
  CHECK(!c.is_output(g2));
}
