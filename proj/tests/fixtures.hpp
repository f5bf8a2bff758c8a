#pragma once
// Hand-built instances shared by the test binaries.
//
// - square_root(): 4-node e-graph, classes A={sqrt,plus}, B={two}, C={zero};
//   sqrt needs B, plus needs A and C, costs all 1, root A. The optimal choice
//   is {A->sqrt, B->two} at cost 2; {A->plus, C->zero} closes a cycle A->A.
// - cheap_cycle_circuit(): small circuit whose cheapest satisfying
//   assignment is cyclic (cost 1) while the cheapest acyclic one costs 10.
// - cross_cycle_circuit(): a four-gate cycle p->c->q->d->p whose halves can
//   be processed on opposite sides of a join; cheapest cyclic assignment
//   costs 2, cheapest acyclic one costs 6.
// - six_cycle(): undirected 6-cycle, treewidth exactly 2.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>

#include "ecx/circuit.hpp"
#include "ecx/egraph.hpp"
#include "ecx/json_io.hpp"
#include "ecx/treewidth.hpp"

namespace fixtures {

inline const char* square_root_json() {
  return R"({
  "nodes": {
    "sqrt": {"op": "sqrt", "children": ["two"], "eclass": "A", "cost": 1},
    "plus": {"op": "+", "children": ["sqrt", "zero"], "eclass": "A", "cost": 1},
    "two":  {"op": "2", "children": [], "eclass": "B", "cost": 1},
    "zero": {"op": "0", "children": [], "eclass": "C", "cost": 1}
  },
  "root_eclasses": ["A"]
})";
}

inline ecx::EGraph square_root() { return ecx::parse_egraph(square_root_json()); }

/// The square-root graph with the sqrt branch deleted: the only member of the
/// root class depends on the root class itself, so every support is cyclic.
inline ecx::EGraph plus_only() {
  return ecx::parse_egraph(R"({
  "nodes": {
    "plus": {"op": "+", "children": ["plus", "zero"], "eclass": "A", "cost": 1},
    "zero": {"op": "0", "children": [], "eclass": "C", "cost": 1}
  },
  "root_eclasses": ["A"]
})");
}

/// Builds an extraction from (class id, node id) pairs.
inline ecx::Extraction choose(const ecx::EGraph& g,
                              std::initializer_list<std::pair<const char*, const char*>> picks) {
  ecx::Extraction x;
  for (auto& [cls, node] : picks) x.choice[*g.find_class(cls)] = *g.find_node(node);
  return x;
}

struct CheapCycle {
  ecx::Circuit circuit;
  std::uint32_t x_a = 0, a = 1, b = 2, y = 3, c = 4, z = 5;
};

/// Output b = AND(a, y); a = OR(x_a, c); c = AND(b, z) is the feedback path.
/// With z = 0 the feedback is dead and a needs the 9-cost x_a (acyclic cost
/// 10); with the free z = 1 the loop a->b->c->a supports itself at cost 1.
inline CheapCycle cheap_cycle_circuit() {
  ecx::CircuitBuilder b;
  std::uint32_t x_a = b.add_vertex(ecx::VertexKind::Input, 9.0);
  std::uint32_t a = b.add_vertex(ecx::VertexKind::Or);
  std::uint32_t bb = b.add_vertex(ecx::VertexKind::And);
  std::uint32_t y = b.add_vertex(ecx::VertexKind::Input, 1.0);
  std::uint32_t c = b.add_vertex(ecx::VertexKind::And);
  std::uint32_t z = b.add_vertex(ecx::VertexKind::Input, 0.0);
  b.add_edge(x_a, a);
  b.add_edge(c, a);  // a = OR(x_a, c)
  b.add_edge(a, bb);
  b.add_edge(y, bb);  // b = AND(a, y)
  b.add_edge(bb, c);
  b.add_edge(z, c);  // c = AND(b, z)
  b.mark_output(bb);
  return CheapCycle{b.build(), x_a, a, bb, y, c, z};
}

struct CrossCycle {
  ecx::Circuit circuit;
  // ORs p, q; ANDs c = p&s, d = q&t; edges c->q, d->p; output AND(p, q).
  std::uint32_t p = 0, q = 0, c = 0, d = 0, x = 0, y = 0, s = 0, t = 0, out = 0;
};

inline CrossCycle cross_cycle_circuit() {
  ecx::CircuitBuilder b;
  CrossCycle f;
  f.p = b.add_vertex(ecx::VertexKind::Or);
  f.q = b.add_vertex(ecx::VertexKind::Or);
  f.c = b.add_vertex(ecx::VertexKind::And);
  f.d = b.add_vertex(ecx::VertexKind::And);
  f.x = b.add_vertex(ecx::VertexKind::Input, 5.0);
  f.y = b.add_vertex(ecx::VertexKind::Input, 5.0);
  f.s = b.add_vertex(ecx::VertexKind::Input, 1.0);
  f.t = b.add_vertex(ecx::VertexKind::Input, 1.0);
  f.out = b.add_vertex(ecx::VertexKind::And);
  b.add_edge(f.x, f.p);
  b.add_edge(f.d, f.p);  // p = OR(x, d)
  b.add_edge(f.y, f.q);
  b.add_edge(f.c, f.q);  // q = OR(y, c)
  b.add_edge(f.p, f.c);
  b.add_edge(f.s, f.c);  // c = AND(p, s)
  b.add_edge(f.q, f.d);
  b.add_edge(f.t, f.d);  // d = AND(q, t)
  b.add_edge(f.p, f.out);
  b.add_edge(f.q, f.out);
  b.mark_output(f.out);
  f.circuit = b.build();
  return f;
}

inline ecx::UGraph six_cycle() {
  ecx::UGraph g;
  g.adj.assign(6, {});
  for (std::uint32_t v = 0; v < 6; ++v) {
    std::uint32_t w = (v + 1) % 6;
    g.adj[v].push_back(w);
    g.adj[w].push_back(v);
  }
  for (auto& l : g.adj) std::sort(l.begin(), l.end());
  return g;
}

}  // namespace fixtures
