#include "ecx/circuit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <set>

namespace ecx {

std::uint32_t CircuitBuilder::add_vertex(VertexKind kind, double cost) {
  std::uint32_t v = static_cast<std::uint32_t>(c_.kind_.size());
  c_.kind_.push_back(kind);
  c_.cost_.push_back(cost);
  c_.in_.emplace_back();
  c_.out_.emplace_back();
  c_.output_flag_.push_back(0);
  return v;
}

void CircuitBuilder::add_edge(std::uint32_t src, std::uint32_t dst) {
  if (src >= c_.kind_.size() || dst >= c_.kind_.size())
    throw CircuitError("edge endpoint out of range");
  c_.out_[src].push_back(dst);
  c_.in_[dst].push_back(src);
  ++c_.num_edges_;
}

void CircuitBuilder::mark_output(std::uint32_t v) {
  if (v >= c_.kind_.size()) throw CircuitError("output vertex out of range");
  if (!c_.output_flag_[v]) {
    c_.output_flag_[v] = 1;
    c_.outputs_.push_back(v);
  }
}

Circuit CircuitBuilder::build() {
  for (auto& l : c_.in_) std::sort(l.begin(), l.end());
  for (auto& l : c_.out_) std::sort(l.begin(), l.end());
  c_.validate();
  return std::move(c_);
}

void Circuit::validate() const {
  for (std::uint32_t v = 0; v < kind_.size(); ++v) {
    for (std::uint32_t w : in_[v]) {
      if (w >= kind_.size()) throw CircuitError("edge endpoint out of range");
      if (w == v) throw CircuitError("self-loop on vertex " + std::to_string(v));
    }
    if (std::adjacent_find(in_[v].begin(), in_[v].end()) != in_[v].end())
      throw CircuitError("parallel edge into vertex " + std::to_string(v));
    if (kind_[v] == VertexKind::Input) {
      if (!in_[v].empty()) throw CircuitError("input vertex " + std::to_string(v) + " has in-edges");
      if (cost_[v] < 0.0 || !std::isfinite(cost_[v]))
        throw CircuitError("negative or non-finite cost on input " + std::to_string(v));
    } else if (cost_[v] != 0.0) {
      throw CircuitError("cost on gate vertex " + std::to_string(v));
    }
  }
  std::size_t edges = 0;
  for (const auto& l : in_) edges += l.size();
  if (edges != num_edges_) throw CircuitError("edge count mismatch");
}

std::pair<Circuit, NodeMap> egraph_to_circuit(const EGraph& g) {
  const std::size_t n = g.num_nodes();
  const std::size_t k = g.num_classes();
  CircuitBuilder b;
  NodeMap m;
  m.x_of.resize(n);
  m.and_of.resize(n);
  m.or_of.resize(k);
  for (std::uint32_t u = 0; u < n; ++u)
    m.x_of[u] = b.add_vertex(VertexKind::Input, g.node(u).cost);
  for (std::uint32_t u = 0; u < n; ++u) m.and_of[u] = b.add_vertex(VertexKind::And);
  for (std::uint32_t c = 0; c < k; ++c) m.or_of[c] = b.add_vertex(VertexKind::Or);

  for (std::uint32_t u = 0; u < n; ++u) {
    b.add_edge(m.x_of[u], m.and_of[u]);
    b.add_edge(m.and_of[u], m.or_of[g.node(u).cls]);
    for (ClassIdx d : g.node(u).deps) b.add_edge(m.or_of[d], m.and_of[u]);
  }
  for (ClassIdx c : g.roots()) b.mark_output(m.or_of[c]);

  m.info.resize(2 * n + k);
  for (std::uint32_t u = 0; u < n; ++u) {
    m.info[m.x_of[u]] = {NodeMap::Role::Variable, u};
    m.info[m.and_of[u]] = {NodeMap::Role::NodeAnd, u};
  }
  for (std::uint32_t c = 0; c < k; ++c) m.info[m.or_of[c]] = {NodeMap::Role::ClassOr, c};
  return {b.build(), std::move(m)};
}

bool is_valid_evaluation(const Circuit& c, const Evaluation& a) {
  if (a.value.size() != c.num_vertices()) return false;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    if (a.value[v] > 1) return false;
    if (c.kind(v) == VertexKind::Input) continue;
    bool want;
    if (c.kind(v) == VertexKind::And) {
      want = true;
      for (std::uint32_t w : c.in(v)) want = want && a.truth(w);
    } else {
      want = false;
      for (std::uint32_t w : c.in(v)) want = want || a.truth(w);
    }
    if (want != a.truth(v)) return false;
  }
  return true;
}

bool is_satisfying(const Circuit& c, const Evaluation& a) {
  for (std::uint32_t v : c.outputs())
    if (!a.truth(v)) return false;
  return true;
}

bool is_acyclic_evaluation(const Circuit& c, const Evaluation& a) {
  // Kahn's algorithm on the subgraph induced by true vertices.
  std::vector<std::uint32_t> indeg(c.num_vertices(), 0);
  std::size_t live = 0;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    if (!a.truth(v)) continue;
    ++live;
    for (std::uint32_t w : c.in(v))
      if (a.truth(w)) ++indeg[v];
  }
  std::vector<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (a.truth(v) && indeg[v] == 0) queue.push_back(v);
  std::size_t removed = 0;
  while (!queue.empty()) {
    std::uint32_t v = queue.back();
    queue.pop_back();
    ++removed;
    for (std::uint32_t w : c.out(v))
      if (a.truth(w) && --indeg[w] == 0) queue.push_back(w);
  }
  return removed == live;
}

double evaluation_cost(const Circuit& c, const Evaluation& a) {
  double total = 0.0;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (c.kind(v) == VertexKind::Input && a.truth(v)) total += c.cost(v);
  return total;
}

FixpointResult evaluate_from_inputs(const Circuit& c, const std::vector<std::uint8_t>& inputs) {
  FixpointResult r;
  r.evaluation.value.assign(c.num_vertices(), 0);
  std::vector<std::uint32_t> cnt(c.num_vertices(), 0);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    if (c.kind(v) == VertexKind::Input) {
      if (v < inputs.size() && inputs[v]) {
        r.evaluation.value[v] = 1;
        queue.push_back(v);
      }
    } else if (c.kind(v) == VertexKind::And && c.in(v).empty()) {
      r.evaluation.value[v] = 1;  // empty conjunction
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    std::uint32_t v = queue.back();
    queue.pop_back();
    for (std::uint32_t u : c.out(v)) {
      if (r.evaluation.value[u]) continue;
      bool fire = c.kind(u) == VertexKind::Or || ++cnt[u] == c.in(u).size();
      if (fire) {
        r.evaluation.value[u] = 1;
        queue.push_back(u);
      }
    }
  }
  r.acyclic = is_acyclic_evaluation(c, r.evaluation);
  return r;
}

namespace {

// Shared machinery for is_minimal and minimize_evaluation. A droppable set D
// of true vertices (a set whose removal leaves a smaller valid evaluation)
// obeys, for every true vertex: an AND gate is in D iff some true in-neighbor
// is, an OR gate is in D iff all true in-neighbors are; inputs are free.

// Least such D containing `seeds`, as a 0/1 vector over vertices.
std::vector<std::uint8_t> drop_cascade(const Circuit& c, const Evaluation& a,
                                       const std::vector<std::uint32_t>& seeds) {
  std::vector<std::uint8_t> in_d(c.num_vertices(), 0);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t s : seeds) {
    if (!in_d[s]) {
      in_d[s] = 1;
      queue.push_back(s);
    }
  }
  auto forced = [&](std::uint32_t u) {
    if (c.kind(u) == VertexKind::And) {
      for (std::uint32_t w : c.in(u))
        if (a.truth(w) && in_d[w]) return true;
      return false;
    }
    for (std::uint32_t w : c.in(u))
      if (a.truth(w) && !in_d[w]) return false;
    return true;
  };
  while (!queue.empty()) {
    std::uint32_t v = queue.back();
    queue.pop_back();
    for (std::uint32_t u : c.out(v)) {
      if (!a.truth(u) || in_d[u] || c.kind(u) == VertexKind::Input) continue;
      if (forced(u)) {
        in_d[u] = 1;
        queue.push_back(u);
      }
    }
  }
  return in_d;
}

bool hits_output(const Circuit& c, const std::vector<std::uint8_t>& set) {
  for (std::uint32_t v : c.outputs())
    if (set[v]) return true;
  return false;
}

// Searches for a non-empty droppable set consisting of gates only, avoiding
// every vertex in `excluded`. Branching happens only when the candidate set
// would force an excluded OR gate to drop with it (each branch pins one of
// that gate's true in-neighbors as kept).
std::vector<std::uint8_t> find_gate_cluster(const Circuit& c, const Evaluation& a,
                                            std::vector<std::uint8_t> excluded) {
  // Exclusion closure: a kept AND keeps all of its true in-neighbors.
  std::vector<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (excluded[v]) queue.push_back(v);
  while (!queue.empty()) {
    std::uint32_t v = queue.back();
    queue.pop_back();
    if (c.kind(v) != VertexKind::And || !a.truth(v)) continue;
    for (std::uint32_t w : c.in(v)) {
      if (a.truth(w) && !excluded[w]) {
        excluded[w] = 1;
        queue.push_back(w);
      }
    }
  }

  // Greatest self-consistent candidate set below the exclusions.
  std::vector<std::uint8_t> in_m(c.num_vertices(), 0);
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    in_m[v] = a.truth(v) && !excluded[v] && c.kind(v) != VertexKind::Input;
  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
      if (!in_m[v]) continue;
      bool keep;
      if (c.kind(v) == VertexKind::And) {
        keep = false;
        for (std::uint32_t w : c.in(v))
          if (a.truth(w) && in_m[w]) keep = true;
      } else {
        keep = true;
        for (std::uint32_t w : c.in(v))
          if (a.truth(w) && !in_m[w]) keep = false;
      }
      if (!keep) {
        in_m[v] = 0;
        shrunk = true;
      }
    }
  }
  bool empty = true;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (in_m[v]) empty = false;
  if (empty) return {};

  // The candidate may not force an excluded OR gate; otherwise some member of
  // that gate's support must be kept instead, and we try each in turn.
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    if (!excluded[v] || !a.truth(v) || c.kind(v) != VertexKind::Or) continue;
    bool all_dropped = true;
    for (std::uint32_t w : c.in(v))
      if (a.truth(w) && !in_m[w]) all_dropped = false;
    if (!all_dropped) continue;
    for (std::uint32_t w : c.in(v)) {
      if (!a.truth(w) || !in_m[w]) continue;
      std::vector<std::uint8_t> branch = excluded;
      branch[w] = 1;
      auto r = find_gate_cluster(c, a, std::move(branch));
      if (!r.empty()) return r;
    }
    return {};
  }
  return in_m;
}

std::vector<std::uint8_t> base_exclusions(const Circuit& c, const Evaluation& a) {
  std::vector<std::uint8_t> excluded(c.num_vertices(), 0);
  for (std::uint32_t v : c.outputs()) excluded[v] = 1;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (c.kind(v) == VertexKind::Input && a.truth(v)) excluded[v] = 1;
  return excluded;
}

}  // namespace

bool is_minimal(const Circuit& c, const Evaluation& a) {
  if (!is_valid_evaluation(c, a) || !is_satisfying(c, a)) return false;
  for (std::uint32_t x = 0; x < c.num_vertices(); ++x) {
    if (c.kind(x) != VertexKind::Input || !a.truth(x)) continue;
    if (!hits_output(c, drop_cascade(c, a, {x}))) return false;
  }
  return find_gate_cluster(c, a, base_exclusions(c, a)).empty();
}

Evaluation minimize_evaluation(const Circuit& c, const Evaluation& a) {
  Evaluation cur = a;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t x = 0; x < c.num_vertices(); ++x) {
      if (c.kind(x) != VertexKind::Input || !cur.truth(x)) continue;
      auto d = drop_cascade(c, cur, {x});
      if (hits_output(c, d)) continue;
      for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
        if (d[v]) cur.value[v] = 0;
      changed = true;
    }
    auto cluster = find_gate_cluster(c, cur, base_exclusions(c, cur));
    if (!cluster.empty()) {
      for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
        if (cluster[v]) cur.value[v] = 0;
      changed = true;
    }
  }
  assert(is_valid_evaluation(c, cur));
  return cur;
}

Evaluation extraction_to_evaluation(const EGraph& g, const NodeMap& m, const Extraction& x) {
  Evaluation a;
  a.value.assign(2 * g.num_nodes() + g.num_classes(), 0);
  for (const auto& [c, u] : x.choice) {
    a.value[m.x_of[u]] = 1;
    a.value[m.and_of[u]] = 1;
    a.value[m.or_of[c]] = 1;
  }
  return a;
}

Extraction evaluation_to_extraction(const EGraph& g, const NodeMap& m, const Evaluation& a) {
  Extraction x;
  for (std::uint32_t u = 0; u < g.num_nodes(); ++u) {
    if (!a.truth(m.and_of[u])) continue;
    ClassIdx c = g.node(u).cls;
    auto [it, fresh] = x.choice.emplace(c, u);
    (void)it;
    if (!fresh)
      throw BijectionError("two true AND gates in class " + g.class_id(c));
  }
  return x;
}

}  // namespace ecx
