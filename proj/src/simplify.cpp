#include "ecx/simplify.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <set>

namespace ecx {
namespace {

constexpr std::uint32_t kGone = UINT32_MAX;
constexpr int kPathDepthCap = 64;
constexpr double kCostTol = 1e-9;

/// Mutable view of a circuit with stable vertex indices: original vertices
/// keep their ids, Factoring appends fresh ones, removed ones stay as holes
/// until the final compaction.
struct Work {
  std::vector<VertexKind> kind;
  std::vector<double> cost;
  std::vector<std::set<std::uint32_t>> in, out;
  std::vector<char> alive;
  std::vector<char> is_out;
  // Original Input vertex -> working vertex currently carrying it, or -1
  // once pinned to 0. Entries at gate positions are unused.
  std::vector<std::int64_t> prov;
  // Factoring hubs already rewritten this run; never rewritten twice.
  std::vector<char> factored;

  explicit Work(const Circuit& c) {
    std::size_t n = c.num_vertices();
    kind.reserve(n);
    cost.reserve(n);
    in.resize(n);
    out.resize(n);
    alive.assign(n, 1);
    is_out.assign(n, 0);
    prov.assign(n, -1);
    factored.assign(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
      kind.push_back(c.kind(v));
      cost.push_back(c.cost(v));
      in[v].insert(c.in(v).begin(), c.in(v).end());
      out[v].insert(c.out(v).begin(), c.out(v).end());
      if (c.kind(v) == VertexKind::Input) prov[v] = v;
    }
    for (std::uint32_t v : c.outputs()) is_out[v] = 1;
  }

  std::size_t size() const { return kind.size(); }

  std::uint32_t add_vertex(VertexKind k, double c) {
    kind.push_back(k);
    cost.push_back(c);
    in.emplace_back();
    out.emplace_back();
    alive.push_back(1);
    is_out.push_back(0);
    prov.push_back(-1);
    factored.push_back(0);
    return static_cast<std::uint32_t>(kind.size() - 1);
  }

  void add_edge(std::uint32_t s, std::uint32_t d) {
    out[s].insert(d);
    in[d].insert(s);
  }

  void remove_edge(std::uint32_t s, std::uint32_t d) {
    out[s].erase(d);
    in[d].erase(s);
  }

  bool has_edge(std::uint32_t s, std::uint32_t d) const { return out[s].count(d) != 0; }

  /// Moves every provenance entry currently at `from` to `to` (-1 pins it),
  /// recording the moves.
  void move_provenance(std::uint32_t from, std::int64_t to, RewriteRecord& rec) {
    for (std::uint32_t o = 0; o < prov.size(); ++o) {
      if (prov[o] == static_cast<std::int64_t>(from)) {
        prov[o] = to;
        rec.provenance.emplace_back(o, to);
      }
    }
  }
};

std::size_t pass_remove_unreachable(Work& w, RewriteLog& log) {
  std::vector<char> keep(w.size(), 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t v = 0; v < w.size(); ++v) {
    if (w.alive[v] && w.is_out[v]) {
      keep[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    for (std::uint32_t s : w.in[v]) {
      if (w.alive[s] && !keep[s]) {
        keep[s] = 1;
        stack.push_back(s);
      }
    }
  }
  std::vector<std::uint32_t> doomed;
  for (std::uint32_t v = 0; v < w.size(); ++v) {
    if (w.alive[v] && !keep[v]) doomed.push_back(v);
  }
  if (doomed.empty()) return 0;

  // Deleting a vertex erases its gate equation, and equations can force
  // truth: a dead-end gate cluster ignited by true live vertices still has to
  // switch on exactly as its operations dictate. Removal is transparent only
  // when that worst-case forced region is cycle-free — then any evaluation of
  // the shrunken circuit extends over the cluster (inputs off, gates at their
  // forced values) without creating a true cycle. Compute the forced region
  // assuming every kept vertex true and every doomed input false.
  std::vector<char> doomed_mask(w.size(), 0);
  for (std::uint32_t v : doomed) doomed_mask[v] = 1;
  std::vector<char> forced(w.size(), 0);
  std::vector<std::uint32_t> need(w.size(), 0);
  std::vector<std::uint32_t> fire;
  for (std::uint32_t v : doomed) {
    if (w.kind[v] == VertexKind::Input) continue;
    std::uint32_t pending = 0;
    bool dead_in = false;
    bool lit = false;
    for (std::uint32_t s : w.in[v]) {
      if (!doomed_mask[s]) {
        lit = true;
        continue;
      }
      ++pending;
      if (w.kind[s] == VertexKind::Input) dead_in = true;
    }
    if (w.kind[v] == VertexKind::And) {
      need[v] = dead_in ? UINT32_MAX : pending;
    } else {
      need[v] = lit ? 0 : UINT32_MAX;
    }
    if (need[v] == 0) {
      forced[v] = 1;
      fire.push_back(v);
    }
  }
  for (std::size_t fi = 0; fi < fire.size(); ++fi) {
    for (std::uint32_t t : w.out[fire[fi]]) {
      if (!doomed_mask[t] || forced[t] || w.kind[t] == VertexKind::Input) continue;
      if (w.kind[t] == VertexKind::And) {
        if (need[t] == UINT32_MAX || --need[t] != 0) continue;
      }
      forced[t] = 1;
      fire.push_back(t);
    }
  }
  // Kahn peel over the forced region; leftovers mean a forced true cycle.
  std::vector<std::uint32_t> indeg(w.size(), 0);
  for (std::uint32_t v : fire) {
    for (std::uint32_t t : w.out[v]) {
      if (forced[t]) ++indeg[t];
    }
  }
  std::vector<std::uint32_t> peel;
  for (std::uint32_t v : fire) {
    if (indeg[v] == 0) peel.push_back(v);
  }
  for (std::size_t pi = 0; pi < peel.size(); ++pi) {
    for (std::uint32_t t : w.out[peel[pi]]) {
      if (forced[t] && --indeg[t] == 0) peel.push_back(t);
    }
  }

  std::vector<std::uint32_t> removing;
  if (peel.size() == fire.size()) {
    removing = doomed;
  } else {
    // The cluster can force a true cycle; trim only dead ends. No equation
    // references a vertex without out-edges, so dropping those is always
    // transparent, and the cycle itself survives to constrain the optimum.
    std::vector<std::uint32_t> outdeg(w.size(), 0);
    std::vector<char> queued(w.size(), 0);
    for (std::uint32_t v : doomed) {
      outdeg[v] = static_cast<std::uint32_t>(w.out[v].size());
      if (outdeg[v] == 0) {
        queued[v] = 1;
        removing.push_back(v);
      }
    }
    for (std::size_t ri = 0; ri < removing.size(); ++ri) {
      for (std::uint32_t s : w.in[removing[ri]]) {
        if (doomed_mask[s] && !queued[s] && --outdeg[s] == 0) {
          queued[s] = 1;
          removing.push_back(s);
        }
      }
    }
    if (removing.empty()) return 0;
  }

  RewriteRecord rec;
  rec.rule = RuleId::RemoveUnreachable;
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t v : removing) {
    for (std::uint32_t s : w.in[v]) edges.emplace(s, v);
    for (std::uint32_t t : w.out[v]) edges.emplace(v, t);
  }
  rec.removed_edges.assign(edges.begin(), edges.end());
  for (auto [s, d] : rec.removed_edges) w.remove_edge(s, d);
  for (std::uint32_t v : removing) {
    rec.removed_vertices.push_back(v);
    if (w.kind[v] == VertexKind::Input) w.move_provenance(v, -1, rec);
    w.alive[v] = 0;
  }
  log.push_back(std::move(rec));
  return 1;
}

std::size_t pass_contract_indegree_one(Work& w, RewriteLog& log) {
  std::size_t fired = 0;
  std::vector<char> used(w.size(), 0);
  std::size_t bound = w.size();
  for (std::uint32_t u = 0; u < bound; ++u) {
    if (!w.alive[u] || w.kind[u] == VertexKind::Input || w.in[u].size() != 1) continue;
    std::uint32_t v = *w.in[u].begin();
    if (used[u] || used[v]) continue;
    if (w.has_edge(u, v)) continue;  // contracting would close a self-loop

    RewriteRecord rec;
    rec.rule = RuleId::ContractIndegreeOne;
    rec.removed_edges.emplace_back(v, u);
    w.remove_edge(v, u);
    std::vector<std::uint32_t> succs(w.out[u].begin(), w.out[u].end());
    for (std::uint32_t t : succs) {
      rec.removed_edges.emplace_back(u, t);
      w.remove_edge(u, t);
      if (!w.has_edge(v, t)) {
        rec.added_edges.emplace_back(v, t);
        w.add_edge(v, t);
      }
    }
    if (w.is_out[u] && !w.is_out[v]) {
      w.is_out[v] = 1;
      rec.marked_output.push_back(v);
    }
    w.is_out[u] = 0;
    w.alive[u] = 0;
    rec.removed_vertices.push_back(u);
    used[u] = used[v] = 1;
    ++fired;
    log.push_back(std::move(rec));
  }
  return fired;
}

std::size_t pass_contract_same_gate(Work& w, RewriteLog& log) {
  std::size_t fired = 0;
  std::vector<char> used(w.size(), 0);
  std::size_t bound = w.size();
  for (std::uint32_t v = 0; v < bound; ++v) {
    if (!w.alive[v] || w.kind[v] == VertexKind::Input || w.out[v].size() != 1) continue;
    // An output gate cannot be absorbed into its consumer: the consumer's
    // truth is a stricter (AND) or looser (OR) condition than the gate's own,
    // and the output obligation must keep its exact meaning.
    if (w.is_out[v]) continue;
    std::uint32_t u = *w.out[v].begin();
    if (w.kind[u] != w.kind[v]) continue;
    if (used[v] || used[u]) continue;
    if (w.has_edge(u, v)) continue;  // contracting would close a self-loop

    RewriteRecord rec;
    rec.rule = RuleId::ContractSameGate;
    rec.removed_edges.emplace_back(v, u);
    w.remove_edge(v, u);
    std::vector<std::uint32_t> preds(w.in[v].begin(), w.in[v].end());
    for (std::uint32_t s : preds) {
      rec.removed_edges.emplace_back(s, v);
      w.remove_edge(s, v);
      if (!w.has_edge(s, u)) {
        rec.added_edges.emplace_back(s, u);
        w.add_edge(s, u);
      }
    }
    if (w.is_out[v] && !w.is_out[u]) {
      w.is_out[u] = 1;
      rec.marked_output.push_back(u);
    }
    w.is_out[v] = 0;
    w.alive[v] = 0;
    rec.removed_vertices.push_back(v);
    used[v] = used[u] = 1;
    ++fired;
    log.push_back(std::move(rec));
  }
  return fired;
}

std::size_t pass_same_gate_no_shortcut(Work& w, RewriteLog& log) {
  std::size_t fired = 0;
  std::vector<char> used(w.size(), 0);
  std::vector<std::uint32_t> seen(w.size(), 0);
  std::uint32_t stamp = 0;
  std::size_t bound = w.size();
  for (std::uint32_t v = 0; v < bound; ++v) {
    if (!w.alive[v] || w.kind[v] == VertexKind::Input || used[v]) continue;
    std::vector<std::uint32_t> succs(w.out[v].begin(), w.out[v].end());
    for (std::uint32_t u : succs) {
      if (w.kind[u] != w.kind[v] || used[u] || used[v]) continue;
      // Breadth-first search for a parallel path v -> ... -> u whose interior
      // vertices all carry the same gate tag, capped in depth.
      ++stamp;
      std::vector<std::pair<std::uint32_t, int>> queue;
      for (std::uint32_t s : w.out[v]) {
        if (s != u && w.alive[s] && w.kind[s] == w.kind[v]) {
          seen[s] = stamp;
          queue.emplace_back(s, 1);
        }
      }
      bool found = false;
      for (std::size_t qi = 0; qi < queue.size() && !found; ++qi) {
        auto [x, d] = queue[qi];
        if (w.has_edge(x, u)) {
          found = true;
          break;
        }
        if (d >= kPathDepthCap) continue;
        for (std::uint32_t t : w.out[x]) {
          if (t != u && t != v && w.alive[t] && w.kind[t] == w.kind[v] && seen[t] != stamp) {
            seen[t] = stamp;
            queue.emplace_back(t, d + 1);
          }
        }
      }
      if (!found) continue;
      RewriteRecord rec;
      rec.rule = RuleId::SameGateNoShortcut;
      rec.removed_edges.emplace_back(v, u);
      w.remove_edge(v, u);
      used[v] = used[u] = 1;
      ++fired;
      log.push_back(std::move(rec));
      break;
    }
  }
  return fired;
}

std::size_t pass_factoring(Work& w, RewriteLog& log) {
  std::size_t fired = 0;
  std::vector<char> used(w.size(), 0);
  std::size_t bound = w.size();
  for (std::uint32_t u = 0; u < bound; ++u) {
    if (!w.alive[u] || w.kind[u] == VertexKind::Input || w.factored[u] || used[u]) continue;
    VertexKind hub = w.kind[u];
    VertexKind inner = hub == VertexKind::And ? VertexKind::Or : VertexKind::And;
    // Inner gates feeding this hub with the dual tag. Their own equations are
    // never touched, so extra consumers and output marks are all fine.
    std::vector<std::uint32_t> cands;
    for (std::uint32_t v : w.in[u]) {
      if (w.kind[v] == inner && !used[v]) cands.push_back(v);
    }
    if (cands.size() < 2) continue;
    // The shared source covering the most inner gates wins; ties go low.
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_source;
    for (std::uint32_t v : cands) {
      for (std::uint32_t s : w.in[v]) by_source[s].push_back(v);
    }
    std::uint32_t shared = kGone;
    std::size_t best = 1;
    for (const auto& [s, vs] : by_source) {
      if (vs.size() > best && !used[s]) {
        best = vs.size();
        shared = s;
      }
    }
    if (shared == kGone) continue;
    const std::vector<std::uint32_t>& vs = by_source[shared];

    // Whether the members may also drop their shared source depends on the
    // orientation. A true AND member forces the source true, so an OR hub's
    // collector (a AND source) recomputes each member's contribution exactly
    // and the source edge may go — provided the member's value is visible
    // nowhere else (sole consumer is the hub, not an output). A true OR
    // member forces nothing, so an AND hub's members keep their source:
    // dropping it would let a member go false where the original forces it
    // true, which shows up as phantom optima.
    RewriteRecord rec;
    rec.rule = RuleId::Factoring;
    for (std::uint32_t v : vs) {
      rec.removed_edges.emplace_back(v, u);
      w.remove_edge(v, u);
      if (hub == VertexKind::Or && !w.is_out[v] && w.out[v].empty() && w.in[v].size() >= 2) {
        rec.removed_edges.emplace_back(shared, v);
        w.remove_edge(shared, v);
      }
    }
    std::uint32_t a = w.add_vertex(hub, 0.0);
    std::uint32_t b = w.add_vertex(inner, 0.0);
    // Wherever members keep their shared source the collector re-creates the
    // hub pattern (same members, same source), so it must never become a hub
    // itself.
    w.factored[a] = 1;
    w.factored[b] = 1;
    rec.added_vertices.push_back({a, hub, 0.0});
    rec.added_vertices.push_back({b, inner, 0.0});
    for (std::uint32_t v : vs) {
      rec.added_edges.emplace_back(v, a);
      w.add_edge(v, a);
    }
    rec.added_edges.emplace_back(a, b);
    w.add_edge(a, b);
    rec.added_edges.emplace_back(shared, b);
    w.add_edge(shared, b);
    rec.added_edges.emplace_back(b, u);
    w.add_edge(b, u);
    w.factored[u] = 1;
    used[u] = used[shared] = 1;
    for (std::uint32_t v : vs) used[v] = 1;
    ++fired;
    log.push_back(std::move(rec));
  }
  return fired;
}

/// Pins `first` and everything it forces to constant 0: an AND losing a true
/// in-neighbor candidate dies with it, an OR merely loses the edge. Output
/// vertices survive retyped as the empty OR (constant 0) so satisfiability is
/// judged on the same output set.
void pin_to_zero(Work& w, std::uint32_t first, std::vector<char>& used, RewriteRecord& rec) {
  std::set<std::uint32_t> pinned{first};
  std::vector<std::uint32_t> worklist{first};
  while (!worklist.empty()) {
    std::uint32_t x = worklist.back();
    worklist.pop_back();
    std::vector<std::uint32_t> preds(w.in[x].begin(), w.in[x].end());
    for (std::uint32_t s : preds) {
      rec.removed_edges.emplace_back(s, x);
      w.remove_edge(s, x);
    }
    std::vector<std::uint32_t> succs(w.out[x].begin(), w.out[x].end());
    for (std::uint32_t t : succs) {
      rec.removed_edges.emplace_back(x, t);
      w.remove_edge(x, t);
      if (w.kind[t] == VertexKind::And && !pinned.count(t)) {
        pinned.insert(t);
        worklist.push_back(t);
      }
    }
    if (w.is_out[x]) {
      if (w.kind[x] != VertexKind::Or) {
        w.kind[x] = VertexKind::Or;
        rec.retyped.emplace_back(x, VertexKind::Or);
      }
      used[x] = 1;  // stays alive as a constant-0 output
    } else {
      w.alive[x] = 0;
      rec.removed_vertices.push_back(x);
    }
  }
}

/// Whether the AND vertex `x` may be pinned to constant 0 without changing
/// the optimum. Gate values are exact, so "x is false" is a real obligation:
/// some in-neighbor must be able to go false. An Input feeding only `x` is
/// such a witness — recovery switches it off for free. An output `x` needs no
/// witness: once a cycle forces it true, neither side has an acyclic
/// satisfying evaluation, so pinning keeps both equally unsatisfiable.
/// Without either, pinning an AND whose in-neighbors happen to be true would
/// admit evaluations the original circuit forbids.
bool can_pin_and(const Work& w, std::uint32_t x) {
  if (w.is_out[x]) return true;
  for (std::uint32_t s : w.in[x]) {
    if (w.alive[s] && w.kind[s] == VertexKind::Input && w.out[s].size() == 1) return true;
  }
  return false;
}

/// Marks every alive vertex lying on some directed cycle (a strongly
/// connected component of size two or more, or a self-loop). Iterative
/// Kosaraju: forward DFS for finish order, reverse DFS in reverse finish
/// order for components. Explicit stacks throughout — recursion depth would
/// track the longest path otherwise.
std::vector<char> mark_on_cycle(const Work& w) {
  std::size_t n = w.size();
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  std::vector<std::pair<std::uint32_t, std::set<std::uint32_t>::const_iterator>> walk;
  for (std::uint32_t r = 0; r < n; ++r) {
    if (!w.alive[r] || seen[r]) continue;
    seen[r] = 1;
    walk.emplace_back(r, w.out[r].begin());
    while (!walk.empty()) {
      std::uint32_t v = walk.back().first;
      if (walk.back().second == w.out[v].end()) {
        order.push_back(v);
        walk.pop_back();
        continue;
      }
      std::uint32_t t = *walk.back().second++;
      if (w.alive[t] && !seen[t]) {
        seen[t] = 1;
        walk.emplace_back(t, w.out[t].begin());
      }
    }
  }
  std::vector<std::uint32_t> comp(n, kGone);
  std::vector<std::uint32_t> comp_size;
  std::vector<std::uint32_t> stack;
  for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
    if (comp[*rit] != kGone) continue;
    std::uint32_t id = static_cast<std::uint32_t>(comp_size.size());
    comp_size.push_back(0);
    comp[*rit] = id;
    stack.assign(1, *rit);
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      stack.pop_back();
      ++comp_size[id];
      for (std::uint32_t s : w.in[v]) {
        if (w.alive[s] && comp[s] == kGone) {
          comp[s] = id;
          stack.push_back(s);
        }
      }
    }
  }
  std::vector<char> on(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (w.alive[v] && (comp_size[comp[v]] > 1 || w.has_edge(v, v))) on[v] = 1;
  }
  return on;
}

std::size_t pass_remove_lone_or_loops(Work& w, RewriteLog& log) {
  std::size_t fired = 0;
  std::vector<char> used(w.size(), 0);
  std::vector<std::uint32_t> seen(w.size(), 0);
  std::uint32_t stamp = 0;
  std::size_t bound = w.size();
  // Every vertex of an all-AND cycle through u sits in u's strongly connected
  // component, so the scan may ignore anything not on a directed cycle. The
  // mark is computed once per pass; pinning only deletes vertices, so a stale
  // mark over-approximates and costs at most a wasted probe.
  std::vector<char> on_cycle = mark_on_cycle(w);
  for (std::uint32_t u = 0; u < bound; ++u) {
    if (!w.alive[u] || w.kind[u] != VertexKind::Or || used[u] || !on_cycle[u]) continue;
    // Depth-first scan over AND vertices reachable from u; the first pinnable
    // one found with an edge back to u closes an all-AND cycle through u.
    // Non-pinnable closers are traversed like any other AND.
    std::uint32_t last = kGone;
    ++stamp;
    std::vector<std::uint32_t> stack;
    for (auto it = w.out[u].rbegin(); it != w.out[u].rend(); ++it) {
      if (w.alive[*it] && w.kind[*it] == VertexKind::And && on_cycle[*it]) stack.push_back(*it);
    }
    while (!stack.empty() && last == kGone) {
      std::uint32_t x = stack.back();
      stack.pop_back();
      if (seen[x] == stamp) continue;
      seen[x] = stamp;
      if (w.has_edge(x, u) && can_pin_and(w, x)) {
        last = x;
        break;
      }
      for (auto it = w.out[x].rbegin(); it != w.out[x].rend(); ++it) {
        if (w.alive[*it] && w.kind[*it] == VertexKind::And && on_cycle[*it] && seen[*it] != stamp)
          stack.push_back(*it);
      }
    }
    if (last == kGone) continue;
    RewriteRecord rec;
    rec.rule = RuleId::RemoveLoneOrLoops;
    pin_to_zero(w, last, used, rec);
    used[u] = 1;
    ++fired;
    log.push_back(std::move(rec));
  }
  return fired;
}

std::size_t pass_collect_variables(Work& w, RewriteLog& log) {
  std::size_t fired = 0;
  // Group variables by output membership and consumer set; only variables
  // whose every consumer is an AND gate may merge.
  std::map<std::pair<char, std::vector<std::uint32_t>>, std::vector<std::uint32_t>> groups;
  for (std::uint32_t v = 0; v < w.size(); ++v) {
    if (!w.alive[v] || w.kind[v] != VertexKind::Input) continue;
    bool all_and = true;
    for (std::uint32_t t : w.out[v]) {
      if (w.kind[t] != VertexKind::And) {
        all_and = false;
        break;
      }
    }
    if (!all_and) continue;
    std::vector<std::uint32_t> key(w.out[v].begin(), w.out[v].end());
    groups[{w.is_out[v], std::move(key)}].push_back(v);
  }
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    std::uint32_t survivor = members.front();
    RewriteRecord rec;
    rec.rule = RuleId::CollectVariables;
    double total = w.cost[survivor];
    for (std::size_t i = 1; i < members.size(); ++i) {
      std::uint32_t v = members[i];
      total += w.cost[v];
      std::vector<std::uint32_t> succs(w.out[v].begin(), w.out[v].end());
      for (std::uint32_t t : succs) {
        rec.removed_edges.emplace_back(v, t);
        w.remove_edge(v, t);
      }
      w.is_out[v] = 0;
      w.alive[v] = 0;
      rec.removed_vertices.push_back(v);
      w.move_provenance(v, survivor, rec);
    }
    w.cost[survivor] = total;
    rec.cost_updates.emplace_back(survivor, total);
    ++fired;
    log.push_back(std::move(rec));
  }
  return fired;
}

std::size_t run_pass(Work& w, RuleId rule, RewriteLog& log) {
  switch (rule) {
    case RuleId::RemoveUnreachable: return pass_remove_unreachable(w, log);
    case RuleId::ContractIndegreeOne: return pass_contract_indegree_one(w, log);
    case RuleId::ContractSameGate: return pass_contract_same_gate(w, log);
    case RuleId::SameGateNoShortcut: return pass_same_gate_no_shortcut(w, log);
    case RuleId::Factoring: return pass_factoring(w, log);
    case RuleId::RemoveLoneOrLoops: return pass_remove_lone_or_loops(w, log);
    case RuleId::CollectVariables: return pass_collect_variables(w, log);
  }
  return 0;
}

SimplifyResult finalize(const Circuit& original, Work&& w, RewriteLog&& log) {
  SimplifyResult r;
  r.log = std::move(log);
  r.working_vertex_count = w.size();
  r.compaction.assign(w.size(), kGone);
  CircuitBuilder b;
  for (std::uint32_t v = 0; v < w.size(); ++v) {
    if (!w.alive[v]) continue;
    r.compaction[v] = b.add_vertex(w.kind[v], w.kind[v] == VertexKind::Input ? w.cost[v] : 0.0);
  }
  for (std::uint32_t v = 0; v < w.size(); ++v) {
    if (!w.alive[v]) continue;
    for (std::uint32_t t : w.out[v]) b.add_edge(r.compaction[v], r.compaction[t]);
  }
  for (std::uint32_t v = 0; v < w.size(); ++v) {
    if (w.alive[v] && w.is_out[v]) b.mark_output(r.compaction[v]);
  }
  r.circuit = b.build();
  r.provenance.assign(original.num_vertices(), -1);
  for (std::uint32_t v = 0; v < original.num_vertices(); ++v) {
    if (original.kind(v) != VertexKind::Input) continue;
    std::int64_t p = w.prov[v];
    r.provenance[v] = p < 0 ? -1 : static_cast<std::int64_t>(r.compaction[static_cast<std::uint32_t>(p)]);
  }
  return r;
}

}  // namespace

std::string_view rule_name(RuleId r) {
  switch (r) {
    case RuleId::RemoveUnreachable: return "remove-unreachable";
    case RuleId::ContractIndegreeOne: return "contract-indegree-one";
    case RuleId::ContractSameGate: return "contract-same-gate";
    case RuleId::SameGateNoShortcut: return "same-gate-no-shortcut";
    case RuleId::Factoring: return "factoring";
    case RuleId::RemoveLoneOrLoops: return "remove-lone-or-loops";
    case RuleId::CollectVariables: return "collect-variables";
  }
  return "?";
}

std::optional<RuleId> rule_from_name(std::string_view name) {
  for (RuleId r : kAllRules) {
    if (rule_name(r) == name) return r;
  }
  return std::nullopt;
}

SimplifyResult apply_rule(const Circuit& c, RuleId rule) {
  Work w(c);
  RewriteLog log;
  std::size_t n = run_pass(w, rule, log);
  SimplifyResult r = finalize(c, std::move(w), std::move(log));
  r.fired[static_cast<std::size_t>(rule)] = n;
  r.cycles = 1;
  return r;
}

SimplifyResult simplify_fixpoint(const Circuit& c, const SimplifyOptions& opts) {
  std::vector<RuleId> active;
  for (RuleId r : kAllRules) {
    if (std::find(opts.rules.begin(), opts.rules.end(), r) != opts.rules.end()) active.push_back(r);
  }
  std::size_t limit = opts.max_cycles != 0
                          ? opts.max_cycles
                          : 2 * (c.num_vertices() + c.num_edges()) + 16;
  Work w(c);
  RewriteLog log;
  std::array<std::size_t, 7> fired{};
  std::size_t cycles = 0;
  bool limit_hit = false;
  for (;;) {
    std::size_t total = 0;
    for (RuleId r : active) {
      std::size_t n = run_pass(w, r, log);
      fired[static_cast<std::size_t>(r)] += n;
      total += n;
    }
    if (total == 0) break;
    if (++cycles >= limit) {
      limit_hit = true;
      break;
    }
  }
  SimplifyResult r = finalize(c, std::move(w), std::move(log));
  r.fired = fired;
  r.cycles = cycles;
  r.iteration_limit_hit = limit_hit;
  return r;
}

Circuit replay_log(const Circuit& original, const SimplifyResult& r) {
  std::vector<VertexKind> kind;
  std::vector<double> cost;
  std::vector<std::set<std::uint32_t>> in(original.num_vertices()), out(original.num_vertices());
  std::vector<char> alive(original.num_vertices(), 1);
  std::vector<char> is_out(original.num_vertices(), 0);
  for (std::uint32_t v = 0; v < original.num_vertices(); ++v) {
    kind.push_back(original.kind(v));
    cost.push_back(original.cost(v));
    in[v].insert(original.in(v).begin(), original.in(v).end());
    out[v].insert(original.out(v).begin(), original.out(v).end());
  }
  for (std::uint32_t v : original.outputs()) is_out[v] = 1;

  for (const RewriteRecord& rec : r.log) {
    for (const RewriteRecord::NewVertex& nv : rec.added_vertices) {
      if (nv.id != kind.size()) throw RecoveryError("replay: vertex ids out of order");
      kind.push_back(nv.kind);
      cost.push_back(nv.cost);
      in.emplace_back();
      out.emplace_back();
      alive.push_back(1);
      is_out.push_back(0);
    }
    for (auto [s, d] : rec.removed_edges) {
      out[s].erase(d);
      in[d].erase(s);
    }
    for (auto [s, d] : rec.added_edges) {
      out[s].insert(d);
      in[d].insert(s);
    }
    for (auto [v, k] : rec.retyped) kind[v] = k;
    for (auto [v, c2] : rec.cost_updates) cost[v] = c2;
    for (std::uint32_t v : rec.marked_output) is_out[v] = 1;
    for (std::uint32_t v : rec.removed_vertices) {
      if (!in[v].empty() || !out[v].empty()) throw RecoveryError("replay: removed vertex still wired");
      alive[v] = 0;
      is_out[v] = 0;
    }
  }

  CircuitBuilder b;
  std::vector<std::uint32_t> map(kind.size(), kGone);
  for (std::uint32_t v = 0; v < kind.size(); ++v) {
    if (alive[v]) map[v] = b.add_vertex(kind[v], kind[v] == VertexKind::Input ? cost[v] : 0.0);
  }
  for (std::uint32_t v = 0; v < kind.size(); ++v) {
    if (!alive[v]) continue;
    for (std::uint32_t t : out[v]) b.add_edge(map[v], map[t]);
  }
  for (std::uint32_t v = 0; v < kind.size(); ++v) {
    if (alive[v] && is_out[v]) b.mark_output(map[v]);
  }
  return b.build();
}

Evaluation recover_evaluation(const Circuit& original, const SimplifyResult& r,
                              const Evaluation& simplified_eval, bool expect_acyclic) {
  if (simplified_eval.value.size() != r.circuit.num_vertices()) {
    throw RecoveryError("recover: evaluation does not fit the simplified circuit");
  }
  double want = evaluation_cost(r.circuit, simplified_eval);
  std::vector<std::uint8_t> inputs(original.num_vertices(), 0);
  for (std::uint32_t v = 0; v < original.num_vertices(); ++v) {
    if (original.kind(v) != VertexKind::Input) continue;
    std::int64_t p = r.provenance[v];
    inputs[v] = p >= 0 && simplified_eval.truth(static_cast<std::uint32_t>(p)) ? 1 : 0;
  }

  if (expect_acyclic) {
    FixpointResult fr = evaluate_from_inputs(original, inputs);
    if (!is_satisfying(original, fr.evaluation)) throw RecoveryError("recover: not satisfying");
    if (!fr.acyclic) throw RecoveryError("recover: cyclic");
    double got = evaluation_cost(original, fr.evaluation);
    if (std::abs(got - want) > kCostTol) throw RecoveryError("recover: cost changed");
    return fr.evaluation;
  }

  // Greatest valid evaluation over these inputs: gates start at 1 and fall
  // when their operation can no longer hold, which keeps every gate cycle
  // the inputs can support. Trimming afterwards restores minimality.
  Evaluation a;
  a.value.assign(original.num_vertices(), 1);
  for (std::uint32_t v = 0; v < original.num_vertices(); ++v) {
    if (original.kind(v) == VertexKind::Input) a.value[v] = inputs[v];
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t v = 0; v < original.num_vertices(); ++v) {
      if (original.kind(v) == VertexKind::Input || !a.truth(v)) continue;
      bool hold;
      if (original.kind(v) == VertexKind::And) {
        hold = true;
        for (std::uint32_t s : original.in(v)) hold = hold && a.truth(s);
      } else {
        hold = false;
        for (std::uint32_t s : original.in(v)) hold = hold || a.truth(s);
      }
      if (!hold) {
        a.value[v] = 0;
        changed = true;
      }
    }
  }
  if (!is_satisfying(original, a)) throw RecoveryError("recover: not satisfying");
  Evaluation trimmed = minimize_evaluation(original, a);
  double got = evaluation_cost(original, trimmed);
  if (got > want + kCostTol) throw RecoveryError("recover: cost increased");
  return trimmed;
}

}  // namespace ecx
