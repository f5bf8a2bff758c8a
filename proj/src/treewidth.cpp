#include "ecx/treewidth.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace ecx {
namespace {

constexpr std::uint32_t kNoBag = UINT32_MAX;

bool bag_contains(const std::vector<std::uint32_t>& bag, std::uint32_t v) {
  return std::binary_search(bag.begin(), bag.end(), v);
}

std::vector<std::uint32_t> sorted_difference(const std::vector<std::uint32_t>& a,
                                             const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> d;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d));
  return d;
}

}  // namespace

std::size_t UGraph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& nb : adj) twice += nb.size();
  return twice / 2;
}

UGraph underlying_graph(const Circuit& c) {
  UGraph g;
  g.adj.resize(c.num_vertices());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> und;
  und.reserve(c.num_edges());
  for (std::uint32_t u = 0; u < c.num_vertices(); ++u) {
    for (std::uint32_t v : c.out(u)) und.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(und.begin(), und.end());
  und.erase(std::unique(und.begin(), und.end()), und.end());
  for (auto [a, b] : und) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
  return g;
}

std::size_t TreeDecomposition::width() const {
  std::size_t m = 0;
  for (const auto& b : bags) m = std::max(m, b.size());
  return m == 0 ? 0 : m - 1;
}

TreeDecomposition tree_decomposition(const UGraph& g, EliminationHeuristic h) {
  std::size_t n = g.num_vertices();
  std::vector<std::set<std::uint32_t>> adj(n);
  for (std::uint32_t v = 0; v < n; ++v) adj[v].insert(g.adj[v].begin(), g.adj[v].end());
  std::vector<char> alive(n, 1);

  // (degree, vertex) ordering for min-degree; min-fill rescans instead.
  std::set<std::pair<std::uint32_t, std::uint32_t>> by_degree;
  if (h == EliminationHeuristic::MinDegree) {
    for (std::uint32_t v = 0; v < n; ++v) {
      by_degree.emplace(static_cast<std::uint32_t>(adj[v].size()), v);
    }
  }
  auto fill_in = [&](std::uint32_t v) {
    std::size_t missing = 0;
    for (auto it = adj[v].begin(); it != adj[v].end(); ++it) {
      for (auto jt = std::next(it); jt != adj[v].end(); ++jt) {
        if (!adj[*it].count(*jt)) ++missing;
      }
    }
    return missing;
  };

  TreeDecomposition td;
  td.bags.resize(n);
  std::vector<std::uint32_t> step_of(n, 0);
  for (std::uint32_t step = 0; step < n; ++step) {
    std::uint32_t v;
    if (h == EliminationHeuristic::MinDegree) {
      v = by_degree.begin()->second;
      by_degree.erase(by_degree.begin());
    } else {
      std::size_t best = SIZE_MAX;
      std::uint32_t pick = kNoBag;
      for (std::uint32_t u = 0; u < n; ++u) {
        if (!alive[u]) continue;
        std::size_t f = fill_in(u);
        if (f < best) {
          best = f;
          pick = u;
        }
      }
      v = pick;
    }
    step_of[v] = step;
    std::vector<std::uint32_t> nb(adj[v].begin(), adj[v].end());
    td.bags[step].push_back(v);
    td.bags[step].insert(td.bags[step].end(), nb.begin(), nb.end());
    std::sort(td.bags[step].begin(), td.bags[step].end());

    auto touch = [&](std::uint32_t u) {
      if (h == EliminationHeuristic::MinDegree) {
        by_degree.erase({static_cast<std::uint32_t>(adj[u].size()), u});
      }
    };
    auto settle = [&](std::uint32_t u) {
      if (h == EliminationHeuristic::MinDegree) {
        by_degree.emplace(static_cast<std::uint32_t>(adj[u].size()), u);
      }
    };
    for (std::uint32_t u : nb) {
      touch(u);
      adj[u].erase(v);
    }
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        adj[nb[i]].insert(nb[j]);
        adj[nb[j]].insert(nb[i]);
      }
    }
    for (std::uint32_t u : nb) settle(u);
    adj[v].clear();
    alive[v] = 0;
  }

  // The bag of step s hangs off the bag of its earliest-eliminated member
  // other than its own vertex; bags with none are component roots.
  std::vector<std::uint32_t> roots;
  for (std::uint32_t step = 0; step < n; ++step) {
    std::uint32_t me = kNoBag;
    for (std::uint32_t v : td.bags[step]) {
      if (step_of[v] == step) me = v;
    }
    std::uint32_t next = kNoBag;
    for (std::uint32_t v : td.bags[step]) {
      if (v != me && (next == kNoBag || step_of[v] < step_of[next])) next = v;
    }
    if (next == kNoBag) {
      roots.push_back(step);
    } else {
      td.edges.emplace_back(step, step_of[next]);
    }
  }
  if (n == 0 || roots.size() > 1) {
    std::uint32_t shared = static_cast<std::uint32_t>(td.bags.size());
    td.bags.emplace_back();
    for (std::uint32_t r : roots) td.edges.emplace_back(r, shared);
  }
  return td;
}

bool validate_decomposition(const UGraph& g, const TreeDecomposition& td, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::size_t nb = td.bags.size();
  if (nb == 0) return fail("no bags");
  for (const auto& bag : td.bags) {
    if (!std::is_sorted(bag.begin(), bag.end())) return fail("unsorted bag");
    if (std::adjacent_find(bag.begin(), bag.end()) != bag.end()) return fail("duplicate in bag");
    for (std::uint32_t v : bag) {
      if (v >= g.num_vertices()) return fail("bag names unknown vertex");
    }
  }
  // Tree-ness.
  if (td.edges.size() + 1 != nb) return fail("bag graph is not a tree");
  std::vector<std::vector<std::uint32_t>> nbr(nb);
  for (auto [a, b] : td.edges) {
    if (a >= nb || b >= nb || a == b) return fail("bad tree edge");
    nbr[a].push_back(b);
    nbr[b].push_back(a);
  }
  std::vector<char> seen(nb, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    std::uint32_t x = stack.back();
    stack.pop_back();
    for (std::uint32_t y : nbr[x]) {
      if (!seen[y]) {
        seen[y] = 1;
        ++reached;
        stack.push_back(y);
      }
    }
  }
  if (reached != nb) return fail("bag graph is disconnected");

  // Vertex coverage and per-vertex bag lists.
  std::vector<std::vector<std::uint32_t>> bags_of(g.num_vertices());
  for (std::uint32_t i = 0; i < nb; ++i) {
    for (std::uint32_t v : td.bags[i]) bags_of[v].push_back(i);
  }
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v) {
    if (bags_of[v].empty()) return fail("vertex " + std::to_string(v) + " in no bag");
  }
  // Edge coverage.
  for (std::uint32_t a = 0; a < g.num_vertices(); ++a) {
    for (std::uint32_t b : g.adj[a]) {
      if (b < a) continue;
      bool covered = false;
      for (std::uint32_t i : bags_of[a]) {
        if (bag_contains(td.bags[i], b)) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        return fail("edge {" + std::to_string(a) + "," + std::to_string(b) + "} in no bag");
      }
    }
  }
  // Connectivity of each vertex's bags.
  std::vector<std::uint32_t> mark(nb, kNoBag);
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v) {
    for (std::uint32_t i : bags_of[v]) mark[i] = v;
    std::vector<std::uint32_t> st{bags_of[v].front()};
    mark[st.front()] = kNoBag;  // visited sentinel: flip back to kNoBag
    std::size_t got = 1;
    while (!st.empty()) {
      std::uint32_t x = st.back();
      st.pop_back();
      for (std::uint32_t y : nbr[x]) {
        if (mark[y] == v) {
          mark[y] = kNoBag;
          ++got;
          st.push_back(y);
        }
      }
    }
    if (got != bags_of[v].size()) {
      return fail("bags holding vertex " + std::to_string(v) + " are disconnected");
    }
  }
  return true;
}

NiceTree to_nice(const TreeDecomposition& td, std::uint32_t must_contain) {
  std::size_t nb = td.bags.size();
  std::uint32_t r = kNoBag;
  for (std::uint32_t i = 0; i < nb; ++i) {
    if (bag_contains(td.bags[i], must_contain)) {
      r = i;
      break;
    }
  }
  if (r == kNoBag) throw std::invalid_argument("to_nice: vertex appears in no bag");

  std::vector<std::vector<std::uint32_t>> nbr(nb);
  for (auto [a, b] : td.edges) {
    nbr[a].push_back(b);
    nbr[b].push_back(a);
  }
  for (auto& v : nbr) std::sort(v.begin(), v.end());
  std::vector<std::int64_t> par(nb, -2);
  std::vector<std::vector<std::uint32_t>> children(nb);
  std::vector<std::uint32_t> order{r};
  par[r] = -1;
  for (std::size_t qi = 0; qi < order.size(); ++qi) {
    std::uint32_t x = order[qi];
    for (std::uint32_t y : nbr[x]) {
      if (par[y] == -2) {
        par[y] = x;
        children[x].push_back(y);
        order.push_back(y);
      }
    }
  }
  if (order.size() != nb) throw std::invalid_argument("to_nice: bag graph is disconnected");

  NiceTree nt;
  auto new_bag = [&](BagKind k, std::vector<std::uint32_t> vs, std::uint32_t sp) {
    NiceBag b;
    b.kind = k;
    b.vertices = std::move(vs);
    b.special = sp;
    nt.bags.push_back(std::move(b));
    return static_cast<std::uint32_t>(nt.bags.size() - 1);
  };
  auto link = [&](std::uint32_t p, std::uint32_t c) {
    nt.bags[p].children.push_back(c);
    nt.bags[c].parent = p;
  };
  // Walks the content from `from` to `to`: forgets ascending, then inserts
  // descending (so the bag nearest the target adds its smallest vertex).
  auto adapt = [&](std::uint32_t top, const std::vector<std::uint32_t>& from,
                   const std::vector<std::uint32_t>& to) {
    std::vector<std::uint32_t> cur = from;
    for (std::uint32_t v : sorted_difference(from, to)) {
      cur.erase(std::lower_bound(cur.begin(), cur.end(), v));
      std::uint32_t idx = new_bag(BagKind::Forget, cur, v);
      link(idx, top);
      top = idx;
    }
    std::vector<std::uint32_t> missing = sorted_difference(to, cur);
    for (auto it = missing.rbegin(); it != missing.rend(); ++it) {
      cur.insert(std::lower_bound(cur.begin(), cur.end(), *it), *it);
      std::uint32_t idx = new_bag(BagKind::Insert, cur, *it);
      link(idx, top);
      top = idx;
    }
    return top;
  };
  auto leaf_chain = [&](const std::vector<std::uint32_t>& content) {
    std::uint32_t top = new_bag(BagKind::Leaf, {}, kNoVertex);
    return adapt(top, {}, content);
  };

  // Children before parents: reversed preorder.
  std::vector<std::uint32_t> post = order;
  std::reverse(post.begin(), post.end());
  std::vector<std::uint32_t> top_of(nb, kNoBag);
  for (std::uint32_t x : post) {
    const auto& content = td.bags[x];
    if (children[x].empty()) {
      top_of[x] = leaf_chain(content);
      continue;
    }
    std::vector<std::uint32_t> tops;
    for (std::uint32_t c : children[x]) tops.push_back(adapt(top_of[c], td.bags[c], content));
    std::uint32_t cur = tops.front();
    for (std::size_t i = 1; i < tops.size(); ++i) {
      std::uint32_t j = new_bag(BagKind::Join, content, kNoVertex);
      link(j, cur);
      link(j, tops[i]);
      cur = j;
    }
    top_of[x] = cur;
  }
  nt.root = adapt(top_of[r], td.bags[r], {must_contain});
  return nt;
}

bool validate_nice(const UGraph& g, const NiceTree& nt, std::uint32_t must_contain,
                   std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::size_t nb = nt.bags.size();
  if (nb == 0) return fail("no bags");
  if (nt.root >= nb) return fail("bad root index");
  for (std::uint32_t i = 0; i < nb; ++i) {
    const NiceBag& b = nt.bags[i];
    if (i == nt.root) {
      if (b.parent != -1) return fail("root has a parent");
    } else {
      if (b.parent < 0 || b.parent >= static_cast<std::int64_t>(nb)) return fail("bad parent");
      const auto& pc = nt.bags[b.parent].children;
      if (std::count(pc.begin(), pc.end(), i) != 1) return fail("parent/child mismatch");
    }
    for (std::uint32_t c : b.children) {
      if (c >= nb || nt.bags[c].parent != static_cast<std::int64_t>(i)) {
        return fail("parent/child mismatch");
      }
    }
    switch (b.kind) {
      case BagKind::Leaf:
        if (!b.children.empty() || !b.vertices.empty()) return fail("malformed leaf");
        break;
      case BagKind::Insert: {
        if (b.children.size() != 1 || b.special == kNoVertex) return fail("malformed insert");
        const auto& cv = nt.bags[b.children[0]].vertices;
        if (bag_contains(cv, b.special)) return fail("insert of present vertex");
        std::vector<std::uint32_t> want = cv;
        want.insert(std::lower_bound(want.begin(), want.end(), b.special), b.special);
        if (b.vertices != want) return fail("insert content mismatch");
        break;
      }
      case BagKind::Forget: {
        if (b.children.size() != 1 || b.special == kNoVertex) return fail("malformed forget");
        const auto& cv = nt.bags[b.children[0]].vertices;
        if (!bag_contains(cv, b.special)) return fail("forget of absent vertex");
        std::vector<std::uint32_t> want = cv;
        want.erase(std::lower_bound(want.begin(), want.end(), b.special));
        if (b.vertices != want) return fail("forget content mismatch");
        break;
      }
      case BagKind::Join:
        if (b.children.size() != 2) return fail("malformed join");
        if (nt.bags[b.children[0]].vertices != b.vertices ||
            nt.bags[b.children[1]].vertices != b.vertices) {
          return fail("join content mismatch");
        }
        break;
    }
  }
  if (nt.bags[nt.root].vertices != std::vector<std::uint32_t>{must_contain}) {
    return fail("root bag is not exactly the required vertex");
  }
  TreeDecomposition flat;
  flat.bags.reserve(nb);
  for (const NiceBag& b : nt.bags) flat.bags.push_back(b.vertices);
  for (std::uint32_t i = 0; i < nb; ++i) {
    if (i != nt.root) flat.edges.emplace_back(i, static_cast<std::uint32_t>(nt.bags[i].parent));
  }
  return validate_decomposition(g, flat, why);
}

}  // namespace ecx
