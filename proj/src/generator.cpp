#include "ecx/generator.hpp"

#include <array>
#include <string>
#include <vector>

namespace ecx {
namespace {

std::string cname(std::size_t i) { return "c" + std::to_string(i); }
std::string nname(std::size_t i) { return "n" + std::to_string(i); }

std::uint32_t pick(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
  return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
}

double int_cost(std::mt19937_64& rng, std::uint32_t lo = 0, std::uint32_t hi = 9) {
  return static_cast<double>(pick(rng, lo, hi));
}

}  // namespace

EGraph random_egraph(std::mt19937_64& rng, const EGraphGenOptions& opts) {
  std::uint32_t nc = pick(rng, 1, opts.max_classes);
  std::vector<std::uint32_t> nodes_in(nc);
  std::vector<std::vector<std::string>> ids(nc);
  std::size_t next_node = 0;
  for (std::uint32_t c = 0; c < nc; ++c) {
    nodes_in[c] = pick(rng, 1, opts.max_nodes_per_class);
    for (std::uint32_t k = 0; k < nodes_in[c]; ++k) ids[c].push_back(nname(next_node++));
  }
  EGraphBuilder b;
  for (std::uint32_t c = 0; c < nc; ++c) {
    for (std::uint32_t k = 0; k < nodes_in[c]; ++k) {
      std::uint32_t nd = pick(rng, 0, opts.max_deps);
      std::vector<std::string> deps, children;
      for (std::uint32_t d = 0; d < nd; ++d) {
        std::uint32_t target;
        if (opts.allow_cycles) {
          target = pick(rng, 0, nc - 1);
        } else {
          if (c + 1 >= nc) break;
          target = pick(rng, c + 1, nc - 1);
        }
        deps.push_back(cname(target));
        children.push_back(ids[target][pick(rng, 0, nodes_in[target] - 1)]);
      }
      b.add_node(ids[c][k], "op" + std::to_string(pick(rng, 0, 4)), cname(c), deps,
                 int_cost(rng), std::move(children));
    }
  }
  std::uint32_t nroots = pick(rng, 1, std::min<std::uint32_t>(2, nc));
  std::uint32_t first = pick(rng, 0, nc - 1);
  b.add_root(cname(first));
  if (nroots == 2) b.add_root(cname(pick(rng, 0, nc - 1)));
  return b.build();
}

EGraph cyclic_cheapest_egraph(std::mt19937_64& rng) {
  EGraphBuilder b;
  double cheap_a = int_cost(rng, 0, 1);
  double cheap_b = int_cost(rng, 0, 1);
  double dear_a = int_cost(rng, 5, 9);
  double dear_b = int_cost(rng, 5, 9);
  // The two cheap nodes depend on each other's classes: together they close a
  // cycle whose total cost undercuts every acyclic alternative.
  b.add_node("a_cyc", "fa", "A", {"B"}, cheap_a, {"b_cyc"});
  b.add_node("a_leaf", "ga", "A", {}, dear_a);
  b.add_node("b_cyc", "fb", "B", {"A"}, cheap_b, {"a_cyc"});
  b.add_node("b_leaf", "gb", "B", {}, dear_b);
  std::uint32_t extras = pick(rng, 0, 2);
  for (std::uint32_t i = 0; i < extras; ++i) {
    b.add_node("x" + std::to_string(i), "leaf", "X" + std::to_string(i), {}, int_cost(rng));
  }
  b.add_root("A");
  if (pick(rng, 0, 1) == 1) b.add_root("B");
  return b.build();
}

EGraph chain_egraph(std::size_t length) {
  EGraphBuilder b;
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<std::string> deps, children;
    if (i + 1 < length) {
      deps.push_back(cname(i + 1));
      children.push_back("a" + std::to_string(i + 1));
    }
    b.add_node("a" + std::to_string(i), "f", cname(i), deps, 1.0, children);
    b.add_node("b" + std::to_string(i), "g", cname(i), deps, i % 3 == 0 ? 0.0 : 2.0, children);
  }
  b.add_root(cname(0));
  return b.build();
}

EGraph term_dag_egraph(std::mt19937_64& rng, std::size_t min_nodes) {
  static const std::array<const char*, 6> kOps = {"add", "mul", "sub", "shl", "phi", "select"};
  static const std::array<const char*, 3> kLeaves = {"const", "var", "param"};
  EGraphBuilder b;
  std::vector<std::vector<std::string>> ids;
  std::size_t total = 0;
  std::size_t c = 0;
  while (total < min_nodes) {
    std::uint32_t alts = pick(rng, 0, 9) == 0 ? pick(rng, 2, 3) : 1;
    ids.emplace_back();
    for (std::uint32_t k = 0; k < alts; ++k) {
      std::string id = nname(total++);
      ids[c].push_back(id);
      if (c < 4 || pick(rng, 0, 4) == 0) {
        // Leaf term.
        b.add_node(id, kLeaves[pick(rng, 0, kLeaves.size() - 1)], cname(c), {}, int_cost(rng, 0, 2));
      } else {
        std::uint32_t arity = pick(rng, 1, 2);
        std::vector<std::string> deps, children;
        for (std::uint32_t d = 0; d < arity; ++d) {
          std::uint32_t t = pick(rng, 0, static_cast<std::uint32_t>(c - 1));
          deps.push_back(cname(t));
          children.push_back(ids[t][pick(rng, 0, static_cast<std::uint32_t>(ids[t].size() - 1))]);
        }
        b.add_node(id, kOps[pick(rng, 0, kOps.size() - 1)], cname(c), deps, int_cost(rng, 1, 5),
                   std::move(children));
      }
    }
    ++c;
  }
  b.add_root(cname(c - 1));
  if (c >= 8) b.add_root(cname(c - 3));
  return b.build();
}

Circuit random_circuit(std::mt19937_64& rng, const CircuitGenOptions& opts) {
  std::uint32_t n = pick(rng, 3, opts.max_vertices);
  std::vector<VertexKind> kinds(n);
  std::uint32_t inputs = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (std::uniform_real_distribution<double>(0, 1)(rng) < opts.input_fraction || v == 0) {
      kinds[v] = VertexKind::Input;
      ++inputs;
    } else {
      kinds[v] = pick(rng, 0, 1) == 0 ? VertexKind::And : VertexKind::Or;
    }
  }
  CircuitBuilder b;
  for (std::uint32_t v = 0; v < n; ++v) {
    b.add_vertex(kinds[v], kinds[v] == VertexKind::Input ? int_cost(rng) : 0.0);
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    if (kinds[v] == VertexKind::Input) continue;
    std::uint32_t want = pick(rng, 0, opts.max_in_degree);
    std::vector<char> hit(n, 0);
    for (std::uint32_t e = 0; e < want; ++e) {
      std::uint32_t s = pick(rng, 0, n - 1);
      if (s == v || hit[s]) continue;
      hit[s] = 1;
      b.add_edge(s, v);
    }
  }
  std::uint32_t nouts = pick(rng, 1, 2);
  std::vector<char> outhit(n, 0);
  for (std::uint32_t i = 0; i < nouts; ++i) {
    std::uint32_t o = pick(rng, 0, n - 1);
    if (outhit[o]) continue;
    outhit[o] = 1;
    b.mark_output(o);
  }
  return b.build();
}

Circuit motif_circuit(std::mt19937_64& rng, RuleId rule) {
  CircuitBuilder b;
  auto in = [&] { return b.add_vertex(VertexKind::Input, int_cost(rng)); };
  switch (rule) {
    case RuleId::RemoveUnreachable: {
      std::uint32_t x = in();
      std::uint32_t a = b.add_vertex(VertexKind::And);
      std::uint32_t o = b.add_vertex(VertexKind::Or);
      b.add_edge(x, a);
      b.add_edge(a, o);
      b.mark_output(o);
      std::uint32_t y = in();
      std::uint32_t g1 = b.add_vertex(VertexKind::Or);
      std::uint32_t g2 = b.add_vertex(VertexKind::And);
      b.add_edge(y, g1);
      b.add_edge(g1, g2);
      break;
    }
    case RuleId::ContractIndegreeOne: {
      std::uint32_t x = in();
      std::uint32_t y = in();
      std::uint32_t a = b.add_vertex(VertexKind::And);
      std::uint32_t g = b.add_vertex(VertexKind::Or);
      std::uint32_t o = b.add_vertex(VertexKind::And);
      b.add_edge(x, a);
      b.add_edge(y, a);
      b.add_edge(a, g);  // g has in-degree one
      b.add_edge(g, o);
      b.add_edge(y, o);
      b.mark_output(o);
      break;
    }
    case RuleId::ContractSameGate: {
      std::uint32_t x1 = in();
      std::uint32_t x2 = in();
      std::uint32_t x3 = in();
      std::uint32_t a = b.add_vertex(VertexKind::And);
      std::uint32_t a2 = b.add_vertex(VertexKind::And);
      std::uint32_t o = b.add_vertex(VertexKind::Or);
      b.add_edge(x1, a);
      b.add_edge(x2, a);
      b.add_edge(a, a2);  // a's only consumer, same tag
      b.add_edge(x3, a2);
      b.add_edge(a2, o);
      b.mark_output(o);
      break;
    }
    case RuleId::SameGateNoShortcut: {
      std::uint32_t x = in();
      std::uint32_t v = b.add_vertex(VertexKind::And);
      std::uint32_t w = b.add_vertex(VertexKind::And);
      std::uint32_t u = b.add_vertex(VertexKind::And);
      b.add_edge(x, v);
      b.add_edge(v, u);  // shortcut parallel to v -> w -> u
      b.add_edge(v, w);
      b.add_edge(w, u);
      b.mark_output(u);
      break;
    }
    case RuleId::Factoring: {
      std::uint32_t wsh = in();
      std::uint32_t x1 = in();
      std::uint32_t x2 = in();
      std::uint32_t v1 = b.add_vertex(VertexKind::Or);
      std::uint32_t v2 = b.add_vertex(VertexKind::Or);
      std::uint32_t u = b.add_vertex(VertexKind::And);
      b.add_edge(wsh, v1);
      b.add_edge(x1, v1);
      b.add_edge(wsh, v2);
      b.add_edge(x2, v2);
      b.add_edge(v1, u);
      b.add_edge(v2, u);
      b.mark_output(u);
      break;
    }
    case RuleId::RemoveLoneOrLoops: {
      std::uint32_t x = in();
      std::uint32_t y = in();
      std::uint32_t g = in();  // private switch on the cycle-closing AND
      std::uint32_t u = b.add_vertex(VertexKind::Or);
      std::uint32_t a1 = b.add_vertex(VertexKind::And);
      std::uint32_t a2 = b.add_vertex(VertexKind::And);
      std::uint32_t z = b.add_vertex(VertexKind::And);
      b.add_edge(x, u);
      b.add_edge(u, a1);  // all-AND cycle u -> a1 -> a2 -> u
      b.add_edge(a1, a2);
      b.add_edge(g, a2);
      b.add_edge(a2, u);
      b.add_edge(u, z);
      b.add_edge(y, z);
      b.mark_output(z);
      break;
    }
    case RuleId::CollectVariables: {
      std::uint32_t x1 = in();
      std::uint32_t x2 = in();
      std::uint32_t a = b.add_vertex(VertexKind::And);
      std::uint32_t a2 = b.add_vertex(VertexKind::And);
      std::uint32_t o = b.add_vertex(VertexKind::Or);
      b.add_edge(x1, a);
      b.add_edge(x2, a);
      b.add_edge(x1, a2);
      b.add_edge(x2, a2);
      b.add_edge(a, o);
      b.add_edge(a2, o);
      b.mark_output(o);
      break;
    }
  }
  return b.build();
}

UGraph random_ugraph(std::mt19937_64& rng, std::size_t n, double edge_prob) {
  UGraph g;
  g.adj.resize(n);
  std::uniform_real_distribution<double> coin(0, 1);
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t bb = a + 1; bb < n; ++bb) {
      if (coin(rng) < edge_prob) {
        g.adj[a].push_back(bb);
        g.adj[bb].push_back(a);
      }
    }
  }
  return g;
}

}  // namespace ecx
