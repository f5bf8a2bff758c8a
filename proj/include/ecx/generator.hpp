#pragma once

#include <cstdint>
#include <random>

#include "ecx/circuit.hpp"
#include "ecx/egraph.hpp"
#include "ecx/simplify.hpp"
#include "ecx/treewidth.hpp"

namespace ecx {

struct EGraphGenOptions {
  std::uint32_t max_classes = 8;
  std::uint32_t max_nodes_per_class = 3;
  std::uint32_t max_deps = 3;
  /// Allow dependencies on any class (cycles possible); otherwise only on
  /// later classes, which keeps the dependency graph acyclic.
  bool allow_cycles = true;
};

/// Small random e-graph with integer costs 0..9. Children lists are populated
/// with real node ids so instances survive a render/parse round trip.
EGraph random_egraph(std::mt19937_64& rng, const EGraphGenOptions& opts = {});

/// Two-class core whose cheapest extraction closes a dependency cycle, so
/// enforcing acyclicity must pay a strictly higher cost. Decorated with a few
/// random leaf classes.
EGraph cyclic_cheapest_egraph(std::mt19937_64& rng);

/// Linear chain of `length` classes, two candidate nodes per class, constant
/// structural width regardless of length.
EGraph chain_egraph(std::size_t length);

/// Expression-shaped DAG: mostly singleton classes over a small op alphabet,
/// occasional 2-3 way alternatives, at least `min_nodes` nodes.
EGraph term_dag_egraph(std::mt19937_64& rng, std::size_t min_nodes = 200);

struct CircuitGenOptions {
  std::uint32_t max_vertices = 12;
  double input_fraction = 0.4;
  std::uint32_t max_in_degree = 3;
};

/// Random monotone circuit with integer input costs 0..9 and 1-2 outputs.
/// Gate-to-gate edges may form cycles.
Circuit random_circuit(std::mt19937_64& rng, const CircuitGenOptions& opts = {});

/// Circuit guaranteed to contain the match pattern of `rule`, with randomized
/// costs; used to make per-rule soundness corpora actually exercise the rule.
Circuit motif_circuit(std::mt19937_64& rng, RuleId rule);

/// Erdős–Rényi undirected graph G(n, p).
UGraph random_ugraph(std::mt19937_64& rng, std::size_t n, double edge_prob);

}  // namespace ecx
