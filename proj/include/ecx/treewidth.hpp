#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecx/circuit.hpp"

namespace ecx {

/// Simple undirected graph on 0..n-1 with sorted, duplicate-free adjacency.
struct UGraph {
  std::vector<std::vector<std::uint32_t>> adj;

  std::size_t num_vertices() const { return adj.size(); }
  std::size_t num_edges() const;
};

/// Underlying undirected graph of a circuit; opposite directed edges collapse
/// into one undirected edge.
UGraph underlying_graph(const Circuit& c);

struct TreeDecomposition {
  std::vector<std::vector<std::uint32_t>> bags;  // each sorted
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  /// Largest bag size minus one (0 when every bag is empty).
  std::size_t width() const;
};

enum class EliminationHeuristic : std::uint8_t { MinDegree, MinFill };

/// Elimination-order decomposition: repeatedly eliminate the vertex of
/// minimum degree (or minimum fill-in), ties to the lowest index, turning its
/// remaining neighborhood into a clique. Each elimination contributes the bag
/// {v} ∪ N(v), attached to the bag of its earliest-eliminated member other
/// than v. Components yield separate trees joined under one empty bag.
TreeDecomposition tree_decomposition(const UGraph& g,
                                     EliminationHeuristic h = EliminationHeuristic::MinDegree);

/// Checks the three decomposition properties (coverage of vertices, coverage
/// of edges, connectivity of each vertex's bags) plus tree-ness of the bag
/// graph. On failure fills `why` when given.
bool validate_decomposition(const UGraph& g, const TreeDecomposition& td, std::string* why = nullptr);

enum class BagKind : std::uint8_t { Leaf, Insert, Forget, Join };

constexpr std::uint32_t kNoVertex = UINT32_MAX;

struct NiceBag {
  BagKind kind = BagKind::Leaf;
  std::vector<std::uint32_t> vertices;  // sorted
  std::uint32_t special = kNoVertex;    // inserted / forgotten vertex
  std::int64_t parent = -1;             // -1 at the root
  std::vector<std::uint32_t> children;
};

struct NiceTree {
  std::vector<NiceBag> bags;
  std::uint32_t root = 0;
};

/// Refines a decomposition into a nice one rooted at a bag of size one
/// holding `must_contain`: leaves are empty, every other bag inserts one
/// vertex, forgets one vertex, or joins two children with identical content.
/// Multi-child bags become left-leaning chains of joins.
NiceTree to_nice(const TreeDecomposition& td, std::uint32_t must_contain);

/// Full decomposition validity of the nice tree plus the shape constraints of
/// each bag kind; the root must be exactly {must_contain}.
bool validate_nice(const UGraph& g, const NiceTree& nt, std::uint32_t must_contain,
                   std::string* why = nullptr);

}  // namespace ecx
