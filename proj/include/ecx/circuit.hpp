#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecx/egraph.hpp"

namespace ecx {

struct CircuitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VertexKind : std::uint8_t { Input, And, Or };

/// A weighted monotone circuit over a directed graph. Inputs are the
/// in-degree-0 cost-bearing vertices; every other vertex carries an AND or OR
/// tag and at least the construction paths in this library keep its in-degree
/// positive. Parallel edges and self-loops are rejected. A gate with an empty
/// in-list (possible only transiently during rewriting) evaluates as the
/// empty conjunction (AND = 1) or disjunction (OR = 0).
class Circuit {
 public:
  std::size_t num_vertices() const { return kind_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  VertexKind kind(std::uint32_t v) const { return kind_.at(v); }
  double cost(std::uint32_t v) const { return cost_.at(v); }
  const std::vector<std::uint32_t>& in(std::uint32_t v) const { return in_.at(v); }
  const std::vector<std::uint32_t>& out(std::uint32_t v) const { return out_.at(v); }
  const std::vector<std::uint32_t>& outputs() const { return outputs_; }
  bool is_output(std::uint32_t v) const { return output_flag_.at(v) != 0; }

  /// Throws CircuitError if structural invariants are broken (bad endpoints,
  /// duplicate or self edges, an Input with in-edges, a cost on a gate).
  void validate() const;

 private:
  friend class CircuitBuilder;
  std::vector<VertexKind> kind_;
  std::vector<double> cost_;
  std::vector<std::vector<std::uint32_t>> in_, out_;
  std::vector<std::uint32_t> outputs_;
  std::vector<std::uint8_t> output_flag_;
  std::size_t num_edges_ = 0;
};

class CircuitBuilder {
 public:
  std::uint32_t add_vertex(VertexKind kind, double cost = 0.0);
  void add_edge(std::uint32_t src, std::uint32_t dst);
  void mark_output(std::uint32_t v);
  /// Sorts adjacency lists, validates, and returns the finished circuit.
  Circuit build();

 private:
  Circuit c_;
};

/// Vertex layout of a converted e-graph: for node u, x_of[u] is its costed
/// variable and and_of[u] its AND gate; or_of[c] is the OR gate of class c.
struct NodeMap {
  std::vector<std::uint32_t> x_of, and_of, or_of;

  enum class Role : std::uint8_t { Variable, NodeAnd, ClassOr };
  struct VertexInfo {
    Role role;
    std::uint32_t index;  // node index for Variable/NodeAnd, class index for ClassOr
  };
  std::vector<VertexInfo> info;
};

/// Converts an e-graph into a circuit: each node u becomes a variable x_u
/// feeding an AND gate, each class C an OR gate over its members' AND gates,
/// and each dependency (u, C) an edge from OR_C into AND_u. Root classes
/// become the circuit outputs; x_u carries u's cost.
std::pair<Circuit, NodeMap> egraph_to_circuit(const EGraph& g);

/// A total 0/1 assignment to the circuit's vertices.
struct Evaluation {
  std::vector<std::uint8_t> value;

  bool truth(std::uint32_t v) const { return value.at(v) != 0; }
};

/// Every gate equals its operation applied to its in-neighbors' values.
bool is_valid_evaluation(const Circuit& c, const Evaluation& a);
/// All output vertices are 1.
bool is_satisfying(const Circuit& c, const Evaluation& a);
/// The subgraph induced by true vertices contains no directed cycle.
bool is_acyclic_evaluation(const Circuit& c, const Evaluation& a);
/// No valid satisfying evaluation is strictly below `a` pointwise. Exact for
/// every monotone circuit: single-variable removal cascades cover drops that
/// touch an input, and a search over self-supporting gate clusters (branching
/// only when a cluster would force an excluded vertex) covers the rest.
bool is_minimal(const Circuit& c, const Evaluation& a);

/// Sum of the costs of true Input vertices.
double evaluation_cost(const Circuit& c, const Evaluation& a);

struct FixpointResult {
  Evaluation evaluation;
  bool acyclic = false;
};

/// Least-fixpoint extension of an input assignment: gates fire once their
/// operation is satisfied by already-true in-neighbors. Gate positions of
/// `inputs` are ignored. When the result's true subgraph is acyclic it is the
/// unique acyclic valid evaluation with those input values.
FixpointResult evaluate_from_inputs(const Circuit& c, const std::vector<std::uint8_t>& inputs);

/// Repeatedly removes droppable parts of a valid satisfying evaluation (input
/// removal cascades and self-supporting gate clusters) until none remains.
/// The result is valid, satisfying, pointwise below `a`, and minimal.
Evaluation minimize_evaluation(const Circuit& c, const Evaluation& a);

struct BijectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Image of an extraction under the conversion: x_u and AND_u are 1 exactly
/// when u is chosen, OR_C is 1 exactly when C has a choice.
Evaluation extraction_to_evaluation(const EGraph& g, const NodeMap& m, const Extraction& x);

/// Inverse direction for minimal satisfying evaluations: class C maps to the
/// unique node u with AND_u true. Throws BijectionError if some class has two
/// true AND gates.
Extraction evaluation_to_extraction(const EGraph& g, const NodeMap& m, const Evaluation& a);

}  // namespace ecx
