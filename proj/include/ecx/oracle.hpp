#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ecx/circuit.hpp"
#include "ecx/egraph.hpp"

namespace ecx {

struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  std::optional<double> optimum;        // empty means unsatisfiable
  std::vector<Extraction> witnesses;    // every extraction attaining the optimum
  std::uint64_t count_satisfying = 0;   // candidates passing all filters short of minimality
};

/// Enumerates every assignment of "unused or one member" per class and keeps
/// the closed, satisfying, (optionally) acyclic, minimal extractions. Guards
/// the search space: product of (|class|+1) must not exceed 10^7. Set
/// `parallel` to split the enumeration across threads; results are identical
/// to the serial pass.
OracleResult brute_force_extract(const EGraph& g, bool require_acyclic, bool parallel = false);

/// All closed, satisfying, (optionally) acyclic, minimal extractions, in
/// enumeration order. Same size guard as brute_force_extract.
std::vector<Extraction> enumerate_minimal_extractions(const EGraph& g, bool require_acyclic);

struct CircuitOracleResult {
  std::optional<double> optimum;
  std::vector<Evaluation> witnesses;
  std::uint64_t count_satisfying = 0;
};

/// Minimum cost of a satisfying evaluation. With require_acyclic, enumerates
/// the 2^|inputs| assignments (guard: at most 22 inputs) and keeps those whose
/// least-fixpoint extension is satisfying and acyclic; witnesses are those
/// acyclic evaluations. Without it, valid satisfying evaluations may justify
/// themselves cyclically and are not captured by any input assignment, so the
/// search enumerates all 2^|V| assignments instead (guard: at most 18
/// vertices); witnesses are the valid satisfying evaluations attaining the
/// optimum. `parallel` splits the enumeration.
CircuitOracleResult brute_force_circuit(const Circuit& c, bool require_acyclic,
                                        bool parallel = false);

/// Exhaustive sweep over all 2^|V| assignments (guard: at most 18 vertices),
/// filtered to valid satisfying (optionally acyclic) minimal evaluations.
/// Used to validate the evaluation predicates on tiny circuits.
std::vector<Evaluation> enumerate_minimal_evaluations(const Circuit& c, bool require_acyclic);

/// Definitionally literal minimality: no proper subset of the true vertices
/// yields a valid satisfying evaluation. Guard: at most 20 true vertices.
bool brute_force_is_minimal(const Circuit& c, const Evaluation& a);

}  // namespace ecx
