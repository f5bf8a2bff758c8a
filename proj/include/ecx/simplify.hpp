#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ecx/circuit.hpp"

namespace ecx {

/// The optimum-preserving rewrite rules, in the order the fixpoint tries them.
enum class RuleId : std::uint8_t {
  RemoveUnreachable = 0,   // drop output-unreachable vertices the rest can't force into a cycle
  ContractIndegreeOne,     // a gate with one in-edge copies its source
  ContractSameGate,        // a gate feeding only one same-tagged gate merges up
  SameGateNoShortcut,      // drop an edge paralleled by a same-tagged path
  Factoring,               // (w|x1)&...&(w|xn) becomes w | (x1&...&xn), dually
  RemoveLoneOrLoops,       // an all-AND cycle through one OR pins a pinnable closing AND to 0
  CollectVariables,        // variables with equal all-AND consumers merge, costs add
};

constexpr std::array<RuleId, 7> kAllRules = {
    RuleId::RemoveUnreachable,  RuleId::ContractIndegreeOne, RuleId::ContractSameGate,
    RuleId::SameGateNoShortcut, RuleId::Factoring,           RuleId::RemoveLoneOrLoops,
    RuleId::CollectVariables,
};

std::string_view rule_name(RuleId r);
std::optional<RuleId> rule_from_name(std::string_view name);

/// One applied match, with everything needed to replay it mechanically:
/// vertex ids refer to the working index space (original vertices keep their
/// ids; vertices added by Factoring get fresh ones).
struct RewriteRecord {
  struct NewVertex {
    std::uint32_t id;
    VertexKind kind;
    double cost;
  };

  RuleId rule;
  std::vector<std::uint32_t> removed_vertices;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> removed_edges;
  std::vector<NewVertex> added_vertices;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> added_edges;
  std::vector<std::pair<std::uint32_t, VertexKind>> retyped;   // output rescued as empty OR
  std::vector<std::pair<std::uint32_t, double>> cost_updates;  // variable merges
  std::vector<std::uint32_t> marked_output;                    // output membership transfers
  // Updates to the variable provenance map: original Input vertex ->
  // surviving working vertex, or -1 once the variable is pinned to 0.
  std::vector<std::pair<std::uint32_t, std::int64_t>> provenance;
};

using RewriteLog = std::vector<RewriteRecord>;

struct SimplifyOptions {
  std::vector<RuleId> rules{kAllRules.begin(), kAllRules.end()};
  /// Fixpoint guard. Rules other than Factoring strictly shrink |V|+|E| and
  /// Factoring is tagged once per hub gate per run, so the guard only trips
  /// on a rule-interaction bug; the result so far is then returned with
  /// iteration_limit_hit set.
  std::size_t max_cycles = 0;  // 0 means derive from the circuit size
};

struct SimplifyResult {
  Circuit circuit;
  RewriteLog log;
  /// Working index -> index in `circuit`, or UINT32_MAX for removed vertices.
  std::vector<std::uint32_t> compaction;
  std::size_t working_vertex_count = 0;
  /// Original vertex -> final index of the variable now carrying its value
  /// (-1 once pinned to 0). Meaningful only at original Input positions.
  std::vector<std::int64_t> provenance;
  std::array<std::size_t, 7> fired{};
  std::size_t cycles = 0;
  bool iteration_limit_hit = false;
};

/// One synchronous pass of a single rule. Matches are scanned left-to-right
/// by vertex index and a vertex participates in at most one match per pass.
SimplifyResult apply_rule(const Circuit& c, RuleId rule);

/// Applies passes of the selected rules in enum order until none fires.
SimplifyResult simplify_fixpoint(const Circuit& c, const SimplifyOptions& opts = {});

/// Replays a rewrite log against the original circuit and returns the
/// compacted result; used to check that records describe their rewrites
/// completely.
Circuit replay_log(const Circuit& original, const SimplifyResult& r);

struct RecoveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Maps a satisfying evaluation of the simplified circuit back to one of the
/// original circuit: original variables take the value of the variable now
/// carrying them (0 once pinned), and gates follow. With expect_acyclic the
/// gates are re-derived as a least fixpoint and the result is checked to be
/// satisfying, acyclic, and cost-identical (RecoveryError otherwise; it would
/// mean an unsound rewrite). Without it, self-justifying gate cycles are kept
/// by taking the greatest valid evaluation over the same inputs and trimming
/// it back to a minimal one.
Evaluation recover_evaluation(const Circuit& original, const SimplifyResult& r,
                              const Evaluation& simplified_eval, bool expect_acyclic = true);

}  // namespace ecx
