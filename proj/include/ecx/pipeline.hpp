#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecx/dp.hpp"
#include "ecx/egraph.hpp"
#include "ecx/simplify.hpp"
#include "ecx/treewidth.hpp"

namespace ecx {

struct PipelineOptions {
  /// Simplification rules to run; empty skips simplification entirely.
  std::vector<RuleId> rules{kAllRules.begin(), kAllRules.end()};
  EliminationHeuristic heuristic = EliminationHeuristic::MinDegree;
  /// Reject choices whose dependencies close a cycle. When off, the loop
  /// breaker RemoveLoneOrLoops is excluded from `rules` automatically: its
  /// rewrite is only cost-preserving for acyclic assignments.
  bool enforce_acyclic = true;
  int num_threads = 0;
  /// Wall-clock budget in seconds for a single instance; 0 disables it.
  /// Checked between stages and once per bag inside the table sweep.
  double timeout_seconds = 0.0;
  /// Retain the decomposition, nice tree, and rewrite log on the report.
  bool keep_artifacts = false;
  /// Let bench_files process independent inputs concurrently. Per-file
  /// results are identical either way.
  bool parallel_files = false;
};

struct TimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageTimes {
  double convert_ms = 0, simplify_ms = 0, decompose_ms = 0, dp_ms = 0, recover_ms = 0;
  double total_ms = 0;
};

/// One row of the shared stats/bench schema. Structure-only runs leave the
/// solver fields at their defaults (has_optimum false, zero timings).
struct InstanceRecord {
  std::string file;
  std::size_t classes = 0, nodes = 0, deps = 0;
  std::size_t verts_before = 0, edges_before = 0, width_before = 0;
  std::size_t verts_after = 0, edges_after = 0, width_after = 0;
  double avg_undirected_degree = 0.0;  // of the graph handed to the solver
  std::size_t nice_bags = 0, dp_peak = 0, dp_total = 0;
  double optimum = 0.0;
  bool has_optimum = false;
  bool acyclic = false;
  StageTimes times;
  std::string status = "ok";  // ok | unsat | timeout | error
};

std::string csv_header();
std::string csv_row(const InstanceRecord& r);

struct ExtractReport {
  /// Empty when no satisfying (acyclic, if enforced) assignment exists.
  std::optional<Extraction> extraction;
  double cost = 0.0;
  bool acyclic = false;
  InstanceRecord record;
  /// Present only with keep_artifacts.
  std::optional<TreeDecomposition> decomposition;
  std::optional<NiceTree> nice;
  std::optional<SimplifyResult> simplify;
};

/// Full solve: convert, simplify, decompose, run the table sweep, and map the
/// winning assignment back to a choice per class. Throws TimeoutError when
/// the budget runs out and ParseError (from the file variant) on bad input.
ExtractReport extract_from_egraph(const EGraph& g, const PipelineOptions& opts = {},
                                  const std::string& label = "");
ExtractReport extract_file(const std::string& path, const PipelineOptions& opts = {});

/// Structure-only pass: sizes, widths before/after simplification, and the
/// average degree of the graph the solver would see. No table sweep.
InstanceRecord stats_from_egraph(const EGraph& g, const PipelineOptions& opts = {},
                                 const std::string& label = "");
InstanceRecord stats_file(const std::string& path, const PipelineOptions& opts = {});

/// Full solve wrapped for batch runs: failures become status fields instead
/// of exceptions ("timeout", "error", "unsat").
InstanceRecord bench_file(const std::string& path, const PipelineOptions& opts = {});
std::vector<InstanceRecord> bench_files(const std::vector<std::string>& paths,
                                        const PipelineOptions& opts = {});

}  // namespace ecx
