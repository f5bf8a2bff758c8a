#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ecx/circuit.hpp"
#include "ecx/treewidth.hpp"

namespace ecx {

/// Appends a fresh AND vertex fed by every output and makes it the only
/// output. Satisfying, acyclic, and cost structure are unchanged; the new
/// vertex gives the table walk a one-vertex root bag to finish in.
std::pair<Circuit, std::uint32_t> add_output_gate(const Circuit& c);

struct DpOptions {
  /// Reject assignments whose true vertices close a directed cycle. Turning
  /// this off solves plain weighted satisfiability.
  bool enforce_acyclic = true;
  /// Keep the justification flags inside the table key. Turning this off
  /// merges summaries that differ only in pending obligations, which is the
  /// classic unsound shortcut; it exists so tests can demonstrate the miss.
  bool known_flags_in_key = true;
  /// 0 uses the library default; 1 forces the serial path. Results are
  /// identical for every thread count.
  int num_threads = 0;
  /// Polled once per bag; returning true abandons the run with DpCancelled.
  std::function<bool()> cancelled;
  /// Retain full tables (costs, flags, reachability) for inspection; the
  /// compact tables needed to read back the answer are always retained.
  bool keep_tables = false;
};

struct DpStats {
  std::size_t bags = 0;
  std::size_t peak_table = 0;
  std::size_t total_entries = 0;
};

struct DpResult {
  Evaluation evaluation;
  double cost = 0.0;
  bool acyclic = false;
  DpStats stats;
};

struct DpCancelled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Weighted minimum-cost satisfiability over a nice tree decomposition of the
/// circuit's underlying graph, rooted at a one-vertex bag holding
/// `out_vertex`. Summaries track the truth values of bag vertices, the
/// justification obligations still open for them, and (when enforcing
/// acyclicity) the transitive reachability among true bag vertices.
class DpEngine {
 public:
  DpEngine(const Circuit& c, const NiceTree& nt, std::uint32_t out_vertex, DpOptions opts = {});

  /// Runs the walk; nullopt when no satisfying assignment survives.
  std::optional<DpResult> run();

  // Inspection (valid after run()).
  std::size_t num_bags() const { return nt_.bags.size(); }
  const NiceBag& bag(std::uint32_t b) const { return nt_.bags.at(b); }
  std::size_t table_size(std::uint32_t b) const { return compact_.at(b).size(); }

  struct EntryView {
    double cost = 0.0;
    std::uint64_t values = 0;
    std::uint64_t justified = 0;
    std::vector<std::uint64_t> reach;  // one mask per bag position; empty without keep_tables
  };
  /// Requires keep_tables for justified/reach; cost and values always work.
  EntryView entry(std::uint32_t b, std::uint32_t i) const;

  /// Truth values decided in the subtree under entry (b, i): one slot per
  /// circuit vertex, -1 where the subtree has not inserted the vertex.
  std::vector<std::int8_t> partial_assignment(std::uint32_t b, std::uint32_t i) const;

 private:
  friend class DpBuilder;

  struct Entry {
    double cost = 0.0;
    std::uint64_t values = 0;
    std::uint64_t justified = 0;
    std::int32_t pred_l = -1;
    std::int32_t pred_r = -1;
  };
  struct Table {
    std::uint32_t width = 0;
    std::uint32_t reach_words = 0;  // width when tracking acyclicity, else 0
    std::vector<Entry> entries;
    std::vector<std::uint64_t> reach;  // reach_words words per entry
    const std::uint64_t* row(std::uint32_t i) const {
      return reach.data() + std::size_t(i) * reach_words;
    }
  };
  struct CompactEntry {
    double cost = 0.0;
    std::uint64_t values = 0;
    std::int32_t pred_l = -1;
    std::int32_t pred_r = -1;
  };

  Table process_leaf(std::uint32_t b) const;
  Table process_insert(std::uint32_t b, const Table& child) const;
  Table process_forget(std::uint32_t b, const Table& child) const;
  Table process_join(std::uint32_t b, const Table& left, const Table& right) const;

  const Circuit& c_;
  const NiceTree& nt_;
  std::uint32_t out_vertex_;
  DpOptions opts_;

  std::vector<std::vector<CompactEntry>> compact_;
  std::vector<Table> full_;  // only with keep_tables
  DpStats stats_;
  bool ran_ = false;
};

std::optional<DpResult> run_dp(const Circuit& c, const NiceTree& nt, std::uint32_t out_vertex,
                               const DpOptions& opts = {});

}  // namespace ecx
