#include "ecx/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecx/circuit.hpp"
#include "ecx/json_io.hpp"

namespace ecx {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

constexpr double kCostTol = 1e-6;

std::vector<RuleId> active_rules(const PipelineOptions& opts) {
  std::vector<RuleId> rules = opts.rules;
  if (!opts.enforce_acyclic) {
    rules.erase(std::remove(rules.begin(), rules.end(), RuleId::RemoveLoneOrLoops), rules.end());
  }
  return rules;
}

/// Drops true inputs that no output depends on, then re-derives the gates.
/// Works backwards from the outputs through true vertices, taking every
/// in-neighbor of an AND and the lowest true in-neighbor of an OR; inputs the
/// walk never reaches are turned off. Linear, unlike the general minimizer,
/// and at a solver optimum the dropped inputs are all zero-cost.
Evaluation prune_unjustified(const Circuit& c, const Evaluation& a) {
  const std::uint32_t n = c.num_vertices();
  std::vector<std::uint8_t> needed(n, 0);
  std::vector<std::uint32_t> stack(c.outputs().begin(), c.outputs().end());
  for (std::uint32_t v : stack) needed[v] = 1;
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    if (c.kind(v) == VertexKind::Input) continue;
    if (c.kind(v) == VertexKind::And) {
      for (std::uint32_t w : c.in(v)) {
        if (!needed[w]) { needed[w] = 1; stack.push_back(w); }
      }
    } else {
      std::uint32_t pick = n;
      for (std::uint32_t w : c.in(v)) {
        if (a.truth(w) && w < pick) pick = w;
      }
      if (pick < n && !needed[pick]) { needed[pick] = 1; stack.push_back(pick); }
    }
  }
  std::vector<std::uint8_t> inputs(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (c.kind(v) == VertexKind::Input) inputs[v] = a.truth(v) && needed[v] ? 1 : 0;
  }
  return evaluate_from_inputs(c, inputs).evaluation;
}

struct Deadline {
  Clock::time_point at{};
  bool active = false;

  explicit Deadline(const PipelineOptions& opts) {
    if (opts.timeout_seconds > 0) {
      active = true;
      at = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(opts.timeout_seconds));
    }
  }
  bool expired() const { return active && Clock::now() > at; }
  void check(const char* stage) const {
    if (expired()) throw TimeoutError(std::string("time budget exhausted during ") + stage);
  }
};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string csv_header() {
  return "file,classes,nodes,deps,verts_before,edges_before,width_before,"
         "verts_after,edges_after,width_after,d_verts,d_edges,d_width,"
         "avg_undirected_degree,nice_bags,"
         "dp_peak,dp_total,optimum,acyclic,ms_convert,ms_simplify,ms_decompose,"
         "ms_dp,ms_recover,ms_total,status";
}

std::string csv_row(const InstanceRecord& r) {
  // The d_* columns are (after - before) / before; blank when before is 0.
  auto delta = [](std::size_t before, std::size_t after) {
    if (before == 0) return std::string();
    return fmt("%.4f", (double(after) - double(before)) / double(before));
  };
  std::ostringstream out;
  out << csv_escape(r.file) << ',' << r.classes << ',' << r.nodes << ',' << r.deps << ','
      << r.verts_before << ',' << r.edges_before << ',' << r.width_before << ','
      << r.verts_after << ',' << r.edges_after << ',' << r.width_after << ','
      << delta(r.verts_before, r.verts_after) << ',' << delta(r.edges_before, r.edges_after) << ','
      << delta(r.width_before, r.width_after) << ','
      << fmt("%.4f", r.avg_undirected_degree) << ',' << r.nice_bags << ',' << r.dp_peak << ','
      << r.dp_total << ',';
  if (r.has_optimum) out << fmt("%.10g", r.optimum) << ',' << (r.acyclic ? 1 : 0) << ',';
  else out << ",,";
  out << fmt("%.3f", r.times.convert_ms) << ',' << fmt("%.3f", r.times.simplify_ms) << ','
      << fmt("%.3f", r.times.decompose_ms) << ',' << fmt("%.3f", r.times.dp_ms) << ','
      << fmt("%.3f", r.times.recover_ms) << ',' << fmt("%.3f", r.times.total_ms) << ','
      << r.status;
  return out.str();
}

ExtractReport extract_from_egraph(const EGraph& g, const PipelineOptions& opts,
                                  const std::string& label) {
  const auto t0 = Clock::now();
  Deadline deadline(opts);

  ExtractReport rep;
  InstanceRecord& rec = rep.record;
  rec.file = label;
  rec.classes = g.num_classes();
  rec.nodes = g.num_nodes();
  rec.deps = g.num_deps();

  auto converted = egraph_to_circuit(g);
  const Circuit& c0 = converted.first;
  const NodeMap& map = converted.second;
  rec.verts_before = c0.num_vertices();
  rec.edges_before = c0.num_edges();
  const auto t1 = Clock::now();
  rec.times.convert_ms = ms_since(t0, t1);
  deadline.check("conversion");

  SimplifyOptions sopts;
  sopts.rules = active_rules(opts);
  SimplifyResult sr = simplify_fixpoint(c0, sopts);
  rec.verts_after = sr.circuit.num_vertices();
  rec.edges_after = sr.circuit.num_edges();
  const auto t2 = Clock::now();
  rec.times.simplify_ms = ms_since(t1, t2);
  deadline.check("simplification");

  {
    auto before = add_output_gate(c0);
    rec.width_before = tree_decomposition(underlying_graph(before.first), opts.heuristic).width();
  }
  deadline.check("decomposition");
  auto gated = add_output_gate(sr.circuit);
  const Circuit& c1 = gated.first;
  const std::uint32_t u_out = gated.second;
  UGraph ug = underlying_graph(c1);
  rec.avg_undirected_degree =
      ug.num_vertices() == 0 ? 0.0 : 2.0 * double(ug.num_edges()) / double(ug.num_vertices());
  TreeDecomposition td = tree_decomposition(ug, opts.heuristic);
  NiceTree nt = to_nice(td, u_out);
  rec.width_after = td.width();
  rec.nice_bags = nt.bags.size();
  const auto t3 = Clock::now();
  rec.times.decompose_ms = ms_since(t2, t3);
  deadline.check("decomposition");

  DpOptions dopts;
  dopts.enforce_acyclic = opts.enforce_acyclic;
  dopts.num_threads = opts.num_threads;
  if (deadline.active) {
    auto at = deadline.at;
    dopts.cancelled = [at] { return Clock::now() > at; };
  }
  std::optional<DpResult> dp;
  try {
    dp = run_dp(c1, nt, u_out, dopts);
  } catch (const DpCancelled&) {
    throw TimeoutError("time budget exhausted during the table sweep");
  }
  const auto t4 = Clock::now();
  rec.times.dp_ms = ms_since(t3, t4);
  if (dp) {
    rec.dp_peak = dp->stats.peak_table;
    rec.dp_total = dp->stats.total_entries;
  }

  if (opts.keep_artifacts) {
    rep.decomposition = std::move(td);
    rep.nice = std::move(nt);
  }

  if (!dp) {
    rec.status = "unsat";
    rec.times.total_ms = ms_since(t0, Clock::now());
    if (opts.keep_artifacts) rep.simplify = std::move(sr);
    return rep;
  }

  Evaluation on_simplified;
  on_simplified.value.assign(dp->evaluation.value.begin(),
                             dp->evaluation.value.begin() + sr.circuit.num_vertices());
  Evaluation recovered = recover_evaluation(c0, sr, on_simplified, opts.enforce_acyclic);
  Evaluation final_eval =
      opts.enforce_acyclic ? prune_unjustified(c0, recovered) : std::move(recovered);
  const double final_cost = evaluation_cost(c0, final_eval);
  if (std::abs(final_cost - dp->cost) > kCostTol) {
    throw std::logic_error("recovered assignment cost disagrees with the table optimum");
  }

  Extraction x = evaluation_to_extraction(g, map, final_eval);
  ExtractionValidity validity = validate_extraction(g, x);
  if (!validity.is_extraction || !validity.is_satisfying || !validity.is_minimal ||
      (opts.enforce_acyclic && !validity.is_acyclic)) {
    throw std::logic_error("recovered choice fails validation: " +
                           (validity.violations.empty() ? std::string("unknown")
                                                        : validity.violations.front()));
  }
  rep.extraction = std::move(x);
  rep.cost = final_cost;
  rep.acyclic = validity.is_acyclic;
  rec.optimum = final_cost;
  rec.has_optimum = true;
  rec.acyclic = validity.is_acyclic;
  rec.times.recover_ms = ms_since(t4, Clock::now());
  rec.times.total_ms = ms_since(t0, Clock::now());
  if (opts.keep_artifacts) rep.simplify = std::move(sr);
  return rep;
}

ExtractReport extract_file(const std::string& path, const PipelineOptions& opts) {
  EGraph g = parse_egraph_file(path);
  return extract_from_egraph(g, opts, path);
}

InstanceRecord stats_from_egraph(const EGraph& g, const PipelineOptions& opts,
                                 const std::string& label) {
  const auto t0 = Clock::now();
  Deadline deadline(opts);
  InstanceRecord rec;
  rec.file = label;
  rec.classes = g.num_classes();
  rec.nodes = g.num_nodes();
  rec.deps = g.num_deps();

  auto converted = egraph_to_circuit(g);
  const Circuit& c0 = converted.first;
  rec.verts_before = c0.num_vertices();
  rec.edges_before = c0.num_edges();
  const auto t1 = Clock::now();
  rec.times.convert_ms = ms_since(t0, t1);
  deadline.check("conversion");

  SimplifyOptions sopts;
  sopts.rules = active_rules(opts);
  SimplifyResult sr = simplify_fixpoint(c0, sopts);
  rec.verts_after = sr.circuit.num_vertices();
  rec.edges_after = sr.circuit.num_edges();
  const auto t2 = Clock::now();
  rec.times.simplify_ms = ms_since(t1, t2);
  deadline.check("simplification");

  {
    auto before = add_output_gate(c0);
    rec.width_before = tree_decomposition(underlying_graph(before.first), opts.heuristic).width();
  }
  deadline.check("decomposition");
  auto gated = add_output_gate(sr.circuit);
  UGraph ug = underlying_graph(gated.first);
  rec.avg_undirected_degree =
      ug.num_vertices() == 0 ? 0.0 : 2.0 * double(ug.num_edges()) / double(ug.num_vertices());
  TreeDecomposition td = tree_decomposition(ug, opts.heuristic);
  rec.width_after = td.width();
  rec.nice_bags = to_nice(td, gated.second).bags.size();
  rec.times.decompose_ms = ms_since(t2, Clock::now());
  rec.times.total_ms = ms_since(t0, Clock::now());
  return rec;
}

InstanceRecord stats_file(const std::string& path, const PipelineOptions& opts) {
  EGraph g = parse_egraph_file(path);
  return stats_from_egraph(g, opts, path);
}

InstanceRecord bench_file(const std::string& path, const PipelineOptions& opts) {
  const auto t0 = Clock::now();
  try {
    ExtractReport rep = extract_file(path, opts);
    return rep.record;
  } catch (const TimeoutError&) {
    InstanceRecord rec;
    rec.file = path;
    rec.status = "timeout";
    rec.times.total_ms = ms_since(t0, Clock::now());
    return rec;
  } catch (const std::exception&) {
    InstanceRecord rec;
    rec.file = path;
    rec.status = "error";
    rec.times.total_ms = ms_since(t0, Clock::now());
    return rec;
  }
}

std::vector<InstanceRecord> bench_files(const std::vector<std::string>& paths,
                                        const PipelineOptions& opts) {
  std::vector<InstanceRecord> rows(paths.size());
#ifdef _OPENMP
  if (opts.parallel_files && paths.size() > 1) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < std::int64_t(paths.size()); ++i) {
      rows[std::size_t(i)] = bench_file(paths[std::size_t(i)], opts);
    }
    return rows;
  }
#endif
  for (std::size_t i = 0; i < paths.size(); ++i) rows[i] = bench_file(paths[i], opts);
  return rows;
}

}  // namespace ecx
