// Command-line front end: convert, simplify, stats, extract, bench, check.
// Exit codes: 0 success, 2 unsatisfiable, 3 timeout, 4 bad input, 1 failed
// check or internal error.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "ecx/circuit.hpp"
#include "ecx/generator.hpp"
#include "ecx/json_io.hpp"
#include "ecx/oracle.hpp"
#include "ecx/pipeline.hpp"

namespace {

using namespace ecx;

constexpr int kExitCheckFailed = 1;
constexpr int kExitInternal = 1;
constexpr int kExitUnsat = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitBadInput = 4;

/// Inputs are files, or synthetic instances named gen:chain:<n>,
/// gen:random[:<classes>], gen:term[:<min-nodes>], gen:cyclic (seeded with
/// --seed plus the instance's position in the argument list).
EGraph load_egraph(const std::string& spec, std::uint64_t seed) {
  if (spec.rfind("gen:", 0) != 0) return parse_egraph_file(spec);
  std::string rest = spec.substr(4);
  std::string kind = rest;
  std::optional<std::size_t> param;
  if (auto colon = rest.find(':'); colon != std::string::npos) {
    kind = rest.substr(0, colon);
    try {
      param = std::stoull(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ParseError("bad generator parameter in " + spec);
    }
  }
  std::mt19937_64 rng(seed);
  if (kind == "chain") {
    if (!param || *param == 0) throw ParseError("gen:chain needs a positive length");
    return chain_egraph(*param);
  }
  if (kind == "random") {
    EGraphGenOptions o;
    if (param) o.max_classes = std::uint32_t(*param);
    return random_egraph(rng, o);
  }
  if (kind == "term") return term_dag_egraph(rng, param.value_or(200));
  if (kind == "cyclic") return cyclic_cheapest_egraph(rng);
  throw ParseError("unknown generator " + spec);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(path, text.back() == '\n' ? text : text + "\n");
  }
}

struct CommonOpts {
  std::string rules = "all";
  std::string heuristic = "min-degree";
  bool no_acyclic = false;
  double timeout = 15.0;
  int threads = 0;
  std::uint64_t seed = 1;
};

void add_rule_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--rules", o.rules,
                  "simplification rules: all, none, or a comma list of rule names");
  cmd->add_flag("--no-acyclic", o.no_acyclic,
                "allow cyclic support among the chosen nodes (plain satisfiability)");
}

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
  add_rule_flags(cmd, o);
  cmd->add_option("--heuristic", o.heuristic, "elimination order: min-degree or min-fill");
  cmd->add_option("--timeout", o.timeout, "per-instance wall-clock budget in seconds, 0 for none")
      ->capture_default_str();
  cmd->add_option("--threads", o.threads, "worker threads for the table sweep, 0 for the default");
  cmd->add_option("--seed", o.seed, "seed for gen: inputs")->capture_default_str();
}

std::vector<RuleId> parse_rules(const std::string& spec) {
  if (spec == "all") return {kAllRules.begin(), kAllRules.end()};
  if (spec == "none") return {};
  std::vector<RuleId> rules;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto r = rule_from_name(item);
    if (!r) throw ParseError("unknown rule name: " + item);
    rules.push_back(*r);
  }
  return rules;
}

PipelineOptions to_pipeline(const CommonOpts& o) {
  PipelineOptions p;
  p.rules = parse_rules(o.rules);
  if (o.heuristic == "min-degree") p.heuristic = EliminationHeuristic::MinDegree;
  else if (o.heuristic == "min-fill") p.heuristic = EliminationHeuristic::MinFill;
  else throw ParseError("unknown heuristic: " + o.heuristic);
  p.enforce_acyclic = !o.no_acyclic;
  p.timeout_seconds = o.timeout;
  p.num_threads = o.threads;
  return p;
}

void emit_rows(const std::string& csv_path, const std::vector<InstanceRecord>& rows) {
  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
  write_output(csv_path, out.str());
}

int run(int argc, char** argv) {
  CLI::App app{"provably optimal e-graph extraction via circuit satisfiability"};
  app.require_subcommand(1);

  std::string input, output, csv_path, emit_td, emit_log;
  std::vector<std::string> inputs;
  bool from_egraph = false, parallel = false;
  CommonOpts common;

  auto* convert = app.add_subcommand("convert", "e-graph file to its weighted circuit");
  convert->add_option("input", input, "e-graph JSON file or gen: spec")->required();
  convert->add_option("-o,--output", output, "output file, - for stdout");
  convert->add_option("--seed", common.seed, "seed for gen: inputs");

  auto* simplify = app.add_subcommand("simplify", "shrink a circuit, preserving its optimum");
  simplify->add_option("input", input, "circuit JSON file (or e-graph with --from-egraph)")
      ->required();
  simplify->add_flag("--from-egraph", from_egraph, "treat the input as an e-graph and convert it");
  simplify->add_option("-o,--output", output, "output file, - for stdout");
  simplify->add_option("--emit-log", emit_log, "write the replayable rewrite log here");
  simplify->add_option("--seed", common.seed, "seed for gen: inputs");
  add_rule_flags(simplify, common);

  auto* stats = app.add_subcommand("stats", "structure report without solving");
  stats->add_option("inputs", inputs, "e-graph files or gen: specs")->required();
  stats->add_option("--csv", csv_path, "CSV output file, - for stdout");
  add_solver_flags(stats, common);

  auto* extract = app.add_subcommand("extract", "solve for the optimal choice per class");
  extract->add_option("input", input, "e-graph JSON file or gen: spec")->required();
  extract->add_option("-o,--output", output, "extraction output file, - for stdout");
  extract->add_option("--emit-td", emit_td, "write the tree decomposition here");
  extract->add_option("--emit-log", emit_log, "write the rewrite log here");
  add_solver_flags(extract, common);

  auto* bench = app.add_subcommand("bench", "solve a batch and report one CSV row per instance");
  bench->add_option("inputs", inputs, "e-graph files or gen: specs")->required();
  bench->add_option("--csv", csv_path, "CSV output file, - for stdout");
  bench->add_flag("--parallel", parallel, "process independent inputs concurrently");
  add_solver_flags(bench, common);

  std::size_t random_batch = 0;
  auto* check = app.add_subcommand("check", "compare the full pipeline against the exhaustive oracle");
  check->add_option("inputs", inputs, "e-graph files or gen: specs");
  check->add_option("--random", random_batch, "also check this many seeded random e-graphs");
  add_solver_flags(check, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;  // 0 covers --help
  }

  if (convert->parsed()) {
    EGraph g = load_egraph(input, common.seed);
    write_output(output, circuit_to_json(egraph_to_circuit(g).first));
    return 0;
  }

  if (simplify->parsed()) {
    Circuit c = from_egraph ? egraph_to_circuit(load_egraph(input, common.seed)).first
                            : circuit_from_json(read_text_file(input));
    SimplifyOptions sopts;
    sopts.rules = parse_rules(common.rules);
    if (common.no_acyclic) {
      std::erase(sopts.rules, RuleId::RemoveLoneOrLoops);
    }
    SimplifyResult r = simplify_fixpoint(c, sopts);
    write_output(output, circuit_to_json(r.circuit));
    if (!emit_log.empty()) write_output(emit_log, rewrite_log_to_json(r));
    std::size_t total = 0;
    for (std::size_t f : r.fired) total += f;
    std::fprintf(stderr, "%zu -> %zu vertices, %zu -> %zu edges, %zu rewrites\n",
                 std::size_t(c.num_vertices()), std::size_t(r.circuit.num_vertices()),
                 std::size_t(c.num_edges()), std::size_t(r.circuit.num_edges()), total);
    return 0;
  }

  if (stats->parsed()) {
    PipelineOptions p = to_pipeline(common);
    std::vector<InstanceRecord> rows;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      try {
        rows.push_back(stats_from_egraph(load_egraph(inputs[i], common.seed + i), p, inputs[i]));
      } catch (const TimeoutError&) {
        InstanceRecord rec;
        rec.file = inputs[i];
        rec.status = "timeout";
        rows.push_back(rec);
      }
    }
    emit_rows(csv_path, rows);
    return 0;
  }

  if (extract->parsed()) {
    PipelineOptions p = to_pipeline(common);
    p.keep_artifacts = !emit_td.empty() || !emit_log.empty();
    EGraph g = load_egraph(input, common.seed);
    ExtractReport rep = extract_from_egraph(g, p, input);
    if (!emit_td.empty() && rep.decomposition)
      write_output(emit_td, decomposition_to_json(*rep.decomposition));
    if (!emit_log.empty() && rep.simplify) write_output(emit_log, rewrite_log_to_json(*rep.simplify));
    if (!rep.extraction) {
      write_output(output, "{\n  \"satisfiable\": false\n}");
      std::fprintf(stderr, "unsatisfiable: no%s choice covers the roots\n",
                   p.enforce_acyclic ? " acyclic" : "");
      return kExitUnsat;
    }
    write_output(output, extraction_to_json(g, *rep.extraction, rep.cost, rep.acyclic));
    return 0;
  }

  if (bench->parsed()) {
    PipelineOptions p = to_pipeline(common);
    p.parallel_files = parallel;
    std::vector<InstanceRecord> rows;
    bool any_gen = false;
    for (const auto& s : inputs) any_gen = any_gen || s.rfind("gen:", 0) == 0;
    if (any_gen) {
      // Generated instances have no file to reopen, so expand them up front.
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        EGraph g = load_egraph(inputs[i], common.seed + i);
        try {
          rows.push_back(extract_from_egraph(g, p, inputs[i]).record);
        } catch (const TimeoutError&) {
          InstanceRecord rec;
          rec.file = inputs[i];
          rec.status = "timeout";
          rows.push_back(rec);
        }
      }
    } else {
      rows = bench_files(inputs, p);
    }
    emit_rows(csv_path, rows);
    return 0;
  }

  // check: every input (plus an optional random batch) is solved twice, by
  // the pipeline and by exhaustive enumeration, and the optima must agree.
  PipelineOptions p = to_pipeline(common);
  std::vector<std::pair<std::string, EGraph>> cases;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    cases.emplace_back(inputs[i], load_egraph(inputs[i], common.seed + i));
  }
  std::mt19937_64 rng(common.seed);
  for (std::size_t i = 0; i < random_batch; ++i) {
    cases.emplace_back("random-" + std::to_string(i), random_egraph(rng));
  }
  if (cases.empty()) throw ParseError("check needs input files or --random N");

  std::size_t matches = 0, mismatches = 0, skipped = 0;
  for (auto& [name, g] : cases) {
    OracleResult oracle;
    try {
      oracle = brute_force_extract(g, p.enforce_acyclic);
    } catch (const InstanceTooLarge&) {
      std::printf("%s: oracle skipped: too large\n", name.c_str());
      ++skipped;
      continue;
    }
    std::optional<double> pipeline_cost;
    try {
      ExtractReport rep = extract_from_egraph(g, p, name);
      if (rep.extraction) pipeline_cost = rep.cost;
    } catch (const TimeoutError&) {
      std::printf("%s: pipeline timeout\n", name.c_str());
      ++mismatches;
      continue;
    }
    bool both_unsat = !oracle.optimum && !pipeline_cost;
    bool agree = both_unsat || (oracle.optimum && pipeline_cost &&
                                std::abs(*oracle.optimum - *pipeline_cost) <= 1e-9);
    if (agree) {
      ++matches;
      if (both_unsat) std::printf("%s: MATCH both unsatisfiable\n", name.c_str());
      else std::printf("%s: MATCH cost=%.10g\n", name.c_str(), *pipeline_cost);
    } else {
      ++mismatches;
      std::printf("%s: MISMATCH pipeline=%s oracle=%s\n", name.c_str(),
                  pipeline_cost ? std::to_string(*pipeline_cost).c_str() : "unsat",
                  oracle.optimum ? std::to_string(*oracle.optimum).c_str() : "unsat");
    }
  }
  std::printf("%zu match(es), %zu mismatch(es), %zu skipped\n", matches, mismatches, skipped);
  return mismatches == 0 ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const TimeoutError& e) {
    std::fprintf(stderr, "timeout: %s\n", e.what());
    return kExitTimeout;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitBadInput;
  } catch (const EGraphError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
