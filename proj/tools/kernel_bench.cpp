// Compares the serial and OpenMP table-sweep kernels on the same instances
// and checks they produce identical assignments, then does the same for
// batch-level parallelism across independent instances. Exits nonzero on any
// mismatch, so a run doubles as a determinism check.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecx/circuit.hpp"
#include "ecx/dp.hpp"
#include "ecx/generator.hpp"
#include "ecx/pipeline.hpp"
#include "ecx/simplify.hpp"
#include "ecx/treewidth.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using ecx::Circuit;
using ecx::EGraph;

double ms_since(Clock::time_point a) {
  return std::chrono::duration<double, std::milli>(Clock::now() - a).count();
}

struct Prepared {
  std::string name;
  Circuit circuit;
  ecx::NiceTree nice;
  std::uint32_t u_out = 0;
  std::size_t width = 0;
};

Prepared prepare(std::string name, const EGraph& g) {
  auto [c0, map] = ecx::egraph_to_circuit(g);
  (void)map;
  ecx::SimplifyResult sr = ecx::simplify_fixpoint(c0);
  auto [c1, u_out] = ecx::add_output_gate(sr.circuit);
  ecx::TreeDecomposition td = ecx::tree_decomposition(ecx::underlying_graph(c1));
  Prepared p{std::move(name), c1, ecx::to_nice(td, u_out), u_out, td.width()};
  return p;
}

int run() {
  int failures = 0;
#ifdef _OPENMP
  // At least 4 workers even on small machines: with one core the point of
  // the comparison is identical results, not speed.
  const int max_threads = std::max(4, omp_get_max_threads());
#else
  const int max_threads = 1;
#endif
  std::printf("table-sweep kernels, serial vs %d threads\n\n", max_threads);

  std::vector<Prepared> instances;
  for (std::uint64_t seed : {11u, 29u, 47u}) {
    std::mt19937_64 rng(seed);
    ecx::EGraphGenOptions o;
    o.max_classes = 26;
    o.max_nodes_per_class = 3;
    o.max_deps = 3;
    instances.push_back(prepare("random-" + std::to_string(seed), ecx::random_egraph(rng, o)));
  }
  for (std::uint64_t seed : {5u, 17u}) {
    std::mt19937_64 rng(seed);
    instances.push_back(prepare("term-" + std::to_string(seed), ecx::term_dag_egraph(rng, 260)));
  }
  instances.push_back(prepare("chain-20000", ecx::chain_egraph(20000)));

  std::printf("%-14s %6s %6s %9s %12s %12s %8s  %s\n", "instance", "verts", "width", "bags",
              "serial ms", "parallel ms", "speedup", "result");
  for (const auto& p : instances) {
    if (p.width > 16) {
      std::printf("%-14s %6zu %6zu  (width too large for a quick run, skipped)\n", p.name.c_str(),
                  std::size_t(p.circuit.num_vertices()), p.width);
      continue;
    }
    ecx::DpOptions serial_opts, parallel_opts;
    serial_opts.num_threads = 1;
    parallel_opts.num_threads = max_threads;

    auto t0 = Clock::now();
    auto serial = ecx::run_dp(p.circuit, p.nice, p.u_out, serial_opts);
    double serial_ms = ms_since(t0);
    t0 = Clock::now();
    auto parallel = ecx::run_dp(p.circuit, p.nice, p.u_out, parallel_opts);
    double parallel_ms = ms_since(t0);

    bool same = serial.has_value() == parallel.has_value();
    if (same && serial) {
      same = serial->cost == parallel->cost &&
             serial->evaluation.value == parallel->evaluation.value;
    }
    if (!same) ++failures;
    std::printf("%-14s %6zu %6zu %9zu %12.2f %12.2f %7.2fx  %s\n", p.name.c_str(),
                std::size_t(p.circuit.num_vertices()), p.width, p.nice.bags.size(), serial_ms,
                parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                same ? (serial ? "identical" : "both unsat") : "MISMATCH");
  }

  std::printf("\nbatch of independent instances, sequential vs concurrent\n\n");
  std::vector<EGraph> batch;
  for (std::uint64_t seed = 100; seed < 116; ++seed) {
    std::mt19937_64 rng(seed);
    ecx::EGraphGenOptions o;
    o.max_classes = 22;
    batch.push_back(ecx::random_egraph(rng, o));
  }
  ecx::PipelineOptions popts;
  popts.num_threads = 1;

  std::vector<double> seq_cost(batch.size()), par_cost(batch.size());
  auto t0 = Clock::now();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    seq_cost[i] = ecx::extract_from_egraph(batch[i], popts).cost;
  }
  double seq_ms = ms_since(t0);
  t0 = Clock::now();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t i = 0; i < std::int64_t(batch.size()); ++i) {
    par_cost[std::size_t(i)] = ecx::extract_from_egraph(batch[std::size_t(i)], popts).cost;
  }
  double par_ms = ms_since(t0);

  bool same = seq_cost == par_cost;
  if (!same) ++failures;
  std::printf("%zu instances: sequential %.2f ms, concurrent %.2f ms, %.2fx, %s\n", batch.size(),
              seq_ms, par_ms, par_ms > 0 ? seq_ms / par_ms : 0.0,
              same ? "identical optima" : "MISMATCH");

  if (failures) std::printf("\n%d comparison(s) FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main() { return run(); }
