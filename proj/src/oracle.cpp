#include "ecx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecx {

namespace {

constexpr std::uint64_t kExtractGuard = 10'000'000;
constexpr double kCostTol = 1e-9;
constexpr int kWitnessChunks = 64;

struct ExtractSpace {
  std::vector<std::uint64_t> mult;
  std::uint64_t total = 1;
};

ExtractSpace extract_space(const EGraph& g) {
  ExtractSpace s;
  s.mult.resize(g.num_classes());
  for (ClassIdx c = 0; c < g.num_classes(); ++c) {
    s.mult[c] = s.total;
    s.total *= g.class_members(c).size() + 1;
    if (s.total > kExtractGuard)
      throw InstanceTooLarge("extraction search space exceeds 10^7 assignments");
  }
  return s;
}

// pick[c] = chosen member position, or -1 for unused.
void decode_pick(const EGraph& g, const ExtractSpace& s, std::uint64_t index,
                 std::vector<int>& pick) {
  for (ClassIdx c = 0; c < g.num_classes(); ++c) {
    std::uint64_t radix = g.class_members(c).size() + 1;
    pick[c] = static_cast<int>((index / s.mult[c]) % radix) - 1;
  }
}

enum class PickClass { Rejected, Satisfying, Minimal };

PickClass classify_pick(const EGraph& g, const std::vector<int>& pick, bool require_acyclic,
                        double& cost) {
  const std::size_t k = g.num_classes();
  cost = 0.0;
  for (ClassIdx c = 0; c < k; ++c) {
    if (pick[c] < 0) continue;
    const ENode& n = g.node(g.class_members(c)[pick[c]]);
    cost += n.cost;
    for (ClassIdx d : n.deps)
      if (pick[d] < 0) return PickClass::Rejected;  // not closed under deps
  }
  for (ClassIdx c : g.roots())
    if (pick[c] < 0) return PickClass::Rejected;

  if (require_acyclic) {
    // Iterative DFS over the chosen-dependency graph.
    std::vector<std::uint8_t> state(k, 0);
    std::vector<std::pair<ClassIdx, std::size_t>> stack;
    for (ClassIdx start = 0; start < k; ++start) {
      if (pick[start] < 0 || state[start]) continue;
      stack.emplace_back(start, 0);
      state[start] = 1;
      while (!stack.empty()) {
        auto& [c, i] = stack.back();
        const auto& deps = g.node(g.class_members(c)[pick[c]]).deps;
        if (i >= deps.size()) {
          state[c] = 2;
          stack.pop_back();
          continue;
        }
        ClassIdx d = deps[i++];
        if (pick[d] < 0) continue;
        if (state[d] == 1) return PickClass::Rejected;
        if (state[d] == 0) {
          state[d] = 1;
          stack.emplace_back(d, 0);
        }
      }
    }
  }

  // Minimal iff the domain is exactly the root-reachable set.
  std::vector<std::uint8_t> reached(k, 0);
  std::vector<ClassIdx> queue;
  for (ClassIdx c : g.roots()) {
    if (!reached[c]) {
      reached[c] = 1;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    ClassIdx c = queue.back();
    queue.pop_back();
    if (pick[c] < 0) continue;
    for (ClassIdx d : g.node(g.class_members(c)[pick[c]]).deps) {
      if (!reached[d]) {
        reached[d] = 1;
        queue.push_back(d);
      }
    }
  }
  for (ClassIdx c = 0; c < k; ++c)
    if (pick[c] >= 0 && !reached[c]) return PickClass::Satisfying;
  return PickClass::Minimal;
}

Extraction pick_to_extraction(const EGraph& g, const std::vector<int>& pick) {
  Extraction x;
  for (ClassIdx c = 0; c < g.num_classes(); ++c)
    if (pick[c] >= 0) x.choice.emplace(c, g.class_members(c)[pick[c]]);
  return x;
}

}  // namespace

OracleResult brute_force_extract(const EGraph& g, bool require_acyclic, bool parallel) {
  ExtractSpace space = extract_space(g);
  OracleResult r;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t count = 0;

  const std::int64_t total = static_cast<std::int64_t>(space.total);
#ifdef _OPENMP
#pragma omp parallel if (parallel)
  {
    std::vector<int> pick(g.num_classes());
    double local_best = std::numeric_limits<double>::infinity();
    std::uint64_t local_count = 0;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < total; ++i) {
      decode_pick(g, space, i, pick);
      double cost;
      PickClass cl = classify_pick(g, pick, require_acyclic, cost);
      if (cl == PickClass::Rejected) continue;
      ++local_count;
      if (cl == PickClass::Minimal && cost < local_best) local_best = cost;
    }
#pragma omp critical
    {
      count += local_count;
      if (local_best < best) best = local_best;
    }
  }
#else
  {
    std::vector<int> pick(g.num_classes());
    for (std::int64_t i = 0; i < total; ++i) {
      decode_pick(g, space, i, pick);
      double cost;
      PickClass cl = classify_pick(g, pick, require_acyclic, cost);
      if (cl == PickClass::Rejected) continue;
      ++count;
      if (cl == PickClass::Minimal && cost < best) best = cost;
    }
  }
  (void)parallel;
#endif

  r.count_satisfying = count;
  if (!std::isfinite(best)) return r;
  r.optimum = best;

  // Second pass: gather the argmin witnesses in enumeration order.
  std::vector<std::vector<Extraction>> chunk_hits(kWitnessChunks);
  const std::int64_t chunk_len = (total + kWitnessChunks - 1) / kWitnessChunks;
#ifdef _OPENMP
#pragma omp parallel for schedule(static, 1) if (parallel)
#endif
  for (int chunk = 0; chunk < kWitnessChunks; ++chunk) {
    std::vector<int> pick(g.num_classes());
    const std::int64_t lo = chunk * chunk_len;
    const std::int64_t hi = std::min<std::int64_t>(lo + chunk_len, total);
    for (std::int64_t i = lo; i < hi; ++i) {
      decode_pick(g, space, i, pick);
      double cost;
      if (classify_pick(g, pick, require_acyclic, cost) != PickClass::Minimal) continue;
      if (std::abs(cost - best) <= kCostTol) chunk_hits[chunk].push_back(pick_to_extraction(g, pick));
    }
  }
  for (auto& hits : chunk_hits)
    for (auto& x : hits) r.witnesses.push_back(std::move(x));
  return r;
}

std::vector<Extraction> enumerate_minimal_extractions(const EGraph& g, bool require_acyclic) {
  ExtractSpace space = extract_space(g);
  std::vector<Extraction> result;
  std::vector<int> pick(g.num_classes());
  for (std::uint64_t i = 0; i < space.total; ++i) {
    decode_pick(g, space, i, pick);
    double cost;
    if (classify_pick(g, pick, require_acyclic, cost) == PickClass::Minimal)
      result.push_back(pick_to_extraction(g, pick));
  }
  return result;
}

namespace {

std::vector<std::uint32_t> input_vertices(const Circuit& c) {
  std::vector<std::uint32_t> ins;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (c.kind(v) == VertexKind::Input) ins.push_back(v);
  return ins;
}

CircuitOracleResult acyclic_circuit_oracle(const Circuit& c, bool parallel) {
  const std::vector<std::uint32_t> ins = input_vertices(c);
  if (ins.size() > 22) throw InstanceTooLarge("circuit oracle limited to 22 inputs");
  const std::int64_t total = std::int64_t{1} << ins.size();

  CircuitOracleResult r;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t count = 0;

  auto probe = [&](std::uint64_t mask, double& cost) {
    std::vector<std::uint8_t> seed(c.num_vertices(), 0);
    cost = 0.0;
    for (std::size_t j = 0; j < ins.size(); ++j) {
      if (mask >> j & 1) {
        seed[ins[j]] = 1;
        cost += c.cost(ins[j]);
      }
    }
    FixpointResult fr = evaluate_from_inputs(c, seed);
    if (!is_satisfying(c, fr.evaluation) || !fr.acyclic) return std::optional<Evaluation>{};
    return std::optional<Evaluation>{std::move(fr.evaluation)};
  };

#ifdef _OPENMP
#pragma omp parallel if (parallel)
  {
    double local_best = std::numeric_limits<double>::infinity();
    std::uint64_t local_count = 0;
#pragma omp for schedule(static) nowait
    for (std::int64_t mask = 0; mask < total; ++mask) {
      double cost;
      if (!probe(mask, cost)) continue;
      ++local_count;
      if (cost < local_best) local_best = cost;
    }
#pragma omp critical
    {
      count += local_count;
      if (local_best < best) best = local_best;
    }
  }
#else
  for (std::int64_t mask = 0; mask < total; ++mask) {
    double cost;
    if (!probe(mask, cost)) continue;
    ++count;
    if (cost < best) best = cost;
  }
  (void)parallel;
#endif

  r.count_satisfying = count;
  if (!std::isfinite(best)) return r;
  r.optimum = best;

  std::vector<std::vector<Evaluation>> chunk_hits(kWitnessChunks);
  const std::int64_t chunk_len = (total + kWitnessChunks - 1) / kWitnessChunks;
#ifdef _OPENMP
#pragma omp parallel for schedule(static, 1) if (parallel)
#endif
  for (int chunk = 0; chunk < kWitnessChunks; ++chunk) {
    const std::int64_t lo = chunk * chunk_len;
    const std::int64_t hi = std::min<std::int64_t>(lo + chunk_len, total);
    for (std::int64_t mask = lo; mask < hi; ++mask) {
      double cost;
      auto ev = probe(mask, cost);
      if (ev && std::abs(cost - best) <= kCostTol) chunk_hits[chunk].push_back(std::move(*ev));
    }
  }
  for (auto& hits : chunk_hits)
    for (auto& ev : hits) r.witnesses.push_back(std::move(ev));
  return r;
}

CircuitOracleResult exhaustive_circuit_oracle(const Circuit& c) {
  if (c.num_vertices() > 18)
    throw InstanceTooLarge("exhaustive circuit oracle limited to 18 vertices");
  const std::uint64_t total = std::uint64_t{1} << c.num_vertices();
  CircuitOracleResult r;
  double best = std::numeric_limits<double>::infinity();
  Evaluation a;
  a.value.resize(c.num_vertices());
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::uint32_t v = 0; v < c.num_vertices(); ++v) a.value[v] = mask >> v & 1;
    if (!is_valid_evaluation(c, a) || !is_satisfying(c, a)) continue;
    ++r.count_satisfying;
    double cost = evaluation_cost(c, a);
    if (cost < best) best = cost;
  }
  if (!std::isfinite(best)) return r;
  r.optimum = best;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::uint32_t v = 0; v < c.num_vertices(); ++v) a.value[v] = mask >> v & 1;
    if (!is_valid_evaluation(c, a) || !is_satisfying(c, a)) continue;
    if (std::abs(evaluation_cost(c, a) - best) <= kCostTol) r.witnesses.push_back(a);
  }
  return r;
}

}  // namespace

CircuitOracleResult brute_force_circuit(const Circuit& c, bool require_acyclic, bool parallel) {
  if (require_acyclic) return acyclic_circuit_oracle(c, parallel);
  return exhaustive_circuit_oracle(c);
}

std::vector<Evaluation> enumerate_minimal_evaluations(const Circuit& c, bool require_acyclic) {
  if (c.num_vertices() > 18)
    throw InstanceTooLarge("exhaustive circuit oracle limited to 18 vertices");
  const std::uint64_t total = std::uint64_t{1} << c.num_vertices();
  std::vector<Evaluation> sat;
  Evaluation a;
  a.value.resize(c.num_vertices());
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::uint32_t v = 0; v < c.num_vertices(); ++v) a.value[v] = mask >> v & 1;
    if (!is_valid_evaluation(c, a) || !is_satisfying(c, a)) continue;
    if (require_acyclic && !is_acyclic_evaluation(c, a)) continue;
    sat.push_back(a);
  }
  // Minimal members are those with no strictly smaller companion in the list
  // of all valid satisfying evaluations (cyclic ones included: a subset of an
  // acyclic evaluation is acyclic anyway).
  std::vector<Evaluation> all = sat;
  if (require_acyclic) {
    all.clear();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      for (std::uint32_t v = 0; v < c.num_vertices(); ++v) a.value[v] = mask >> v & 1;
      if (is_valid_evaluation(c, a) && is_satisfying(c, a)) all.push_back(a);
    }
  }
  std::vector<Evaluation> result;
  for (const Evaluation& cand : sat) {
    bool minimal = true;
    for (const Evaluation& other : all) {
      bool below = false, above = false;
      for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
        if (other.value[v] < cand.value[v]) below = true;
        if (other.value[v] > cand.value[v]) above = true;
      }
      if (below && !above) {
        minimal = false;
        break;
      }
    }
    if (minimal) result.push_back(cand);
  }
  return result;
}

bool brute_force_is_minimal(const Circuit& c, const Evaluation& a) {
  if (!is_valid_evaluation(c, a) || !is_satisfying(c, a)) return false;
  std::vector<std::uint32_t> true_vs;
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v)
    if (a.truth(v)) true_vs.push_back(v);
  if (true_vs.size() > 20) throw InstanceTooLarge("minimality check limited to 20 true vertices");
  const std::uint64_t total = std::uint64_t{1} << true_vs.size();
  Evaluation b;
  for (std::uint64_t mask = 0; mask + 1 < total; ++mask) {  // skip the full set
    b.value.assign(c.num_vertices(), 0);
    for (std::size_t j = 0; j < true_vs.size(); ++j)
      if (mask >> j & 1) b.value[true_vs[j]] = 1;
    if (is_valid_evaluation(c, b) && is_satisfying(c, b)) return false;
  }
  return true;
}

}  // namespace ecx
