#include "ecx/egraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ecx {

std::optional<NodeIdx> EGraph::find_node(std::string_view id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ClassIdx> EGraph::find_class(std::string_view id) const {
  auto it = class_index_.find(id);
  if (it == class_index_.end()) return std::nullopt;
  return it->second;
}

ClassIdx EGraphBuilder::intern_class(const std::string& id) {
  auto it = g_.class_index_.find(id);
  if (it != g_.class_index_.end()) return it->second;
  ClassIdx c = static_cast<ClassIdx>(g_.class_ids_.size());
  g_.class_index_.emplace(id, c);
  g_.class_ids_.push_back(id);
  g_.members_.emplace_back();
  return c;
}

NodeIdx EGraphBuilder::add_node(const std::string& id, const std::string& op,
                                const std::string& class_id,
                                const std::vector<std::string>& dep_class_ids, double cost,
                                std::vector<std::string> children) {
  if (g_.node_index_.count(id)) throw EGraphError("duplicate node id: " + id);
  ENode n;
  n.id = id;
  n.op = op;
  n.cls = intern_class(class_id);
  n.cost = cost;
  n.children = std::move(children);
  std::set<ClassIdx> deps;
  for (const auto& d : dep_class_ids) deps.insert(intern_class(d));
  n.deps.assign(deps.begin(), deps.end());
  NodeIdx u = static_cast<NodeIdx>(g_.nodes_.size());
  g_.node_index_.emplace(id, u);
  g_.members_[n.cls].push_back(u);
  g_.num_deps_ += n.deps.size();
  g_.nodes_.push_back(std::move(n));
  return u;
}

void EGraphBuilder::add_root(const std::string& class_id) {
  ClassIdx c = intern_class(class_id);
  if (std::find(g_.roots_.begin(), g_.roots_.end(), c) == g_.roots_.end()) g_.roots_.push_back(c);
}

EGraph EGraphBuilder::build() {
  for (ClassIdx c = 0; c < g_.class_ids_.size(); ++c) {
    if (g_.members_[c].empty())
      throw EGraphError("e-class has no member nodes: " + g_.class_ids_[c]);
  }
  for (const ENode& n : g_.nodes_) {
    if (n.cost < 0.0 || !std::isfinite(n.cost))
      throw EGraphError("negative or non-finite cost on node: " + n.id);
  }
  if (g_.roots_.empty()) throw EGraphError("no root e-classes");
  return std::move(g_);
}

double extraction_cost(const EGraph& g, const Extraction& x) {
  double total = 0.0;
  for (const auto& [c, u] : x.choice) {
    (void)c;
    total += g.node(u).cost;
  }
  return total;
}

namespace {

// Classes reachable from the roots by following chosen-node dependencies.
std::set<ClassIdx> reachable_from_roots(const EGraph& g, const Extraction& x) {
  std::set<ClassIdx> seen;
  std::vector<ClassIdx> stack(g.roots().begin(), g.roots().end());
  while (!stack.empty()) {
    ClassIdx c = stack.back();
    stack.pop_back();
    if (!seen.insert(c).second) continue;
    auto it = x.choice.find(c);
    if (it == x.choice.end()) continue;
    for (ClassIdx d : g.node(it->second).deps) stack.push_back(d);
  }
  return seen;
}

}  // namespace

ExtractionValidity validate_extraction(const EGraph& g, const Extraction& x) {
  ExtractionValidity r;
  r.is_extraction = true;
  for (const auto& [c, u] : x.choice) {
    if (c >= g.num_classes() || u >= g.num_nodes()) {
      r.is_extraction = false;
      r.violations.push_back("choice refers to an unknown class or node");
      continue;
    }
    if (g.node(u).cls != c) {
      r.is_extraction = false;
      r.violations.push_back("chosen node " + g.node(u).id + " is not a member of class " +
                             g.class_id(c));
    }
    for (ClassIdx d : g.node(u).deps) {
      if (!x.contains(d)) {
        r.is_extraction = false;
        r.violations.push_back("dependency class " + g.class_id(d) + " of chosen node " +
                               g.node(u).id + " has no choice");
      }
    }
  }

  r.is_satisfying = true;
  for (ClassIdx c : g.roots()) {
    if (!x.contains(c)) {
      r.is_satisfying = false;
      r.violations.push_back("root class " + g.class_id(c) + " has no choice");
    }
  }

  // Cycle check over the chosen-dependency graph, restricted to the domain.
  r.is_acyclic = true;
  std::map<ClassIdx, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::pair<ClassIdx, std::size_t>> dfs;
  for (const auto& [start, chosen] : x.choice) {
    (void)chosen;
    if (state[start] != 0) continue;
    dfs.emplace_back(start, 0);
    state[start] = 1;
    while (!dfs.empty()) {
      auto& [c, i] = dfs.back();
      auto it = x.choice.find(c);
      const std::vector<ClassIdx>* deps = it != x.choice.end() ? &g.node(it->second).deps : nullptr;
      if (deps == nullptr || i >= deps->size()) {
        state[c] = 2;
        dfs.pop_back();
        continue;
      }
      ClassIdx d = (*deps)[i++];
      if (!x.contains(d)) continue;
      if (state[d] == 1) {
        r.is_acyclic = false;
        r.violations.push_back("chosen-dependency cycle through class " + g.class_id(d));
        state[c] = 2;
        dfs.clear();
        break;
      }
      if (state[d] == 0) {
        state[d] = 1;
        dfs.emplace_back(d, 0);
      }
    }
    if (!r.is_acyclic) break;
  }

  r.is_minimal = r.is_extraction && r.is_satisfying;
  if (r.is_minimal) {
    std::set<ClassIdx> reach = reachable_from_roots(g, x);
    for (const auto& [c, u] : x.choice) {
      (void)u;
      if (!reach.count(c)) {
        r.is_minimal = false;
        r.violations.push_back("class " + g.class_id(c) +
                               " is chosen but unreachable from the roots");
      }
    }
  }
  return r;
}

}  // namespace ecx
