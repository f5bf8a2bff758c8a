#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecx {

using NodeIdx = std::uint32_t;
using ClassIdx = std::uint32_t;

struct EGraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One candidate node inside an e-class. `deps` is the deduplicated, sorted
/// set of e-classes the node requires; `children` keeps the original child
/// node ids in input order, used only when rendering back to JSON.
struct ENode {
  std::string id;
  std::string op;
  ClassIdx cls = 0;
  std::vector<ClassIdx> deps;
  std::vector<std::string> children;
  double cost = 0.0;
};

/// An e-graph with interned node/class ids. Instances are assembled through
/// EGraphBuilder, which validates the class partition and dependency targets.
class EGraph {
 public:
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_classes() const { return class_ids_.size(); }
  /// Number of (node, class) dependency pairs after per-node deduplication.
  std::size_t num_deps() const { return num_deps_; }

  const ENode& node(NodeIdx u) const { return nodes_.at(u); }
  const std::vector<ENode>& nodes() const { return nodes_; }
  const std::string& class_id(ClassIdx c) const { return class_ids_.at(c); }
  const std::vector<NodeIdx>& class_members(ClassIdx c) const { return members_.at(c); }
  const std::vector<ClassIdx>& roots() const { return roots_; }

  std::optional<NodeIdx> find_node(std::string_view id) const;
  std::optional<ClassIdx> find_class(std::string_view id) const;

 private:
  friend class EGraphBuilder;
  std::vector<ENode> nodes_;
  std::vector<std::string> class_ids_;
  std::vector<std::vector<NodeIdx>> members_;
  std::vector<ClassIdx> roots_;
  std::map<std::string, NodeIdx, std::less<>> node_index_;
  std::map<std::string, ClassIdx, std::less<>> class_index_;
  std::size_t num_deps_ = 0;
};

/// Incremental construction API used by both the JSON parser and the random
/// generators. Dependencies are given as class ids; build() checks that every
/// class is non-empty, every dependency target exists, costs are finite and
/// non-negative, and at least one root is present.
class EGraphBuilder {
 public:
  ClassIdx intern_class(const std::string& id);
  NodeIdx add_node(const std::string& id, const std::string& op, const std::string& class_id,
                   const std::vector<std::string>& dep_class_ids, double cost,
                   std::vector<std::string> children = {});
  void add_root(const std::string& class_id);
  EGraph build();

 private:
  EGraph g_;
};

/// A choice function: picks at most one member node per e-class.
struct Extraction {
  std::map<ClassIdx, NodeIdx> choice;

  bool contains(ClassIdx c) const { return choice.find(c) != choice.end(); }
};

struct ExtractionValidity {
  bool is_extraction = false;  // choices are members and closed under deps
  bool is_satisfying = false;  // every root class has a choice
  bool is_acyclic = false;     // no chosen-dependency path from a class to itself
  bool is_minimal = false;     // domain equals the classes reachable from the roots
  std::vector<std::string> violations;
};

/// Sum of the costs of chosen nodes over the extraction's domain.
double extraction_cost(const EGraph& g, const Extraction& x);

/// Checks the four extraction predicates and collects human-readable
/// violation messages. The flags are mutually consistent: is_minimal implies
/// is_extraction and is_satisfying.
ExtractionValidity validate_extraction(const EGraph& g, const Extraction& x);

}  // namespace ecx
