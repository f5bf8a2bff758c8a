#pragma once

#include <stdexcept>
#include <string>

#include "ecx/circuit.hpp"
#include "ecx/egraph.hpp"
#include "ecx/simplify.hpp"
#include "ecx/treewidth.hpp"

namespace ecx {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads the interchange form: an object whose "nodes" member maps node id to
/// {"op", "children" (node ids), "eclass", "cost"} and whose "root_eclasses"
/// member lists the required classes. A missing cost defaults to 1; unknown
/// members are ignored. Malformed documents, children or roots naming nothing,
/// and negative or non-finite costs raise ParseError.
EGraph parse_egraph(const std::string& text);
EGraph parse_egraph_file(const std::string& path);

/// Inverse of parse_egraph up to member ordering: nodes are emitted in input
/// order with their original children lists.
std::string render_egraph(const EGraph& g);

/// {"vertices": [{"id", "kind": "input"|"and"|"or", "cost"?}], "edges":
/// [[src, dst]], "outputs": [v]}. Costs are emitted for Input vertices only.
std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);

/// {"bags": [[v]], "edges": [[a, b]], "width": w}
std::string decomposition_to_json(const TreeDecomposition& td);

/// {"records": [...], "final_provenance": [[original, final]]} where each
/// record spells out one rewrite: rule name, removed/added vertices and
/// edges, retypes, cost updates, output transfers, provenance moves.
std::string rewrite_log_to_json(const SimplifyResult& r);

/// {"choices": {class id: node id}, "cost": c, "acyclic": b}
std::string extraction_to_json(const EGraph& g, const Extraction& x, double cost, bool acyclic);

/// Reads the "choices" object back against `g`; unknown class or node names
/// and nodes outside their class raise ParseError.
Extraction extraction_from_json(const EGraph& g, const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ecx
