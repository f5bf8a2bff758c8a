#include "ecx/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ecx {
namespace {

using Json = nlohmann::ordered_json;

Json parse_or_throw(const std::string& text, const char* what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(std::string("malformed JSON in ") + what);
  return j;
}

const char* kind_name(VertexKind k) {
  switch (k) {
    case VertexKind::Input: return "input";
    case VertexKind::And: return "and";
    case VertexKind::Or: return "or";
  }
  return "?";
}

VertexKind kind_from_name(const std::string& s) {
  if (s == "input") return VertexKind::Input;
  if (s == "and") return VertexKind::And;
  if (s == "or") return VertexKind::Or;
  throw ParseError("unknown vertex kind \"" + s + "\"");
}

}  // namespace

EGraph parse_egraph(const std::string& text) {
  Json j = parse_or_throw(text, "e-graph");
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_object()) {
    throw ParseError("e-graph document must be an object with a \"nodes\" object");
  }
  const Json& nodes = j["nodes"];

  // First pass: node id -> class id, so children can name later nodes.
  std::map<std::string, std::string, std::less<>> class_of;
  for (auto it = nodes.begin(); it != nodes.end(); ++it) {
    const Json& n = it.value();
    if (!n.is_object() || !n.contains("eclass") || !n["eclass"].is_string()) {
      throw ParseError("node \"" + it.key() + "\" lacks an \"eclass\" string");
    }
    if (!class_of.emplace(it.key(), n["eclass"].get<std::string>()).second) {
      throw ParseError("duplicate node id \"" + it.key() + "\"");
    }
  }

  EGraphBuilder b;
  try {
    for (auto it = nodes.begin(); it != nodes.end(); ++it) {
      const Json& n = it.value();
      std::string op = n.contains("op") && n["op"].is_string() ? n["op"].get<std::string>() : "";
      double cost = 1.0;
      if (n.contains("cost")) {
        if (!n["cost"].is_number()) throw ParseError("node \"" + it.key() + "\": cost is not a number");
        cost = n["cost"].get<double>();
        if (!std::isfinite(cost) || cost < 0.0) {
          throw ParseError("node \"" + it.key() + "\": cost must be finite and non-negative");
        }
      }
      std::vector<std::string> children;
      std::vector<std::string> dep_classes;
      if (n.contains("children")) {
        if (!n["children"].is_array()) {
          throw ParseError("node \"" + it.key() + "\": children is not an array");
        }
        for (const Json& ch : n["children"]) {
          if (!ch.is_string()) throw ParseError("node \"" + it.key() + "\": child is not a string");
          std::string cid = ch.get<std::string>();
          auto found = class_of.find(cid);
          if (found == class_of.end()) {
            throw ParseError("node \"" + it.key() + "\": unknown child node \"" + cid + "\"");
          }
          children.push_back(cid);
          dep_classes.push_back(found->second);
        }
      }
      b.add_node(it.key(), op, n["eclass"].get<std::string>(), dep_classes, cost,
                 std::move(children));
    }
    if (!j.contains("root_eclasses") || !j["root_eclasses"].is_array() ||
        j["root_eclasses"].empty()) {
      throw ParseError("e-graph document lacks a non-empty \"root_eclasses\" array");
    }
    for (const Json& r : j["root_eclasses"]) {
      if (!r.is_string()) throw ParseError("root class id is not a string");
      b.add_root(r.get<std::string>());
    }
    return b.build();
  } catch (const EGraphError& e) {
    throw ParseError(e.what());
  }
}

EGraph parse_egraph_file(const std::string& path) {
  return parse_egraph(read_text_file(path));
}

std::string render_egraph(const EGraph& g) {
  Json nodes = Json::object();
  for (const ENode& n : g.nodes()) {
    Json e = Json::object();
    e["op"] = n.op;
    e["children"] = n.children;
    e["eclass"] = g.class_id(n.cls);
    e["cost"] = n.cost;
    nodes[n.id] = std::move(e);
  }
  Json j = Json::object();
  j["nodes"] = std::move(nodes);
  Json roots = Json::array();
  for (ClassIdx c : g.roots()) roots.push_back(g.class_id(c));
  j["root_eclasses"] = std::move(roots);
  return j.dump(2);
}

std::string circuit_to_json(const Circuit& c) {
  Json verts = Json::array();
  for (std::uint32_t v = 0; v < c.num_vertices(); ++v) {
    Json e = Json::object();
    e["id"] = v;
    e["kind"] = kind_name(c.kind(v));
    if (c.kind(v) == VertexKind::Input) e["cost"] = c.cost(v);
    verts.push_back(std::move(e));
  }
  Json edges = Json::array();
  for (std::uint32_t u = 0; u < c.num_vertices(); ++u) {
    for (std::uint32_t v : c.out(u)) edges.push_back(Json::array({u, v}));
  }
  Json j = Json::object();
  j["vertices"] = std::move(verts);
  j["edges"] = std::move(edges);
  j["outputs"] = c.outputs();
  return j.dump(2);
}

Circuit circuit_from_json(const std::string& text) {
  Json j = parse_or_throw(text, "circuit");
  if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array()) {
    throw ParseError("circuit document must be an object with a \"vertices\" array");
  }
  std::size_t n = j["vertices"].size();
  std::vector<VertexKind> kinds(n, VertexKind::Input);
  std::vector<double> costs(n, 0.0);
  std::vector<char> seen(n, 0);
  for (const Json& e : j["vertices"]) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_number_unsigned() ||
        !e.contains("kind") || !e["kind"].is_string()) {
      throw ParseError("circuit vertex lacks id or kind");
    }
    std::uint64_t id = e["id"].get<std::uint64_t>();
    if (id >= n || seen[id]) throw ParseError("circuit vertex ids must be 0..n-1, unique");
    seen[id] = 1;
    kinds[id] = kind_from_name(e["kind"].get<std::string>());
    if (e.contains("cost")) {
      if (!e["cost"].is_number()) throw ParseError("circuit vertex cost is not a number");
      costs[id] = e["cost"].get<double>();
    }
  }
  try {
    CircuitBuilder b;
    for (std::size_t v = 0; v < n; ++v) b.add_vertex(kinds[v], costs[v]);
    if (j.contains("edges")) {
      for (const Json& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw ParseError("circuit edge is not a pair");
        b.add_edge(e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>());
      }
    }
    if (j.contains("outputs")) {
      for (const Json& o : j["outputs"]) b.mark_output(o.get<std::uint32_t>());
    }
    return b.build();
  } catch (const CircuitError& e) {
    throw ParseError(e.what());
  }
}

std::string decomposition_to_json(const TreeDecomposition& td) {
  Json j = Json::object();
  j["bags"] = td.bags;
  Json edges = Json::array();
  for (auto [a, b] : td.edges) edges.push_back(Json::array({a, b}));
  j["edges"] = std::move(edges);
  j["width"] = td.width();
  return j.dump(2);
}

std::string rewrite_log_to_json(const SimplifyResult& r) {
  Json records = Json::array();
  for (const RewriteRecord& rec : r.log) {
    Json e = Json::object();
    e["rule"] = std::string(rule_name(rec.rule));
    e["removed_vertices"] = rec.removed_vertices;
    Json redges = Json::array();
    for (auto [s, d] : rec.removed_edges) redges.push_back(Json::array({s, d}));
    e["removed_edges"] = std::move(redges);
    Json averts = Json::array();
    for (const auto& nv : rec.added_vertices) {
      averts.push_back(Json::object({{"id", nv.id}, {"kind", kind_name(nv.kind)}, {"cost", nv.cost}}));
    }
    e["added_vertices"] = std::move(averts);
    Json aedges = Json::array();
    for (auto [s, d] : rec.added_edges) aedges.push_back(Json::array({s, d}));
    e["added_edges"] = std::move(aedges);
    Json rety = Json::array();
    for (auto [v, k] : rec.retyped) rety.push_back(Json::array({Json(v), Json(kind_name(k))}));
    e["retyped"] = std::move(rety);
    Json cup = Json::array();
    for (auto [v, c] : rec.cost_updates) cup.push_back(Json::array({Json(v), Json(c)}));
    e["cost_updates"] = std::move(cup);
    e["marked_output"] = rec.marked_output;
    Json prov = Json::array();
    for (auto [o, p] : rec.provenance) prov.push_back(Json::array({Json(o), Json(p)}));
    e["provenance"] = std::move(prov);
    records.push_back(std::move(e));
  }
  Json j = Json::object();
  j["records"] = std::move(records);
  Json fin = Json::array();
  for (std::uint32_t v = 0; v < r.provenance.size(); ++v) {
    fin.push_back(Json::array({Json(v), Json(r.provenance[v])}));
  }
  j["final_provenance"] = std::move(fin);
  return j.dump(2);
}

std::string extraction_to_json(const EGraph& g, const Extraction& x, double cost, bool acyclic) {
  Json choices = Json::object();
  for (auto [cls, node] : x.choice) choices[g.class_id(cls)] = g.node(node).id;
  Json j = Json::object();
  j["choices"] = std::move(choices);
  j["cost"] = cost;
  j["acyclic"] = acyclic;
  return j.dump(2);
}

Extraction extraction_from_json(const EGraph& g, const std::string& text) {
  Json j = parse_or_throw(text, "extraction");
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_object())
    throw ParseError("extraction: expected an object with a \"choices\" object");
  Extraction x;
  for (auto& [cls_name, node_name] : j["choices"].items()) {
    auto cls = g.find_class(cls_name);
    if (!cls) throw ParseError("extraction: unknown class " + cls_name);
    if (!node_name.is_string()) throw ParseError("extraction: choice for " + cls_name + " must be a node id");
    auto node = g.find_node(node_name.get<std::string>());
    if (!node) throw ParseError("extraction: unknown node " + node_name.get<std::string>());
    if (g.node(*node).cls != *cls)
      throw ParseError("extraction: node " + node_name.get<std::string>() + " is not a member of " + cls_name);
    x.choice[*cls] = *node;
  }
  return x;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << text;
}

}  // namespace ecx
