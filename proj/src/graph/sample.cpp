#include <cstdio>

#include <json.hpp>

#include "octal/graph.hpp"

namespace octal::graph {

using nlohmann::json;

Sample encode_pair(const buchi::Automaton& b, const ltl::Formula& f, int label,
                   const EncodeOptions& options, std::uint64_t seed) {
  Sample s;
  s.graph = build_union(build_system_graph(b), build_spec_tree(ltl::to_nnf(f)));
  s.features = encode_features(s.graph, options.scheme, options.directed, options.dict);
  s.label = label;
  s.meta = {seed, ltl::to_string(f), buchi::automaton_hash(b)};
  return s;
}

namespace {

json payload(const Node& n) {
  switch (n.kind) {
    case NodeKind::State: return {{"initial", n.initial}, {"accepting", n.accepting}};
    case NodeKind::Transition:
      return {{"cube", buchi::to_string(n.cube)}, {"src", n.src}, {"dst", n.dst}};
    case NodeKind::Operator: return {{"op", std::string(ltl::symbol(n.op))}};
    case NodeKind::Literal: return {{"atom", std::string(1, n.atom)}, {"positive", n.positive}};
    case NodeKind::Constant: return {{"value", n.value}};
  }
  return {};
}

NodeKind node_kind(const std::string& s) {
  for (auto k : {NodeKind::State, NodeKind::Transition, NodeKind::Operator, NodeKind::Literal,
                 NodeKind::Constant}) {
    if (name(k) == s) return k;
  }
  throw SchemaError("unknown node kind '" + s + "'");
}

EdgeKind edge_kind(const std::string& s) {
  for (auto k : {EdgeKind::Incidence, EdgeKind::Tree, EdgeKind::Union}) {
    if (name(k) == s) return k;
  }
  throw SchemaError("unknown edge kind '" + s + "'");
}

ltl::Kind operator_kind(const std::string& s) {
  for (auto k : kOperatorOrder) {
    if (ltl::symbol(k) == s) return k;
  }
  throw SchemaError("unknown operator '" + s + "'");
}

Node read_node(const json& j) {
  Node n;
  n.kind = node_kind(j.at("kind").get<std::string>());
  const json& p = j.at("payload");
  switch (n.kind) {
    case NodeKind::State:
      n.initial = p.at("initial").get<bool>();
      n.accepting = p.at("accepting").get<bool>();
      break;
    case NodeKind::Transition:
      n.cube = buchi::parse_cube(p.at("cube").get<std::string>());
      n.src = p.at("src").get<buchi::StateId>();
      n.dst = p.at("dst").get<buchi::StateId>();
      break;
    case NodeKind::Operator:
      n.op = operator_kind(p.at("op").get<std::string>());
      break;
    case NodeKind::Literal: {
      const auto atom = p.at("atom").get<std::string>();
      if (atom.size() != 1 || !is_atom_letter(atom[0])) throw SchemaError("bad literal atom");
      n.atom = atom[0];
      n.positive = p.at("positive").get<bool>();
      break;
    }
    case NodeKind::Constant:
      n.value = p.at("value").get<bool>();
      break;
  }
  return n;
}

}  // namespace

std::string write_sample(const Sample& s) {
  json nodes = json::array();
  for (std::size_t i = 0; i < s.graph.nodes.size(); ++i) {
    const Node& n = s.graph.nodes[i];
    nodes.push_back({{"id", i}, {"kind", std::string(name(n.kind))}, {"payload", payload(n)}});
  }
  json edges = json::array();
  for (const Edge& e : s.graph.edges) edges.push_back({e.u, e.v, std::string(name(e.kind))});
  json meta = {{"seed", s.meta.seed},
               {"formula", s.meta.formula},
               {"automaton_hash", s.meta.automaton_hash}};

  std::string out = "{\"nodes\":" + nodes.dump() + ",\"edges\":" + edges.dump() + ",\"features\":[";
  char buf[32];
  for (std::size_t r = 0; r < s.features.rows; ++r) {
    out += r ? ",[" : "[";
    for (std::size_t c = 0; c < s.features.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", s.features.at(r, c));
      if (c) out += ',';
      out += buf;
    }
    out += ']';
  }
  out += "],\"label\":" + std::to_string(s.label) + ",\"meta\":" + meta.dump() + "}";
  return out;
}

Sample read_sample(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  Sample s;
  try {
    const json& nodes = j.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].at("id").get<std::size_t>() != i) throw SchemaError("node ids must be 0..n-1");
      s.graph.nodes.push_back(read_node(nodes[i]));
    }
    for (const json& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw SchemaError("edge must be [u, v, kind]");
      Edge edge{e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>(),
                edge_kind(e[2].get<std::string>())};
      if (edge.u >= s.graph.nodes.size() || edge.v >= s.graph.nodes.size()) {
        throw SchemaError("edge endpoint out of range");
      }
      s.graph.edges.push_back(edge);
    }
    const json& features = j.at("features");
    s.features.rows = features.size();
    s.features.cols = s.features.rows ? features[0].size() : 0;
    if (s.features.rows != s.graph.nodes.size()) throw SchemaError("one feature row per node");
    for (const json& row : features) {
      if (row.size() != s.features.cols) throw SchemaError("ragged feature matrix");
      for (const json& v : row) s.features.data.push_back(v.get<double>());
    }
    s.label = j.at("label").get<int>();
    if (s.label != 0 && s.label != 1) throw SchemaError("label must be 0 or 1");
    const json& meta = j.at("meta");
    s.meta.seed = meta.at("seed").get<std::uint64_t>();
    s.meta.formula = meta.at("formula").get<std::string>();
    s.meta.automaton_hash = meta.at("automaton_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema violation: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("schema violation: ") + e.what());
  }
  return s;
}

}  // namespace octal::graph
