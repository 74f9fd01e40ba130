#include <algorithm>
#include <cmath>
#include <random>

#include "octal/graph.hpp"

namespace octal::graph {

std::string_view name(NodeKind kind) {
  switch (kind) {
    case NodeKind::State: return "State";
    case NodeKind::Transition: return "Transition";
    case NodeKind::Operator: return "Operator";
    case NodeKind::Literal: return "Literal";
    case NodeKind::Constant: return "Constant";
  }
  return "";
}

std::string_view name(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Incidence: return "Incidence";
    case EdgeKind::Tree: return "Tree";
    case EdgeKind::Union: return "Union";
  }
  return "";
}

std::size_t UnionGraph::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.kind == kind; }));
}

std::size_t UnionGraph::count(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.kind == kind; }));
}

UnionGraph build_system_graph(const buchi::Automaton& b) {
  UnionGraph g;
  g.nodes.reserve(b.state_count + b.transitions.size());
  for (std::size_t s = 0; s < b.state_count; ++s) {
    Node n;
    n.kind = NodeKind::State;
    n.initial = s == b.initial;
    n.accepting = b.is_accepting(static_cast<buchi::StateId>(s));
    g.nodes.push_back(n);
  }
  for (const auto& t : b.transitions) {
    Node n;
    n.kind = NodeKind::Transition;
    n.cube = t.label;
    n.src = t.src;
    n.dst = t.dst;
    const auto id = static_cast<std::uint32_t>(g.nodes.size());
    g.nodes.push_back(n);
    g.edges.push_back({t.src, id, EdgeKind::Incidence});
    if (t.dst != t.src) g.edges.push_back({t.dst, id, EdgeKind::Incidence});
  }
  return g;
}

namespace {

std::uint32_t add_tree(const ltl::Formula& f, UnionGraph& g) {
  Node n;
  switch (f.kind()) {
    case ltl::Kind::Atom:
      n.kind = NodeKind::Literal;
      n.atom = f.name();
      n.positive = true;
      break;
    case ltl::Kind::Not:
      if (f.child().kind() != ltl::Kind::Atom) {
        throw std::invalid_argument("formula is not in negation normal form");
      }
      n.kind = NodeKind::Literal;
      n.atom = f.child().name();
      n.positive = false;
      break;
    case ltl::Kind::True:
    case ltl::Kind::False:
      n.kind = NodeKind::Constant;
      n.value = f.kind() == ltl::Kind::True;
      break;
    default: {
      std::vector<std::uint32_t> children{add_tree(f.left(), g)};
      if (ltl::arity(f.kind()) == 2) children.push_back(add_tree(f.right(), g));
      n.kind = NodeKind::Operator;
      n.op = f.kind();
      const auto id = static_cast<std::uint32_t>(g.nodes.size());
      g.nodes.push_back(n);
      for (auto c : children) g.edges.push_back({id, c, EdgeKind::Tree});
      return id;
    }
  }
  g.nodes.push_back(n);
  return static_cast<std::uint32_t>(g.nodes.size() - 1);
}

}  // namespace

UnionGraph build_spec_tree(const ltl::Formula& nnf) {
  UnionGraph g;
  add_tree(nnf, g);
  return g;
}

UnionGraph build_union(const UnionGraph& system, const UnionGraph& tree) {
  UnionGraph g = system;
  const auto offset = static_cast<std::uint32_t>(system.nodes.size());
  g.nodes.insert(g.nodes.end(), tree.nodes.begin(), tree.nodes.end());
  for (Edge e : tree.edges) {
    e.u += offset;
    e.v += offset;
    g.edges.push_back(e);
  }
  for (std::uint32_t i = 0; i < tree.nodes.size(); ++i) {
    const Node& leaf = tree.nodes[i];
    if (leaf.kind != NodeKind::Literal) continue;
    for (std::uint32_t j = 0; j < system.nodes.size(); ++j) {
      const Node& t = system.nodes[j];
      if (t.kind == NodeKind::Transition && t.cube.atoms().contains(leaf.atom)) {
        g.edges.push_back({offset + i, j, EdgeKind::Union});
      }
    }
  }
  return g;
}

std::vector<std::string> check_invariants(const UnionGraph& g, bool perturbed) {
  std::vector<std::string> out;
  const std::size_t n = g.nodes.size();
  std::vector<std::size_t> incidence_degree(n, 0);
  std::vector<std::size_t> tree_parents(n, 0);
  std::size_t tree_nodes = 0, tree_edges = 0;
  for (const Node& node : g.nodes) {
    if (!node.in_system()) ++tree_nodes;
    if (node.kind == NodeKind::Operator &&
        (node.op == ltl::Kind::Not || ltl::arity(node.op) == 0)) {
      out.push_back("operator node with a non-operator symbol");
    }
  }
  for (const Edge& e : g.edges) {
    if (e.u >= n || e.v >= n) {
      out.push_back("edge endpoint out of range");
      continue;
    }
    const NodeKind ku = g.nodes[e.u].kind, kv = g.nodes[e.v].kind;
    switch (e.kind) {
      case EdgeKind::Incidence:
        if (ku != NodeKind::State || kv != NodeKind::Transition) {
          out.push_back("incidence edge not State-Transition");
        } else {
          ++incidence_degree[e.v];
          const Node& t = g.nodes[e.v];
          if (e.u != t.src && e.u != t.dst) out.push_back("incidence edge to an unrelated state");
        }
        break;
      case EdgeKind::Tree:
        if (g.nodes[e.u].in_system() || g.nodes[e.v].in_system()) {
          out.push_back("tree edge touches a system node");
        } else {
          ++tree_edges;
          ++tree_parents[e.v];
        }
        break;
      case EdgeKind::Union:
        if (ku != NodeKind::Literal || kv != NodeKind::Transition) {
          out.push_back("union edge not Literal-Transition");
        } else if (!g.nodes[e.v].cube.atoms().contains(g.nodes[e.u].atom)) {
          out.push_back("union edge between unrelated atoms");
        }
        break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = g.nodes[i];
    if (node.kind == NodeKind::Transition) {
      const std::size_t expected = node.src == node.dst ? 1 : 2;
      if (incidence_degree[i] > expected || (!perturbed && incidence_degree[i] != expected)) {
        out.push_back("transition with wrong incidence degree");
      }
    }
    if (!node.in_system() && tree_parents[i] > 1) out.push_back("tree node with several parents");
  }
  if (tree_nodes > 0 && tree_edges + 1 != tree_nodes) out.push_back("tree edge count mismatch");
  if (tree_nodes > 0) {
    std::size_t roots = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!g.nodes[i].in_system() && tree_parents[i] == 0) ++roots;
    }
    if (roots != 1) out.push_back("tree does not have exactly one root");
  }
  // Union edges must cover every matching (literal, transition) pair.
  std::size_t expected_union = 0;
  for (const Node& leaf : g.nodes) {
    if (leaf.kind != NodeKind::Literal) continue;
    for (const Node& t : g.nodes) {
      if (t.kind == NodeKind::Transition && t.cube.atoms().contains(leaf.atom)) ++expected_union;
    }
  }
  if (g.count(EdgeKind::Union) != expected_union) out.push_back("union edge count mismatch");
  return out;
}

UnionGraph perturb_edges(const UnionGraph& g, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("drop fraction must lie in [0, 1]");
  std::vector<std::size_t> incidence;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (g.edges[i].kind == EdgeKind::Incidence) incidence.push_back(i);
  }
  // Small slack keeps 0.3 * 10 from rounding up to 4.
  const auto drop = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(incidence.size()) - 1e-9));
  std::mt19937_64 rng(seed);
  std::shuffle(incidence.begin(), incidence.end(), rng);
  std::vector<char> removed(g.edges.size(), 0);
  for (std::size_t k = 0; k < drop && k < incidence.size(); ++k) removed[incidence[k]] = 1;
  UnionGraph out;
  out.nodes = g.nodes;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (!removed[i]) out.edges.push_back(g.edges[i]);
  }
  return out;
}

buchi::Automaton system_automaton(const UnionGraph& g) {
  buchi::Automaton b;
  b.state_count = 0;
  std::uint32_t atoms = 0;
  bool has_initial = false;
  for (const Node& n : g.nodes) {
    if (n.kind == NodeKind::State) {
      const auto id = static_cast<buchi::StateId>(b.state_count++);
      if (n.initial) {
        b.initial = id;
        has_initial = true;
      }
      if (n.accepting) b.accepting.push_back(id);
    } else if (n.kind == NodeKind::Transition) {
      b.transitions.push_back({n.src, n.cube, n.dst});
      atoms |= n.cube.atoms().bits();
    }
  }
  if (!has_initial) throw std::invalid_argument("graph has no initial state");
  b.atoms = AtomSet(atoms);
  b.validate();
  return b;
}

}  // namespace octal::graph
