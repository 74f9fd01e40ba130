#pragma once

#include <cstdint>
#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace octal::buchi::detail {

using Node = std::uint32_t;
inline constexpr Node kUnvisited = std::numeric_limits<Node>::max();

/// Plain successor lists.
using Adjacency = std::vector<std::vector<Node>>;

struct SccResult {
  std::vector<Node> component;  // kUnvisited for nodes unreachable from the roots
  std::size_t count = 0;
};

/// Iterative Tarjan over the nodes reachable from `roots`.
inline SccResult tarjan(const Adjacency& adj, const std::vector<Node>& roots) {
  const std::size_t n = adj.size();
  SccResult out;
  out.component.assign(n, kUnvisited);
  std::vector<Node> index(n, kUnvisited), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<Node> stack;
  struct Frame {
    Node node;
    std::size_t next_edge;
  };
  std::vector<Frame> call;
  Node counter = 0;

  for (Node root : roots) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& top = call.back();
      const Node v = top.node;
      if (top.next_edge < adj[v].size()) {
        const Node w = adj[v][top.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        Node w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.component[w] = static_cast<Node>(out.count);
        } while (w != v);
        ++out.count;
      }
      call.pop_back();
      if (!call.empty()) {
        const Node parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return out;
}

/// Components that contain a cycle (more than one node, or a self-loop).
inline std::vector<char> nontrivial_components(const Adjacency& adj, const SccResult& scc) {
  std::vector<char> out(scc.count, 0);
  std::vector<std::size_t> sizes(scc.count, 0);
  for (Node v = 0; v < adj.size(); ++v) {
    if (scc.component[v] == kUnvisited) continue;
    ++sizes[scc.component[v]];
    for (Node w : adj[v]) {
      if (w == v) out[scc.component[v]] = 1;
    }
  }
  for (std::size_t c = 0; c < scc.count; ++c) {
    if (sizes[c] > 1) out[c] = 1;
  }
  return out;
}

/// Smallest accepting node lying in a nontrivial component reachable from
/// `root`, if any. Such a node witnesses a nonempty Buchi language.
inline std::optional<Node> accepting_cycle_node(const Adjacency& adj,
                                                const std::vector<char>& accepting, Node root) {
  const SccResult scc = tarjan(adj, {root});
  const std::vector<char> cyclic = nontrivial_components(adj, scc);
  for (Node v = 0; v < adj.size(); ++v) {
    if (accepting[v] && scc.component[v] != kUnvisited && cyclic[scc.component[v]]) return v;
  }
  return std::nullopt;
}

}  // namespace octal::buchi::detail
