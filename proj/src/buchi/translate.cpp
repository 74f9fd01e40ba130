#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

#include "graph_search.hpp"
#include "octal/buchi.hpp"

namespace octal::buchi {

using ltl::Formula;
using ltl::Kind;

namespace {

// Interned subformulas of a core-NNF formula.
class Closure {
 public:
  explicit Closure(const Formula& root) { root_ = intern(root); }

  int root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const Formula& formula(int id) const { return nodes_[id].f; }
  int left(int id) const { return nodes_[id].left; }
  int right(int id) const { return nodes_[id].right; }
  /// Bit position of an Until node, -1 otherwise.
  int until_bit(int id) const { return nodes_[id].until_bit; }
  int until_count() const { return untils_; }

 private:
  struct Entry {
    Formula f;
    int left = -1;
    int right = -1;
    int until_bit = -1;
  };

  int intern(const Formula& f) {
    if (auto it = ids_.find(f); it != ids_.end()) return it->second;
    Entry e{f};
    if (f.kind() != Kind::Not && !f.is_leaf()) {
      e.left = intern(f.left());
      if (ltl::arity(f.kind()) == 2) e.right = intern(f.right());
    }
    if (f.kind() == Kind::Until) {
      if (untils_ == 64) throw ResourceLimit("more than 64 until subformulas");
      e.until_bit = untils_++;
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(e));
    ids_.emplace(f, id);
    return id;
  }

  std::vector<Entry> nodes_;
  std::unordered_map<Formula, int, ltl::FormulaHash> ids_;
  int root_ = -1;
  int untils_ = 0;
};

// Edge of the generalized automaton: `marks` holds bit j when the j-th until
// is not postponed along this edge.
struct TgbaEdge {
  Cube label;
  std::vector<int> next;
  std::uint64_t marks = 0;
};

class Expander {
 public:
  Expander(const Closure& closure, const Limits& limits) : c_(closure), limits_(limits) {}

  std::vector<TgbaEdge> expand(const std::vector<int>& obligations) {
    std::vector<TgbaEdge> out;
    Branch start;
    start.done.assign(c_.size(), 0);
    run(std::move(start), obligations, out);
    return simplify(std::move(out));
  }

 private:
  struct Branch {
    std::vector<char> done;
    Cube cube;
    std::vector<int> next;
    std::uint64_t postponed = 0;
  };

  void run(Branch br, std::vector<int> todo, std::vector<TgbaEdge>& out) {
    while (!todo.empty()) {
      const int x = todo.back();
      todo.pop_back();
      if (br.done[x]) continue;
      br.done[x] = 1;
      const Formula& f = c_.formula(x);
      switch (f.kind()) {
        case Kind::True:
          break;
        case Kind::False:
          return;
        case Kind::Atom:
        case Kind::Not: {
          const char name = f.kind() == Kind::Atom ? f.name() : f.child().name();
          auto joined = br.cube.join(Cube::literal(name, f.kind() == Kind::Atom));
          if (!joined) return;
          br.cube = *joined;
          break;
        }
        case Kind::And:
          todo.push_back(c_.left(x));
          todo.push_back(c_.right(x));
          break;
        case Kind::Or: {
          const int l = c_.left(x), r = c_.right(x);
          if (br.done[l] || br.done[r]) break;
          auto alt = todo;
          alt.push_back(l);
          run(br, std::move(alt), out);
          todo.push_back(r);
          break;
        }
        case Kind::Next:
          add_next(br, c_.left(x));
          break;
        case Kind::Until: {
          const int a = c_.left(x), b = c_.right(x);
          if (br.done[b]) break;
          auto fulfil = todo;
          fulfil.push_back(b);
          run(br, std::move(fulfil), out);
          todo.push_back(a);
          add_next(br, x);
          br.postponed |= std::uint64_t{1} << c_.until_bit(x);
          break;
        }
        case Kind::Release: {
          const int a = c_.left(x), b = c_.right(x);
          if (br.done[a]) {
            todo.push_back(b);
            break;
          }
          auto both = todo;
          both.push_back(a);
          both.push_back(b);
          run(br, std::move(both), out);
          todo.push_back(b);
          add_next(br, x);
          break;
        }
        default:
          throw std::invalid_argument("translate expects core NNF input");
      }
    }
    std::sort(br.next.begin(), br.next.end());
    const std::uint64_t all = c_.until_count() == 64 ? ~std::uint64_t{0}
                                                     : (std::uint64_t{1} << c_.until_count()) - 1;
    out.push_back({br.cube, std::move(br.next), all & ~br.postponed});
    // A single state can branch exponentially, so the deadline is polled here too.
    if ((++leaves_ & 1023) == 0) limits_.check(0);
  }

  static void add_next(Branch& br, int id) {
    if (std::find(br.next.begin(), br.next.end(), id) == br.next.end()) br.next.push_back(id);
  }

  // Drops edges dominated by another edge with the same target, a weaker
  // label and at least the same marks.
  static std::vector<TgbaEdge> simplify(std::vector<TgbaEdge> edges) {
    std::map<std::vector<int>, std::vector<std::size_t>> by_target;
    for (std::size_t i = 0; i < edges.size(); ++i) by_target[edges[i].next].push_back(i);
    std::vector<char> dropped(edges.size(), 0);
    for (const auto& [next, group] : by_target) {
      for (std::size_t i : group) {
        for (std::size_t j : group) {
          if (dropped[i]) break;
          if (i == j || dropped[j]) continue;
          const bool dominated = edges[i].label.implies(edges[j].label) &&
                                 (edges[i].marks & ~edges[j].marks) == 0;
          const bool identical = edges[i].label == edges[j].label && edges[i].marks == edges[j].marks;
          if (dominated && (!identical || j < i)) dropped[i] = 1;
        }
      }
    }
    std::vector<TgbaEdge> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!dropped[i]) out.push_back(std::move(edges[i]));
    }
    return out;
  }

  const Closure& c_;
  const Limits& limits_;
  std::size_t leaves_ = 0;
};

struct Tgba {
  std::size_t state_count = 0;
  struct Edge {
    std::size_t src;
    Cube label;
    std::size_t dst;
    std::uint64_t marks;
  };
  std::vector<Edge> edges;
  int set_count = 0;
};

Tgba build_tgba(const Formula& f, const Limits& limits) {
  Closure closure(f);
  Expander expander(closure, limits);
  std::map<std::vector<int>, std::size_t> ids;
  std::vector<std::vector<int>> states;
  std::deque<std::size_t> queue;
  auto state_of = [&](const std::vector<int>& key) {
    auto [it, inserted] = ids.emplace(key, states.size());
    if (inserted) {
      states.push_back(key);
      queue.push_back(it->second);
      limits.check(states.size());
    }
    return it->second;
  };
  state_of({closure.root()});
  Tgba out;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (TgbaEdge& e : expander.expand(states[s])) {
      const std::size_t d = state_of(e.next);
      out.edges.push_back({s, e.label, d, e.marks});
    }
  }
  out.state_count = states.size();

  // Keep only acceptance sets that some edge actually misses.
  std::uint64_t relevant = 0;
  const std::uint64_t all = closure.until_count() == 64
                                ? ~std::uint64_t{0}
                                : (std::uint64_t{1} << closure.until_count()) - 1;
  for (const auto& e : out.edges) relevant |= all & ~e.marks;
  std::vector<int> bits;
  for (int j = 0; j < 64; ++j) {
    if ((relevant >> j) & 1u) bits.push_back(j);
  }
  for (auto& e : out.edges) {
    std::uint64_t packed = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if ((e.marks >> bits[k]) & 1u) packed |= std::uint64_t{1} << k;
    }
    e.marks = packed;
  }
  out.set_count = static_cast<int>(bits.size());
  return out;
}

// Counter-based degeneralization: level k (== set_count) is accepting.
Automaton degeneralize(const Tgba& g, AtomSet atoms, const Limits& limits) {
  const int k = g.set_count;
  std::vector<std::vector<std::size_t>> out_edges(g.state_count);
  for (std::size_t i = 0; i < g.edges.size(); ++i) out_edges[g.edges[i].src].push_back(i);

  std::map<std::pair<std::size_t, int>, StateId> ids;
  std::vector<std::pair<std::size_t, int>> states;
  std::deque<StateId> queue;
  auto state_of = [&](std::size_t q, int level) {
    auto [it, inserted] = ids.emplace(std::make_pair(q, level), static_cast<StateId>(states.size()));
    if (inserted) {
      states.emplace_back(q, level);
      queue.push_back(it->second);
      limits.check(states.size());
    }
    return it->second;
  };
  Automaton b;
  b.atoms = atoms;
  b.initial = state_of(0, 0);
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    const auto [q, level] = states[s];
    for (std::size_t ei : out_edges[q]) {
      const auto& e = g.edges[ei];
      int next = level == k ? 0 : level;
      while (next < k && ((e.marks >> next) & 1u)) ++next;
      b.transitions.push_back({s, e.label, state_of(e.dst, next)});
    }
  }
  b.state_count = states.size();
  for (StateId s = 0; s < states.size(); ++s) {
    if (states[s].second == k) b.accepting.push_back(s);
  }
  return b;
}

// Removes states that cannot reach an accepting cycle, merges bisimilar
// states, drops subsumed transitions and renumbers in BFS order.
Automaton reduce(const Automaton& in) {
  const std::size_t n = in.state_count;
  detail::Adjacency adj(n), rev(n);
  for (const Transition& t : in.transitions) {
    adj[t.src].push_back(t.dst);
    rev[t.dst].push_back(t.src);
  }
  std::vector<detail::Node> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<detail::Node>(i);
  const detail::SccResult scc = detail::tarjan(adj, all);
  const std::vector<char> cyclic = detail::nontrivial_components(adj, scc);
  std::vector<char> good_component(scc.count, 0);
  for (StateId s : in.accepting) {
    if (cyclic[scc.component[s]]) good_component[scc.component[s]] = 1;
  }
  std::vector<char> productive(n, 0);
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    if (good_component[scc.component[s]]) {
      productive[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    for (detail::Node p : rev[s]) {
      if (!productive[p]) {
        productive[p] = 1;
        queue.push_back(p);
      }
    }
  }
  if (!productive[in.initial]) return empty_language(in.atoms);

  // Partition refinement, starting from the accepting / non-accepting split.
  std::vector<int> cls(n, -1);
  for (StateId s = 0; s < n; ++s) {
    if (productive[s]) cls[s] = in.is_accepting(s) ? 1 : 0;
  }
  const auto out = in.outgoing();
  std::size_t classes = 0;
  while (true) {
    std::map<std::pair<int, std::vector<std::pair<Cube, int>>>, int> sig_ids;
    std::vector<int> next(n, -1);
    for (StateId s = 0; s < n; ++s) {
      if (!productive[s]) continue;
      std::vector<std::pair<Cube, int>> sig;
      for (std::size_t ti : out[s]) {
        const Transition& t = in.transitions[ti];
        if (productive[t.dst]) sig.emplace_back(t.label, cls[t.dst]);
      }
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      auto [it, inserted] =
          sig_ids.emplace(std::make_pair(cls[s], std::move(sig)), static_cast<int>(sig_ids.size()));
      next[s] = it->second;
    }
    const std::size_t count = sig_ids.size();
    cls = std::move(next);
    if (count == classes) break;
    classes = count;
  }

  // Quotient transitions per class, with subsumption inside each (src, dst).
  std::vector<int> representative(classes, -1);
  for (StateId s = 0; s < n; ++s) {
    if (productive[s] && representative[cls[s]] < 0) representative[cls[s]] = static_cast<int>(s);
  }
  std::vector<std::vector<std::pair<Cube, int>>> edges(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& list = edges[c];
    for (std::size_t ti : out[representative[c]]) {
      const Transition& t = in.transitions[ti];
      if (productive[t.dst]) list.emplace_back(t.label, cls[t.dst]);
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    std::vector<std::pair<Cube, int>> kept;
    for (std::size_t i = 0; i < list.size(); ++i) {
      bool subsumed = false;
      for (std::size_t j = 0; j < list.size() && !subsumed; ++j) {
        subsumed = i != j && list[i].second == list[j].second && list[i].first != list[j].first &&
                   list[i].first.implies(list[j].first);
      }
      if (!subsumed) kept.push_back(list[i]);
    }
    list = std::move(kept);
  }

  // BFS renumbering from the initial class.
  std::vector<StateId> order(classes, UINT32_MAX);
  std::vector<int> by_order;
  std::deque<int> bfs;
  order[cls[in.initial]] = 0;
  by_order.push_back(cls[in.initial]);
  bfs.push_back(cls[in.initial]);
  while (!bfs.empty()) {
    const int c = bfs.front();
    bfs.pop_front();
    for (const auto& [label, d] : edges[c]) {
      if (order[d] == UINT32_MAX) {
        order[d] = static_cast<StateId>(by_order.size());
        by_order.push_back(d);
        bfs.push_back(d);
      }
    }
  }
  Automaton b;
  b.atoms = in.atoms;
  b.state_count = by_order.size();
  b.initial = 0;
  for (std::size_t i = 0; i < by_order.size(); ++i) {
    const int c = by_order[i];
    if (in.is_accepting(static_cast<StateId>(representative[c]))) {
      b.accepting.push_back(static_cast<StateId>(i));
    }
    for (const auto& [label, d] : edges[c]) {
      b.transitions.push_back({static_cast<StateId>(i), label, order[d]});
    }
  }
  return b;
}

}  // namespace

Automaton translate(const Formula& core, const Limits& limits) {
  if (!ltl::is_core(core)) throw std::invalid_argument("translate expects core NNF input");
  const Tgba g = build_tgba(core, limits);
  return reduce(degeneralize(g, core.atoms(), limits));
}

Automaton translate_any(const Formula& f, const Limits& limits) {
  return translate(ltl::to_core(ltl::to_nnf(f)), limits);
}

Automaton product(const Automaton& a, const Automaton& b, const Limits& limits) {
  const auto out_a = a.outgoing();
  const auto out_b = b.outgoing();
  // flag 0 waits for an accepting state of `a`, flag 1 for one of `b`.
  struct Key {
    StateId sa, sb;
    int flag;
  };
  std::unordered_map<std::uint64_t, StateId> ids;
  std::vector<Key> states;
  std::deque<StateId> queue;
  auto encode = [&](const Key& k) {
    return (static_cast<std::uint64_t>(k.sa) * b.state_count + k.sb) * 2 + k.flag;
  };
  auto state_of = [&](const Key& k) {
    auto [it, inserted] = ids.emplace(encode(k), static_cast<StateId>(states.size()));
    if (inserted) {
      states.push_back(k);
      queue.push_back(it->second);
      if ((states.size() & 1023) == 0 || states.size() > limits.state_cap) limits.check(states.size());
    }
    return it->second;
  };
  Automaton p;
  p.atoms = a.atoms | b.atoms;
  p.initial = state_of({a.initial, b.initial, 0});
  std::vector<char> acc_a(a.state_count, 0), acc_b(b.state_count, 0);
  for (StateId s : a.accepting) acc_a[s] = 1;
  for (StateId s : b.accepting) acc_b[s] = 1;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    const Key k = states[s];
    int flag = k.flag;
    if (flag == 0 && acc_a[k.sa]) flag = 1;
    else if (flag == 1 && acc_b[k.sb]) flag = 0;
    for (std::size_t ta : out_a[k.sa]) {
      const Transition& x = a.transitions[ta];
      for (std::size_t tb : out_b[k.sb]) {
        const Transition& y = b.transitions[tb];
        auto label = x.label.join(y.label);
        if (!label) continue;
        p.transitions.push_back({s, *label, state_of({x.dst, y.dst, flag})});
      }
    }
  }
  p.state_count = states.size();
  for (StateId s = 0; s < states.size(); ++s) {
    if (states[s].flag == 0 && acc_a[states[s].sa]) p.accepting.push_back(s);
  }
  return p;
}

Verdict check(const Automaton& system, const Formula& spec, const Limits& limits) {
  const auto start = std::chrono::steady_clock::now();
  const Automaton negated = translate(ltl::to_core(ltl::negate(spec)), limits);
  const Automaton joint = product(system, negated, limits);
  Verdict v;
  v.counterexample = find_accepting_lasso(joint);
  v.holds = !v.counterexample.has_value();
  v.explored_states = joint.state_count;
  v.elapsed = std::chrono::steady_clock::now() - start;
  return v;
}

}  // namespace octal::buchi
