#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <deque>
#include <sstream>

#include "graph_search.hpp"
#include "octal/buchi.hpp"

namespace octal::buchi {

Cube::Cube(std::uint32_t positive, std::uint32_t negative) : pos_(positive), neg_(negative) {
  if ((pos_ & neg_) != 0) throw std::invalid_argument("cube contains an atom with both polarities");
}

Cube Cube::literal(char atom, bool positive) {
  const std::uint32_t bit = 1u << atom_index(atom);
  return positive ? Cube(bit, 0) : Cube(0, bit);
}

int Cube::literal_count() const { return std::popcount(pos_) + std::popcount(neg_); }

std::optional<Cube> Cube::join(const Cube& other) const {
  const std::uint32_t pos = pos_ | other.pos_;
  const std::uint32_t neg = neg_ | other.neg_;
  if ((pos & neg) != 0) return std::nullopt;
  return Cube(pos, neg);
}

std::string to_string(const Cube& cube) {
  if (cube.is_true()) return "1";
  std::string out;
  for (int i = 0; i < kAtomCount; ++i) {
    const bool pos = (cube.positive() >> i) & 1u;
    const bool neg = (cube.negative() >> i) & 1u;
    if (!pos && !neg) continue;
    if (!out.empty()) out += " & ";
    if (neg) out += "!";
    out.push_back(atom_letter(i));
  }
  return out;
}

Cube parse_cube(std::string_view text) {
  std::uint32_t pos = 0, neg = 0;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip();
  if (i < text.size() && text[i] == '1') {
    ++i;
    skip();
    if (i != text.size()) throw std::invalid_argument("trailing text after cube '1'");
    return Cube();
  }
  bool expect_literal = true;
  while (true) {
    skip();
    if (i == text.size()) break;
    if (!expect_literal) {
      if (text[i] != '&') throw std::invalid_argument("expected '&' in cube");
      ++i;
      expect_literal = true;
      continue;
    }
    bool negated = false;
    if (text[i] == '!') {
      negated = true;
      ++i;
      skip();
    }
    if (i == text.size() || !is_atom_letter(text[i])) {
      throw std::invalid_argument("expected atom in cube");
    }
    const std::uint32_t bit = 1u << atom_index(text[i]);
    ++i;
    if (((negated ? pos : neg) & bit) != 0) {
      throw std::invalid_argument("contradictory cube");
    }
    (negated ? neg : pos) |= bit;
    expect_literal = false;
  }
  if (expect_literal) throw std::invalid_argument("empty or dangling cube");
  return Cube(pos, neg);
}

bool Automaton::is_accepting(StateId s) const {
  return std::binary_search(accepting.begin(), accepting.end(), s);
}

void Automaton::validate() const {
  if (state_count == 0) throw std::invalid_argument("automaton needs at least one state");
  if (initial >= state_count) throw std::invalid_argument("initial state out of range");
  for (std::size_t i = 0; i < accepting.size(); ++i) {
    if (accepting[i] >= state_count) throw std::invalid_argument("accepting state out of range");
    if (i > 0 && accepting[i - 1] >= accepting[i]) {
      throw std::invalid_argument("accepting set must be sorted and unique");
    }
  }
  for (const Transition& t : transitions) {
    if (t.src >= state_count || t.dst >= state_count) {
      throw std::invalid_argument("transition endpoint out of range");
    }
    if (!t.label.atoms().subset_of(atoms)) {
      throw std::invalid_argument("transition label uses an atom outside the universe");
    }
  }
}

std::vector<std::vector<std::size_t>> Automaton::outgoing() const {
  std::vector<std::vector<std::size_t>> out(state_count);
  for (std::size_t i = 0; i < transitions.size(); ++i) out[transitions[i].src].push_back(i);
  return out;
}

Automaton universal(AtomSet atoms) {
  Automaton b;
  b.state_count = 1;
  b.accepting = {0};
  b.transitions = {{0, Cube(), 0}};
  b.atoms = atoms;
  return b;
}

Automaton empty_language(AtomSet atoms) {
  Automaton b;
  b.state_count = 1;
  b.atoms = atoms;
  return b;
}

void Limits::check(std::size_t states) const {
  if (states > state_cap) {
    throw ResourceLimit("state cap of " + std::to_string(state_cap) + " exceeded");
  }
  if (deadline && std::chrono::steady_clock::now() > *deadline) {
    throw ResourceLimit("deadline exceeded");
  }
}

// ---------------------------------------------------------------------------
// Emptiness and membership

namespace {

using detail::Adjacency;
using detail::Node;

// Shortest transition path from `from` to `to` (BFS), restricted to nodes for
// which `allowed` holds. Requires at least one step when from == to.
std::vector<std::size_t> shortest_path(const Automaton& b,
                                       const std::vector<std::vector<std::size_t>>& out,
                                       StateId from, StateId to,
                                       const std::vector<char>& allowed) {
  std::vector<std::size_t> via(b.state_count, SIZE_MAX);
  std::vector<char> seen(b.state_count, 0);
  std::deque<StateId> queue;
  // Seed with the successors of `from` so that a cycle is found when from == to.
  for (std::size_t ti : out[from]) {
    const StateId d = b.transitions[ti].dst;
    if (!allowed[d] || seen[d]) continue;
    seen[d] = 1;
    via[d] = ti;
    queue.push_back(d);
  }
  if (from != to) {
    // Ordinary search also starts at `from` itself.
    if (!seen[from]) {
      seen[from] = 1;
      queue.push_front(from);
    }
  }
  while (!queue.empty() && !seen[to]) {
    const StateId s = queue.front();
    queue.pop_front();
    for (std::size_t ti : out[s]) {
      const StateId d = b.transitions[ti].dst;
      if (!allowed[d] || seen[d]) continue;
      seen[d] = 1;
      via[d] = ti;
      queue.push_back(d);
    }
  }
  std::vector<std::size_t> path;
  if (!seen[to]) return path;
  StateId cur = to;
  do {
    const std::size_t ti = via[cur];
    path.push_back(ti);
    cur = b.transitions[ti].src;
  } while (cur != from);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::optional<ltl::Lasso> find_accepting_lasso(const Automaton& b) {
  Adjacency adj(b.state_count);
  for (const Transition& t : b.transitions) adj[t.src].push_back(t.dst);
  std::vector<char> acc(b.state_count, 0);
  for (StateId s : b.accepting) acc[s] = 1;

  const detail::SccResult scc = detail::tarjan(adj, {b.initial});
  const std::vector<char> cyclic = detail::nontrivial_components(adj, scc);
  std::optional<StateId> target;
  for (StateId s : b.accepting) {
    if (scc.component[s] != detail::kUnvisited && cyclic[scc.component[s]]) {
      target = s;
      break;
    }
  }
  if (!target) return std::nullopt;

  const auto out = b.outgoing();
  std::vector<char> everywhere(b.state_count, 1);
  std::vector<char> in_component(b.state_count, 0);
  for (StateId s = 0; s < b.state_count; ++s) {
    in_component[s] = scc.component[s] == scc.component[*target];
  }
  ltl::Lasso w;
  w.atoms = b.atoms;
  if (*target != b.initial) {
    for (std::size_t ti : shortest_path(b, out, b.initial, *target, everywhere)) {
      w.prefix.push_back(b.transitions[ti].label.witness());
    }
  }
  for (std::size_t ti : shortest_path(b, out, *target, *target, in_component)) {
    w.loop.push_back(b.transitions[ti].label.witness());
  }
  return w;
}

bool accepts(const Automaton& b, const ltl::Lasso& w) {
  ltl::validate(w);
  if (!b.atoms.subset_of(w.atoms)) {
    throw ltl::UndeclaredAtom("automaton mentions atoms not declared by the lasso");
  }
  // Synchronize states with word positions; the loop closes back to |prefix|.
  const std::size_t n = w.length();
  const std::size_t loop_start = w.prefix.size();
  Adjacency adj(b.state_count * n);
  std::vector<char> acc(b.state_count * n, 0);
  for (const Transition& t : b.transitions) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!t.label.satisfied_by(w.at(i))) continue;
      const std::size_t next = i + 1 < n ? i + 1 : loop_start;
      adj[t.src * n + i].push_back(static_cast<Node>(t.dst * n + next));
    }
  }
  for (StateId s : b.accepting) {
    for (std::size_t i = 0; i < n; ++i) acc[s * n + i] = 1;
  }
  return detail::accepting_cycle_node(adj, acc, static_cast<Node>(b.initial * n)).has_value();
}

// ---------------------------------------------------------------------------
// Text format

FormatError::FormatError(const std::string& message, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string write_automaton(const Automaton& b) {
  std::ostringstream out;
  out << "states " << b.state_count << "\n";
  out << "initial " << b.initial << "\n";
  out << "accepting";
  for (StateId s : b.accepting) out << " " << s;
  out << "\n";
  struct Line {
    StateId src, dst;
    std::string cube;
  };
  std::vector<Line> lines;
  lines.reserve(b.transitions.size());
  for (const Transition& t : b.transitions) lines.push_back({t.src, t.dst, to_string(t.label)});
  std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
    return std::tie(x.src, x.dst, x.cube) < std::tie(y.src, y.dst, y.cube);
  });
  for (const Line& l : lines) out << l.src << " -> " << l.dst << " : " << l.cube << "\n";
  return out.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::uint64_t parse_id(const std::string& token, std::size_t line) {
  if (token.empty() || !std::all_of(token.begin(), token.end(),
                                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw FormatError("expected a state id, got '" + token + "'", line);
  }
  try {
    return std::stoull(token);
  } catch (const std::exception&) {
    throw FormatError("state id out of range: '" + token + "'", line);
  }
}

}  // namespace

Automaton read_automaton(std::string_view text) {
  Automaton b;
  int header = 0;  // number of header lines consumed
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::vector<std::string> tok = words(line);
    if (header == 0) {
      if (tok.size() != 2 || tok[0] != "states") throw FormatError("expected 'states <n>'", line_no);
      b.state_count = parse_id(tok[1], line_no);
      if (b.state_count == 0) throw FormatError("automaton needs at least one state", line_no);
      ++header;
    } else if (header == 1) {
      if (tok.size() != 2 || tok[0] != "initial") throw FormatError("expected 'initial <id>'", line_no);
      const auto id = parse_id(tok[1], line_no);
      if (id >= b.state_count) throw FormatError("dangling initial state " + tok[1], line_no);
      b.initial = static_cast<StateId>(id);
      ++header;
    } else if (header == 2) {
      if (tok.empty() || tok[0] != "accepting") throw FormatError("expected 'accepting ...'", line_no);
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto id = parse_id(tok[i], line_no);
        if (id >= b.state_count) throw FormatError("dangling accepting state " + tok[i], line_no);
        b.accepting.push_back(static_cast<StateId>(id));
      }
      std::sort(b.accepting.begin(), b.accepting.end());
      b.accepting.erase(std::unique(b.accepting.begin(), b.accepting.end()), b.accepting.end());
      ++header;
    } else {
      const auto arrow = line.find("->");
      const auto colon = line.find(':');
      if (arrow == std::string_view::npos || colon == std::string_view::npos || colon < arrow) {
        throw FormatError("expected '<src> -> <dst> : <cube>'", line_no);
      }
      const auto src = parse_id(std::string(trim(line.substr(0, arrow))), line_no);
      const auto dst = parse_id(std::string(trim(line.substr(arrow + 2, colon - arrow - 2))), line_no);
      if (src >= b.state_count || dst >= b.state_count) {
        throw FormatError("dangling state id in transition", line_no);
      }
      Cube cube;
      try {
        cube = parse_cube(line.substr(colon + 1));
      } catch (const std::invalid_argument& e) {
        throw FormatError(e.what(), line_no);
      }
      b.atoms = b.atoms | cube.atoms();
      b.transitions.push_back({static_cast<StateId>(src), cube, static_cast<StateId>(dst)});
    }
    if (end == text.size()) break;
  }
  if (header < 3) throw FormatError("missing header lines", line_no);
  return b;
}

std::string automaton_hash(const Automaton& b) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : write_automaton(b)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace octal::buchi
