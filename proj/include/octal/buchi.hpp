#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "octal/atoms.hpp"
#include "octal/ltl.hpp"

namespace octal::buchi {

using StateId = std::uint32_t;

/// Conjunction of literals. The empty cube is true.
class Cube {
 public:
  Cube() = default;
  /// Throws std::invalid_argument if an atom appears with both polarities.
  Cube(std::uint32_t positive, std::uint32_t negative);

  static Cube literal(char atom, bool positive);

  std::uint32_t positive() const { return pos_; }
  std::uint32_t negative() const { return neg_; }
  bool is_true() const { return pos_ == 0 && neg_ == 0; }
  AtomSet atoms() const { return AtomSet(pos_ | neg_); }
  int literal_count() const;

  bool satisfied_by(Letter letter) const { return (letter & pos_) == pos_ && (letter & neg_) == 0; }
  /// Conjunction, or nullopt on a polarity clash.
  std::optional<Cube> join(const Cube& other) const;
  /// Every letter satisfying *this also satisfies `other`.
  bool implies(const Cube& other) const {
    return (other.pos_ & ~pos_) == 0 && (other.neg_ & ~neg_) == 0;
  }
  /// Cheapest letter satisfying the cube: unconstrained atoms are false.
  Letter witness() const { return pos_; }

  friend bool operator==(const Cube&, const Cube&) = default;
  friend auto operator<=>(const Cube&, const Cube&) = default;

 private:
  std::uint32_t pos_ = 0;
  std::uint32_t neg_ = 0;
};

/// "1", or literals joined by " & " in alphabetical order, e.g. "a & !c".
std::string to_string(const Cube& cube);
/// Accepts "1" or "&"-joined literals with optional whitespace.
Cube parse_cube(std::string_view text);

struct Transition {
  StateId src = 0;
  Cube label;
  StateId dst = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Nondeterministic Buchi automaton with a single initial state and
/// state-based acceptance.
struct Automaton {
  std::size_t state_count = 1;
  StateId initial = 0;
  std::vector<StateId> accepting;  // sorted, unique
  std::vector<Transition> transitions;
  AtomSet atoms;

  bool is_accepting(StateId s) const;
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
  /// Transition indices grouped by source state.
  std::vector<std::vector<std::size_t>> outgoing() const;

  friend bool operator==(const Automaton&, const Automaton&) = default;
};

/// One accepting state with a true self-loop.
Automaton universal(AtomSet atoms = {});
/// Single non-accepting state without transitions.
Automaton empty_language(AtomSet atoms = {});

/// Raised when a state cap or wall-clock deadline is exceeded. Callers report
/// the verdict as "unknown".
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Limits {
  std::size_t state_cap = 200'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  /// Throws ResourceLimit when either bound is exceeded.
  void check(std::size_t states) const;
};

/// Translates a core-NNF formula (to_core(to_nnf(f))) into an automaton with
/// the same language. Throws std::invalid_argument on non-core input.
Automaton translate(const ltl::Formula& core, const Limits& limits = {});

/// Convenience: translate(to_core(to_nnf(f))).
Automaton translate_any(const ltl::Formula& f, const Limits& limits = {});

/// Intersection of the two languages; reachable part only.
Automaton product(const Automaton& a, const Automaton& b, const Limits& limits = {});

/// nullopt iff the language is empty; otherwise an accepted lasso over the
/// automaton's atoms.
std::optional<ltl::Lasso> find_accepting_lasso(const Automaton& b);

/// Whether some run on the word visits an accepting state infinitely often.
/// Throws ltl::UndeclaredAtom if the automaton mentions an atom the word does
/// not declare.
bool accepts(const Automaton& b, const ltl::Lasso& w);

struct Verdict {
  bool holds = true;
  std::optional<ltl::Lasso> counterexample;
  std::size_t explored_states = 0;
  std::chrono::nanoseconds elapsed{0};
};

/// Decides whether every word of `system` satisfies `spec`.
/// Throws ResourceLimit when the limits are exceeded.
Verdict check(const Automaton& system, const ltl::Formula& spec, const Limits& limits = {});

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Canonical text: "states n", "initial q", "accepting ...", then one
/// "src -> dst : cube" line per transition sorted by (src, dst, cube text).
std::string write_automaton(const Automaton& b);
Automaton read_automaton(std::string_view text);

/// FNV-1a over the canonical text, as 16 hex digits.
std::string automaton_hash(const Automaton& b);

}  // namespace octal::buchi
