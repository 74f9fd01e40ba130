#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "octal/atoms.hpp"

namespace octal::ltl {

enum class Kind : std::uint8_t {
  Atom,
  True,
  False,
  Not,
  And,
  Or,
  Next,
  Globally,
  Finally,
  Until,
  Release,
  WeakUntil,
  StrongRelease,
};

int arity(Kind kind);

/// Operator symbol as written in formulas ("U", "&", "!", ...). Empty for leaves.
std::string_view symbol(Kind kind);

/// Immutable LTL formula. Cheap to copy; subtrees are shared.
class Formula {
 public:
  static Formula atom(char name);
  static Formula constant(bool value);
  static Formula unary(Kind kind, Formula child);
  static Formula binary(Kind kind, Formula left, Formula right);

  Kind kind() const;
  /// Atom letter; only meaningful for Kind::Atom.
  char name() const;
  /// Sole child of a unary node, or left child of a binary node.
  const Formula& child() const;
  const Formula& left() const { return child(); }
  const Formula& right() const;

  /// Number of nodes in the expression tree.
  std::size_t size() const;
  AtomSet atoms() const;
  std::size_t hash() const;

  bool is_leaf() const { return arity(kind()) == 0; }
  /// Atom or negated atom.
  bool is_literal() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

struct Formula::Node {
  Kind kind;
  char name = 0;
  std::size_t size = 1;
  std::uint32_t atoms = 0;
  std::size_t hash = 0;
  std::vector<Formula> children;
};

inline Kind Formula::kind() const { return node_->kind; }
inline char Formula::name() const { return node_->name; }
inline std::size_t Formula::size() const { return node_->size; }
inline AtomSet Formula::atoms() const { return AtomSet(node_->atoms); }
inline std::size_t Formula::hash() const { return node_->hash; }

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

// Shorthands used throughout tests and generators.
Formula operator!(const Formula& f);
Formula operator&(const Formula& a, const Formula& b);
Formula operator|(const Formula& a, const Formula& b);
Formula X(const Formula& f);
Formula G(const Formula& f);
Formula F(const Formula& f);
Formula U(const Formula& a, const Formula& b);
Formula R(const Formula& a, const Formula& b);
Formula W(const Formula& a, const Formula& b);
Formula M(const Formula& a, const Formula& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  /// Byte offset into the input where the error was detected.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses the textual grammar: unary {!,G,F,X} bind tightest, then {U,R,W,M},
/// then &, then |, then ->. All binary operators are right-associative.
/// "1" is true; "0" and "N" are false. "a -> b" is rewritten to "!a | b".
Formula parse(std::string_view text);

/// Canonical text with minimal parentheses; parse(to_string(f)) == f.
std::string to_string(const Formula& f);

/// Character count of to_string(f) excluding whitespace.
std::size_t printed_length(const Formula& f);

/// Negation only directly above atoms.
bool is_nnf(const Formula& f);
/// NNF restricted to {atom, true, false, !atom, &, |, X, U, R}.
bool is_core(const Formula& f);

Formula to_nnf(const Formula& f);
/// Rewrites F, G, W, M into U/R. Input must be in NNF.
Formula to_core(const Formula& f);
/// NNF of the negation.
Formula negate(const Formula& f);

struct GenConfig {
  std::size_t tree_size = 15;
  int atom_count = 3;
  std::uint64_t seed = 0;
  bool allow_constants = false;
};

/// Random formula over the first `atom_count` letters with exactly
/// `tree_size` nodes. Pure function of the config.
Formula random_formula(const GenConfig& cfg);

/// Ultimately periodic word prefix . loop^omega. Each letter is a bitmask of
/// the atoms that hold; bits outside `atoms` must be clear.
struct Lasso {
  AtomSet atoms;
  std::vector<Letter> prefix;
  std::vector<Letter> loop;

  std::size_t length() const { return prefix.size() + loop.size(); }
  /// Letter at position i of the infinite word.
  Letter at(std::size_t i) const;

  friend bool operator==(const Lasso&, const Lasso&) = default;
};

/// Throws std::invalid_argument when the loop is empty or a letter sets an
/// undeclared atom.
void validate(const Lasso& w);

/// e.g. "a !b ; (!a b)^w" for prefix [{a}], loop [{b}] over atoms {a,b}.
std::string to_string(const Lasso& w);

class UndeclaredAtom : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Truth of f at position 0 of prefix . loop^omega.
bool eval(const Formula& f, const Lasso& w);

}  // namespace octal::ltl
