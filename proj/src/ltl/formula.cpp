#include <cctype>
#include <functional>
#include <stdexcept>

#include "octal/ltl.hpp"

namespace octal::ltl {

int arity(Kind kind) {
  switch (kind) {
    case Kind::Atom:
    case Kind::True:
    case Kind::False:
      return 0;
    case Kind::Not:
    case Kind::Next:
    case Kind::Globally:
    case Kind::Finally:
      return 1;
    default:
      return 2;
  }
}

std::string_view symbol(Kind kind) {
  switch (kind) {
    case Kind::Atom: return "";
    case Kind::True: return "1";
    case Kind::False: return "0";
    case Kind::Not: return "!";
    case Kind::And: return "&";
    case Kind::Or: return "|";
    case Kind::Next: return "X";
    case Kind::Globally: return "G";
    case Kind::Finally: return "F";
    case Kind::Until: return "U";
    case Kind::Release: return "R";
    case Kind::WeakUntil: return "W";
    case Kind::StrongRelease: return "M";
  }
  return "";
}

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Formula Formula::atom(char name) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Atom;
  node->name = name;
  node->atoms = 1u << atom_index(name);
  node->hash = mix(static_cast<std::size_t>(Kind::Atom), static_cast<std::size_t>(name));
  return Formula(std::move(node));
}

Formula Formula::constant(bool value) {
  auto node = std::make_shared<Node>();
  node->kind = value ? Kind::True : Kind::False;
  node->hash = mix(static_cast<std::size_t>(node->kind), 0);
  return Formula(std::move(node));
}

Formula Formula::unary(Kind kind, Formula child) {
  if (arity(kind) != 1) throw std::invalid_argument("not a unary operator");
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->size = 1 + child.size();
  node->atoms = child.node_->atoms;
  node->hash = mix(mix(static_cast<std::size_t>(kind), 1), child.hash());
  node->children.push_back(std::move(child));
  return Formula(std::move(node));
}

Formula Formula::binary(Kind kind, Formula left, Formula right) {
  if (arity(kind) != 2) throw std::invalid_argument("not a binary operator");
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->size = 1 + left.size() + right.size();
  node->atoms = left.node_->atoms | right.node_->atoms;
  node->hash = mix(mix(mix(static_cast<std::size_t>(kind), 2), left.hash()), right.hash());
  node->children.push_back(std::move(left));
  node->children.push_back(std::move(right));
  return Formula(std::move(node));
}

const Formula& Formula::child() const {
  if (node_->children.empty()) throw std::logic_error("leaf formula has no children");
  return node_->children[0];
}

const Formula& Formula::right() const {
  if (node_->children.size() < 2) throw std::logic_error("formula is not binary");
  return node_->children[1];
}

bool Formula::is_literal() const {
  return kind() == Kind::Atom || (kind() == Kind::Not && child().kind() == Kind::Atom);
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.kind() == Kind::Atom) return a.name() == b.name();
  const auto& ca = a.node_->children;
  const auto& cb = b.node_->children;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!(ca[i] == cb[i])) return false;
  }
  return true;
}

Formula operator!(const Formula& f) { return Formula::unary(Kind::Not, f); }
Formula operator&(const Formula& a, const Formula& b) { return Formula::binary(Kind::And, a, b); }
Formula operator|(const Formula& a, const Formula& b) { return Formula::binary(Kind::Or, a, b); }
Formula X(const Formula& f) { return Formula::unary(Kind::Next, f); }
Formula G(const Formula& f) { return Formula::unary(Kind::Globally, f); }
Formula F(const Formula& f) { return Formula::unary(Kind::Finally, f); }
Formula U(const Formula& a, const Formula& b) { return Formula::binary(Kind::Until, a, b); }
Formula R(const Formula& a, const Formula& b) { return Formula::binary(Kind::Release, a, b); }
Formula W(const Formula& a, const Formula& b) { return Formula::binary(Kind::WeakUntil, a, b); }
Formula M(const Formula& a, const Formula& b) { return Formula::binary(Kind::StrongRelease, a, b); }

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength; higher binds tighter.
int precedence(Kind kind) {
  switch (kind) {
    case Kind::Or: return 1;
    case Kind::And: return 2;
    case Kind::Until:
    case Kind::Release:
    case Kind::WeakUntil:
    case Kind::StrongRelease: return 3;
    case Kind::Not:
    case Kind::Next:
    case Kind::Globally:
    case Kind::Finally: return 4;
    default: return 5;
  }
}

void print(const Formula& f, std::string& out) {
  auto wrapped = [&out](const Formula& sub, bool parens) {
    if (parens) out.push_back('(');
    print(sub, out);
    if (parens) out.push_back(')');
  };
  switch (arity(f.kind())) {
    case 0:
      if (f.kind() == Kind::Atom) {
        out.push_back(f.name());
      } else {
        out += symbol(f.kind());
      }
      return;
    case 1:
      out += symbol(f.kind());
      wrapped(f.child(), precedence(f.child().kind()) < precedence(f.kind()));
      return;
    default: {
      const int p = precedence(f.kind());
      // Right-associative: a left operand of the same tier needs parentheses.
      wrapped(f.left(), precedence(f.left().kind()) <= p);
      out.push_back(' ');
      out += symbol(f.kind());
      out.push_back(' ');
      wrapped(f.right(), precedence(f.right().kind()) < p);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::size_t printed_length(const Formula& f) {
  std::size_t n = 0;
  for (char c : to_string(f)) {
    if (!std::isspace(static_cast<unsigned char>(c))) ++n;
  }
  return n;
}

}  // namespace octal::ltl
