#include "octal/ltl.hpp"

namespace octal::ltl {

namespace {

Formula nnf(const Formula& f, bool negated) {
  switch (f.kind()) {
    case Kind::Atom:
      return negated ? !f : f;
    case Kind::True:
    case Kind::False:
      return Formula::constant((f.kind() == Kind::True) != negated);
    case Kind::Not:
      return nnf(f.child(), !negated);
    case Kind::And:
      return Formula::binary(negated ? Kind::Or : Kind::And, nnf(f.left(), negated),
                             nnf(f.right(), negated));
    case Kind::Or:
      return Formula::binary(negated ? Kind::And : Kind::Or, nnf(f.left(), negated),
                             nnf(f.right(), negated));
    case Kind::Next:
      return X(nnf(f.child(), negated));
    case Kind::Globally:
      return Formula::unary(negated ? Kind::Finally : Kind::Globally, nnf(f.child(), negated));
    case Kind::Finally:
      return Formula::unary(negated ? Kind::Globally : Kind::Finally, nnf(f.child(), negated));
    case Kind::Until:
      return Formula::binary(negated ? Kind::Release : Kind::Until, nnf(f.left(), negated),
                             nnf(f.right(), negated));
    case Kind::Release:
      return Formula::binary(negated ? Kind::Until : Kind::Release, nnf(f.left(), negated),
                             nnf(f.right(), negated));
    case Kind::WeakUntil:
      return Formula::binary(negated ? Kind::StrongRelease : Kind::WeakUntil,
                             nnf(f.left(), negated), nnf(f.right(), negated));
    case Kind::StrongRelease:
      return Formula::binary(negated ? Kind::WeakUntil : Kind::StrongRelease,
                             nnf(f.left(), negated), nnf(f.right(), negated));
  }
  throw std::logic_error("unhandled formula kind");
}

}  // namespace

bool is_nnf(const Formula& f) {
  if (f.kind() == Kind::Not) return f.child().kind() == Kind::Atom;
  if (f.is_leaf()) return true;
  if (arity(f.kind()) == 1) return is_nnf(f.child());
  return is_nnf(f.left()) && is_nnf(f.right());
}

bool is_core(const Formula& f) {
  switch (f.kind()) {
    case Kind::Atom:
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Not:
      return f.child().kind() == Kind::Atom;
    case Kind::Next:
      return is_core(f.child());
    case Kind::And:
    case Kind::Or:
    case Kind::Until:
    case Kind::Release:
      return is_core(f.left()) && is_core(f.right());
    default:
      return false;
  }
}

Formula to_nnf(const Formula& f) { return nnf(f, false); }

Formula negate(const Formula& f) { return nnf(f, true); }

Formula to_core(const Formula& f) {
  switch (f.kind()) {
    case Kind::Atom:
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Not:
      if (f.child().kind() != Kind::Atom) {
        throw std::invalid_argument("to_core expects NNF input");
      }
      return f;
    case Kind::Next:
      return X(to_core(f.child()));
    case Kind::Globally:
      return R(Formula::constant(false), to_core(f.child()));
    case Kind::Finally:
      return U(Formula::constant(true), to_core(f.child()));
    case Kind::And:
    case Kind::Or:
    case Kind::Until:
    case Kind::Release:
      return Formula::binary(f.kind(), to_core(f.left()), to_core(f.right()));
    case Kind::WeakUntil: {
      Formula a = to_core(f.left());
      Formula b = to_core(f.right());
      return R(b, a | b);
    }
    case Kind::StrongRelease: {
      Formula a = to_core(f.left());
      Formula b = to_core(f.right());
      return U(b, a & b);
    }
  }
  throw std::logic_error("unhandled formula kind");
}

}  // namespace octal::ltl
