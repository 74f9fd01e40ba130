#include <functional>

#include "octal/ltl.hpp"

namespace octal::ltl {

Letter Lasso::at(std::size_t i) const {
  if (i < prefix.size()) return prefix[i];
  return loop[(i - prefix.size()) % loop.size()];
}

void validate(const Lasso& w) {
  if (w.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  auto check = [&w](Letter l) {
    if ((l & ~w.atoms.bits()) != 0) {
      throw std::invalid_argument("lasso letter assigns an undeclared atom");
    }
  };
  for (Letter l : w.prefix) check(l);
  for (Letter l : w.loop) check(l);
}

std::string to_string(const Lasso& w) {
  auto letter = [&w](Letter l) {
    std::string out = "{";
    bool first = true;
    for (int i = 0; i < kAtomCount; ++i) {
      if (!w.atoms.contains_index(i)) continue;
      if (!first) out += ",";
      first = false;
      if (!((l >> i) & 1u)) out += "!";
      out.push_back(atom_letter(i));
    }
    return out + "}";
  };
  std::string out;
  for (Letter l : w.prefix) out += letter(l) + " ";
  out += "(";
  for (std::size_t i = 0; i < w.loop.size(); ++i) {
    if (i) out += " ";
    out += letter(w.loop[i]);
  }
  return out + ")^w";
}

namespace {

using Truth = std::vector<char>;

class LassoEvaluator {
 public:
  explicit LassoEvaluator(const Lasso& w) : w_(w), n_(w.length()) {}

  Truth eval(const Formula& f) {
    Truth out(n_, 0);
    switch (f.kind()) {
      case Kind::True:
        std::fill(out.begin(), out.end(), 1);
        return out;
      case Kind::False:
        return out;
      case Kind::Atom: {
        if (!w_.atoms.contains(f.name())) {
          throw UndeclaredAtom(std::string("atom '") + f.name() + "' not declared by lasso");
        }
        const int bit = atom_index(f.name());
        for (std::size_t i = 0; i < n_; ++i) out[i] = (w_.at(i) >> bit) & 1u;
        return out;
      }
      case Kind::Not: {
        Truth c = eval(f.child());
        for (std::size_t i = 0; i < n_; ++i) out[i] = !c[i];
        return out;
      }
      case Kind::And:
      case Kind::Or: {
        Truth a = eval(f.left());
        Truth b = eval(f.right());
        const bool conj = f.kind() == Kind::And;
        for (std::size_t i = 0; i < n_; ++i) out[i] = conj ? (a[i] && b[i]) : (a[i] || b[i]);
        return out;
      }
      case Kind::Next: {
        Truth c = eval(f.child());
        for (std::size_t i = 0; i < n_; ++i) out[i] = c[succ(i)];
        return out;
      }
      case Kind::Finally: {
        Truth c = eval(f.child());
        return least(c, Truth(n_, 1));  // true U c
      }
      case Kind::Globally: {
        Truth c = eval(f.child());
        return greatest(Truth(n_, 0), c);  // false R c
      }
      case Kind::Until: {
        Truth a = eval(f.left());
        Truth b = eval(f.right());
        return least(b, a);
      }
      case Kind::Release: {
        Truth a = eval(f.left());
        Truth b = eval(f.right());
        return greatest(a, b);
      }
      case Kind::WeakUntil: {
        // a W b: greatest solution of v = b | (a & X v)
        Truth a = eval(f.left());
        Truth b = eval(f.right());
        Truth v(n_, 1);
        fix(v, [&](std::size_t i, const Truth& cur) { return b[i] || (a[i] && cur[succ(i)]); });
        return v;
      }
      case Kind::StrongRelease: {
        // a M b: least solution of v = b & (a | X v)
        Truth a = eval(f.left());
        Truth b = eval(f.right());
        Truth v(n_, 0);
        fix(v, [&](std::size_t i, const Truth& cur) { return b[i] && (a[i] || cur[succ(i)]); });
        return v;
      }
    }
    throw std::logic_error("unhandled formula kind");
  }

 private:
  std::size_t succ(std::size_t i) const { return i + 1 < n_ ? i + 1 : w_.prefix.size(); }

  // Least solution of v = goal | (stay & X v).
  Truth least(const Truth& goal, const Truth& stay) {
    Truth v(n_, 0);
    fix(v, [&](std::size_t i, const Truth& cur) { return goal[i] || (stay[i] && cur[succ(i)]); });
    return v;
  }

  // Greatest solution of v = hold & (release | X v).
  Truth greatest(const Truth& release, const Truth& hold) {
    Truth v(n_, 1);
    fix(v, [&](std::size_t i, const Truth& cur) { return hold[i] && (release[i] || cur[succ(i)]); });
    return v;
  }

  // Iterates a monotone update from the given start value until stable.
  void fix(Truth& v, const std::function<bool(std::size_t, const Truth&)>& update) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t k = n_; k-- > 0;) {
        const char nv = update(k, v) ? 1 : 0;
        if (nv != v[k]) {
          v[k] = nv;
          changed = true;
        }
      }
    }
  }

  const Lasso& w_;
  std::size_t n_;
};

}  // namespace

bool eval(const Formula& f, const Lasso& w) {
  validate(w);
  return LassoEvaluator(w).eval(f)[0] != 0;
}

}  // namespace octal::ltl
