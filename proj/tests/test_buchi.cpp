#include <doctest.h>

#include <random>

#include "octal/buchi.hpp"
#include "support/lasso_oracle.hpp"

using namespace octal;
using namespace octal::buchi;
using octal::ltl::Formula;
using octal::ltl::Lasso;

namespace {

const Formula a = Formula::atom('a');
const Formula b = Formula::atom('b');

// q0 loops on a & !b, moves to qf on b; qf loops on true. Accepts a U b.
const char* kUntilText =
    "states 2\n"
    "initial 0\n"
    "accepting 1\n"
    "0 -> 0 : a & !b\n"
    "0 -> 1 : b\n"
    "1 -> 1 : 1\n";

Automaton until_automaton() { return read_automaton(kUntilText); }

bool language_empty(const Automaton& x) { return !find_accepting_lasso(x).has_value(); }

// Exhaustive agreement of accepts(translate(f)) with eval(f) on all small lassos.
void require_translation_agrees(const Formula& f, const oracle::LassoSweep& sweep) {
  const Automaton t = translate_any(f);
  t.validate();
  const auto bad = sweep.find(t, f, [](bool accepted, bool holds) { return accepted != holds; });
  if (bad) FAIL("translation of " << ltl::to_string(f) << " disagrees on " << ltl::to_string(*bad));
}

Lasso random_lasso(std::mt19937_64& rng, AtomSet atoms, std::size_t max_prefix, std::size_t max_loop) {
  const auto sigma = oracle::letters_over(atoms);
  Lasso w{atoms, {}, {}};
  for (std::size_t j = 0, p = rng() % (max_prefix + 1); j < p; ++j) w.prefix.push_back(sigma[rng() % sigma.size()]);
  for (std::size_t j = 0, l = 1 + rng() % max_loop; j < l; ++j) w.loop.push_back(sigma[rng() % sigma.size()]);
  return w;
}

}  // namespace

TEST_CASE("cubes") {
  CHECK(to_string(Cube()) == "1");
  CHECK(to_string(parse_cube("!c & a")) == "a & !c");
  CHECK(parse_cube(" a&!c ") == Cube(1u, 4u));
  CHECK_THROWS_AS(Cube(1u, 1u), std::invalid_argument);
  CHECK_THROWS(parse_cube("a & !a"));
  CHECK_FALSE(parse_cube("a").join(parse_cube("!a")).has_value());
  CHECK(*parse_cube("a").join(parse_cube("!b")) == parse_cube("a & !b"));
  CHECK(parse_cube("a & b").implies(parse_cube("a")));
  CHECK_FALSE(parse_cube("a").implies(parse_cube("a & b")));
  CHECK(parse_cube("a & !c").witness() == 1u);
}

TEST_CASE("automaton text format") {
  SUBCASE("round trip on the two-state a U b automaton") {
    const Automaton x = until_automaton();
    CHECK(x.state_count == 2);
    CHECK(x.accepting == std::vector<StateId>{1});
    CHECK(x.transitions.size() == 3);
    CHECK(write_automaton(x) == kUntilText);
    CHECK(read_automaton(write_automaton(x)) == x);
  }
  SUBCASE("minimal file is the universal automaton") {
    CHECK(read_automaton("states 1\ninitial 0\naccepting 0\n0 -> 0 : 1\n") == universal());
  }
  SUBCASE("comments and blank lines are skipped") {
    const Automaton x = read_automaton("# sys\nstates 1\ninitial 0\naccepting\n\n0 -> 0 : a # loop\n");
    CHECK(x.accepting.empty());
    CHECK(x.atoms == AtomSet::of('a'));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(read_automaton("states 1\ninitial 0\naccepting 0\n0 -> 0 : a & !a\n"), FormatError);
    CHECK_THROWS_AS(read_automaton("states 1\ninitial 0\naccepting 0\n0 -> 3 : 1\n"), FormatError);
    CHECK_THROWS_AS(read_automaton("states 1\ninitial 2\naccepting\n"), FormatError);
    CHECK_THROWS_AS(read_automaton("initial 0\nstates 1\naccepting\n"), FormatError);
    CHECK_THROWS_AS(read_automaton("states x\ninitial 0\naccepting\n"), FormatError);
    CHECK_THROWS_AS(read_automaton("states 1\ninitial 0\naccepting 4\n"), FormatError);
    CHECK_THROWS_AS(read_automaton("states 1\ninitial 0\naccepting 0\n0 - 0 : 1\n"), FormatError);
  }
  SUBCASE("round trip on random automata") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
      Automaton x = oracle::random_automaton(rng, AtomSet::first(3), 1 + rng() % 5, rng() % 10);
      const Automaton y = read_automaton(write_automaton(x));
      CHECK(write_automaton(read_automaton(write_automaton(y))) == write_automaton(y));
      CHECK(automaton_hash(x) == automaton_hash(y));
      CHECK(automaton_hash(x).size() == 16);
    }
  }
}

TEST_CASE("translate examples") {
  const Automaton t = translate(Formula::constant(true));
  CHECK(t.state_count == 1);
  CHECK(t.accepting == std::vector<StateId>{0});
  REQUIRE(t.transitions.size() == 1);
  CHECK(t.transitions[0].label.is_true());
  CHECK(language_empty(translate(Formula::constant(false))));
  CHECK_THROWS_AS(translate(ltl::G(a)), std::invalid_argument);

  // a U b is language-equivalent to the hand-written automaton.
  const Automaton mine = translate_any(ltl::U(a, b));
  CHECK(language_empty(product(mine, translate_any(ltl::negate(ltl::U(a, b))))));
  CHECK(check(until_automaton(), ltl::U(a, b)).holds);
  CHECK(check(mine, ltl::U(a, b)).holds);
}

TEST_CASE("translation agrees with lasso semantics") {
  SUBCASE("two atoms, size up to 7, lassos up to 4+4") {
    const oracle::LassoSweep sweep(AtomSet::first(2), 4, 4);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      require_translation_agrees(ltl::random_formula({1 + seed % 7, 2, seed, true}), sweep);
    }
  }
  SUBCASE("three atoms, size up to 7, lassos up to 3+3") {
    const oracle::LassoSweep sweep(AtomSet::first(3), 3, 3);
    for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
      require_translation_agrees(ltl::random_formula({1 + seed % 7, 3, seed, false}), sweep);
    }
  }
  SUBCASE("hand-picked formulas") {
    const oracle::LassoSweep sweep(AtomSet::first(2), 3, 3);
    for (const char* text : {"GFa", "FGa", "G(a -> F b)", "a U b U a", "X X a R b", "a W b", "a M b",
                             "GF a & GF b", "!(a U b)", "F(a & X(!a U b))", "G a | G b"}) {
      require_translation_agrees(ltl::parse(text), sweep);
    }
  }
}

TEST_CASE("product") {
  SUBCASE("a U b against its negation is empty") {
    const Automaton neg = translate_any(ltl::negate(ltl::U(a, b)));
    CHECK(language_empty(product(until_automaton(), neg)));
  }
  SUBCASE("universal automaton is an identity") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 30; ++i) {
      const Automaton x = oracle::random_automaton(rng, AtomSet::first(2), 1 + rng() % 4, rng() % 8);
      const Automaton p = product(x, universal(AtomSet::first(2)));
      for (int k = 0; k < 50; ++k) {
        const Lasso w = random_lasso(rng, AtomSet::first(2), 3, 3);
        REQUIRE(accepts(p, w) == accepts(x, w));
      }
    }
  }
  SUBCASE("language is the intersection on random instances") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
      const Automaton x = oracle::random_automaton(rng, AtomSet::first(2), 1 + rng() % 4, rng() % 9);
      const Automaton y = oracle::random_automaton(rng, AtomSet::first(2), 1 + rng() % 4, rng() % 9);
      const Automaton p = product(x, y);
      p.validate();
      oracle::for_each_lasso(AtomSet::first(2), 2, 2, [&](const Lasso& w) {
        REQUIRE(accepts(p, w) == (accepts(x, w) && accepts(y, w)));
      });
    }
  }
  SUBCASE("state cap") {
    Limits tiny;
    tiny.state_cap = 2;
    const Automaton big = translate_any(ltl::parse("GF a & GF b & GF c"));
    CHECK_THROWS_AS(product(big, big, tiny), ResourceLimit);
  }
}

TEST_CASE("emptiness") {
  SUBCASE("universal automaton yields a one-letter loop") {
    const auto w = find_accepting_lasso(universal());
    REQUIRE(w.has_value());
    CHECK(w->prefix.empty());
    CHECK(w->loop.size() == 1);
  }
  SUBCASE("empty-language automaton") { CHECK(language_empty(empty_language())); }
  SUBCASE("accepting state without a cycle") {
    CHECK(language_empty(read_automaton("states 2\ninitial 0\naccepting 1\n0 -> 1 : a\n")));
  }
  SUBCASE("witnesses are accepted; absence matches an independent search") {
    std::mt19937_64 rng(4);
    const oracle::LassoSweep sweep(AtomSet::first(2), 3, 3);
    for (int i = 0; i < 200; ++i) {
      const Automaton x = oracle::random_automaton(rng, AtomSet::first(2), 1 + rng() % 4, rng() % 8);
      const auto w = find_accepting_lasso(x);
      if (w) {
        REQUIRE(accepts(x, *w));
      } else {
        // Empty language: no small lasso is accepted either.
        REQUIRE_FALSE(sweep.find(x, Formula::constant(true), [](bool acc, bool) { return acc; }));
      }
    }
  }
}

TEST_CASE("accepts") {
  const AtomSet ab = AtomSet::first(2);
  CHECK(accepts(until_automaton(), Lasso{ab, {1}, {2}}));
  CHECK_FALSE(accepts(until_automaton(), Lasso{ab, {}, {1}}));
  CHECK_FALSE(accepts(empty_language(ab), Lasso{ab, {1}, {2}}));
  CHECK(accepts(universal(ab), Lasso{ab, {1}, {2}}));
  CHECK_THROWS_AS(accepts(until_automaton(), Lasso{AtomSet::first(1), {}, {1}}), ltl::UndeclaredAtom);
}

TEST_CASE("check") {
  SUBCASE("a U b system satisfies a U b") {
    const Verdict v = check(until_automaton(), ltl::U(a, b));
    CHECK(v.holds);
    CHECK_FALSE(v.counterexample.has_value());
  }
  SUBCASE("anything satisfies true") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
      const Automaton x = oracle::random_automaton(rng, AtomSet::first(3), 1 + rng() % 5, rng() % 10);
      CHECK(check(x, Formula::constant(true)).holds);
    }
  }
  SUBCASE("a U b does not satisfy G a") {
    const Automaton sys = translate_any(ltl::U(a, b));
    const Verdict v = check(sys, ltl::G(a));
    REQUIRE_FALSE(v.holds);
    REQUIRE(v.counterexample.has_value());
    CHECK(accepts(sys, *v.counterexample));
    CHECK_FALSE(ltl::eval(ltl::G(a), *v.counterexample));
    CHECK(v.explored_states > 0);
  }
  SUBCASE("verdicts are sound and complete up to bounded refutation") {
    std::mt19937_64 rng(7);
    const oracle::LassoSweep sweep(AtomSet::first(2), 3, 3);
    for (int i = 0; i < 120; ++i) {
      const Automaton sys = oracle::random_automaton(rng, AtomSet::first(2), 1 + rng() % 4, rng() % 8);
      const Formula spec = ltl::random_formula({1 + rng() % 8, 2, rng(), false});
      const Verdict v = check(sys, spec);
      REQUIRE(v.counterexample.has_value() == !v.holds);
      if (!v.holds) {
        REQUIRE(accepts(sys, *v.counterexample));
        REQUIRE_FALSE(ltl::eval(spec, *v.counterexample));
      } else {
        REQUIRE_FALSE(sweep.find(sys, spec, [](bool acc, bool holds) { return acc && !holds; }));
      }
    }
  }
  SUBCASE("deterministic") {
    const Automaton sys = translate_any(ltl::parse("F a"));
    const Verdict x = check(sys, ltl::parse("G !a"));
    const Verdict y = check(sys, ltl::parse("G !a"));
    CHECK(x.holds == y.holds);
    CHECK(x.counterexample == y.counterexample);
    CHECK(write_automaton(translate_any(ltl::parse("a U b R c"))) ==
          write_automaton(translate_any(ltl::parse("a U b R c"))));
  }
  SUBCASE("deadline in the past is a resource limit") {
    Limits l;
    l.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    CHECK_THROWS_AS(check(translate_any(ltl::parse("GF a & GF b")), ltl::parse("G a"), l), ResourceLimit);
  }
}

TEST_CASE("lasso sweep detects wrong automata") {
  const oracle::LassoSweep sweep(AtomSet::first(2), 2, 2);
  const auto mismatch = [](bool accepted, bool holds) { return accepted != holds; };
  CHECK(sweep.find(universal(AtomSet::first(2)), a, mismatch).has_value());
  CHECK(sweep.find(translate_any(ltl::F(a)), ltl::G(ltl::F(a)), mismatch).has_value());
  CHECK_FALSE(sweep.find(until_automaton(), ltl::U(a, b), mismatch).has_value());
}
