#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "octal/dataset.hpp"

using namespace octal;
using namespace octal::dataset;

namespace {

GenOptions options(Profile p, std::size_t count, std::uint64_t seed) {
  GenOptions o;
  o.profile = p;
  o.count = count;
  o.seed = seed;
  o.timeout = std::chrono::milliseconds(5000);
  return o;
}

const Dataset& corpus() {
  static const Dataset ds = generate_corpus(options(Profile::ShortLike, 60, 3));
  return ds;
}

std::size_t total(const Histogram& h) { return std::accumulate(h.bins.begin(), h.bins.end(), std::size_t{0}); }

bool holds(const buchi::Automaton& b, const ltl::Formula& f) { return buchi::check(b, f).holds; }

}  // namespace

TEST_CASE("profile names") {
  CHECK(parse_profile("short_like") == Profile::ShortLike);
  CHECK(name(Profile::DiverseLike) == "diverse_like");
  CHECK_THROWS_AS(parse_profile("short"), std::invalid_argument);
  CHECK(profile_config(Profile::ShortLike).max_length == 80);
  CHECK(profile_config(Profile::DiverseLike).max_length == 144);
}

TEST_CASE("derived seeds differ across streams and indices") {
  CHECK(derive_seed(1, 1, 0) != derive_seed(1, 1, 1));
  CHECK(derive_seed(1, 1, 0) != derive_seed(1, 2, 0));
  CHECK(derive_seed(1, 1, 0) != derive_seed(2, 1, 0));
  CHECK(derive_seed(1, 1, 0) == derive_seed(1, 1, 0));
}

TEST_CASE("count 2 gives one positive and one negative") {
  const Dataset ds = generate_corpus(options(Profile::ShortLike, 2, 9));
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.samples[0].label == 1);
  CHECK(ds.samples[1].label == 0);
  CHECK_THROWS_AS(generate_corpus(options(Profile::ShortLike, 3, 9)), std::invalid_argument);
}

TEST_CASE("corpus labels agree with the oracle") {
  const Dataset& ds = corpus();
  CHECK(ds.positives() == 30);
  CHECK(ds.negatives() == 30);
  const ProfileConfig cfg = profile_config(Profile::ShortLike);
  for (const Sample& s : ds.samples) {
    CAPTURE(ltl::to_string(s.formula));
    CHECK(holds(s.automaton, s.formula) == (s.label == 1));
    const std::size_t len = ltl::printed_length(s.formula);
    CHECK(len >= 1);
    CHECK(len <= 80);
    CHECK(s.automaton.state_count <= cfg.max_states);
    CHECK(s.automaton.transitions.size() <= cfg.max_transitions);
    CHECK(s.formula.atoms().size() <= static_cast<std::size_t>(s.atom_count));
    if (s.label == 1) CHECK(ltl::to_string(s.formula) == s.source);
  }
}

TEST_CASE("generation is deterministic and independent of the thread count") {
  GenOptions o = options(Profile::ShortLike, 20, 3);
  const Dataset a = generate_corpus(o);
  o.threads = 3;
  const Dataset b = generate_corpus(o);
  REQUIRE(a.samples.size() == b.samples.size());
  const auto dict = graph::Dictionary::make(1);
  const graph::EncodeOptions eo{graph::Scheme::Gaussian, false, &dict};
  const auto ea = encode(a, eo), eb = encode(b, eo);
  for (std::size_t i = 0; i < ea.size(); ++i) CHECK(graph::write_sample(ea[i]) == graph::write_sample(eb[i]));
  // A prefix of a larger corpus is the smaller corpus.
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(ltl::to_string(a.samples[i].formula) == ltl::to_string(corpus().samples[i].formula));
  }
}

TEST_CASE("diverse_like draws respect their envelope") {
  const Dataset ds = generate_corpus(options(Profile::DiverseLike, 6, 4));
  const ProfileConfig cfg = profile_config(Profile::DiverseLike);
  for (const Sample& s : ds.samples) {
    CHECK(ltl::printed_length(s.formula) <= cfg.max_length);
    CHECK(s.atom_count >= 2);
    CHECK(holds(s.automaton, s.formula) == (s.label == 1));
  }
}

TEST_CASE("exhausted budget is reported") {
  GenOptions o = options(Profile::ShortLike, 2, 5);
  o.max_attempts = 0;
  CHECK_THROWS_AS(generate_corpus(o), BudgetExhausted);
}

TEST_CASE("split keeps balance and is deterministic") {
  Dataset ds;
  for (int i = 0; i < 100; ++i) {
    Sample s;
    s.label = i % 2;
    s.seed = static_cast<std::uint64_t>(i);
    ds.samples.push_back(s);
  }
  const auto [train, val] = split(ds, 0.8, 7);
  CHECK(train.samples.size() == 80);
  CHECK(val.samples.size() == 20);
  CHECK(train.positives() == 40);
  CHECK(val.positives() == 10);
  std::vector<int> seen(100, 0);
  for (const auto* part : {&train, &val}) {
    for (const auto& s : part->samples) ++seen[s.seed];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));

  const auto again = split(ds, 0.8, 7);
  const auto other = split(ds, 0.8, 8);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < 80; ++i) {
    same = same && again.first.samples[i].seed == train.samples[i].seed;
    differs = differs || other.first.samples[i].seed != train.samples[i].seed;
  }
  CHECK(same);
  CHECK(differs);
  CHECK_THROWS_AS(split(ds, 1.5, 0), std::invalid_argument);

  const auto odd = split(corpus(), 0.8, 1);
  CHECK(odd.first.samples.size() + odd.second.samples.size() == 60);
  CHECK(std::abs(static_cast<long>(odd.second.positives()) - static_cast<long>(odd.second.negatives())) <= 1);
}

TEST_CASE("ranking groups hold one verified positive and 50 verified negatives") {
  const auto groups = build_ranking_groups(options(Profile::ShortLike, 3, 11));
  REQUIRE(groups.size() == 3);
  for (const RankingGroup& g : groups) {
    CHECK(1 + g.negatives.size() == 51);
    CHECK(holds(g.automaton, g.positive));
    for (const auto& n : g.negatives) CHECK_FALSE(holds(g.automaton, n));
  }
  const auto again = build_ranking_groups(options(Profile::ShortLike, 3, 11));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ltl::to_string(again[i].positive) == ltl::to_string(groups[i].positive));
    CHECK(ltl::to_string(again[i].negatives.back()) == ltl::to_string(groups[i].negatives.back()));
  }
}

TEST_CASE("perturbation set pairs originals with edge-dropped copies") {
  Dataset positives;
  for (const Sample& s : corpus().samples) {
    if (s.label == 1) positives.samples.push_back(s);
  }
  const auto dict = graph::Dictionary::make(2);
  const graph::EncodeOptions eo{graph::Scheme::Gaussian, false, &dict};
  const auto set = build_perturbation_set(positives, 0.3, 5, eo);
  REQUIRE(set.size() == 2 * positives.samples.size());
  for (std::size_t i = 0; i < positives.samples.size(); ++i) {
    const graph::Sample& original = set[2 * i];
    const graph::Sample& perturbed = set[2 * i + 1];
    CHECK(original.label == 1);
    CHECK(perturbed.label == 0);
    CHECK(perturbed.features.data == original.features.data);
    const std::size_t m = original.graph.count(graph::EdgeKind::Incidence);
    const auto dropped = static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(m) - 1e-9));
    CHECK(perturbed.graph.count(graph::EdgeKind::Incidence) == m - dropped);
    CHECK(graph::check_invariants(perturbed.graph, true).empty());

    // Deleting transitions shrinks the language, so the surviving automaton
    // still satisfies the formula even though the label says 0.
    const buchi::Automaton survivor = surviving_automaton(perturbed.graph);
    const buchi::Automaton& b = positives.samples[i].automaton;
    CHECK(survivor.state_count == b.state_count);
    CHECK(survivor.transitions.size() <= b.transitions.size());
    if (dropped > 0) CHECK(survivor.transitions.size() < b.transitions.size());
    CHECK(holds(survivor, positives.samples[i].formula));
  }
  CHECK_THROWS_AS(build_perturbation_set(positives, 0.0, 5, eo), std::invalid_argument);
  CHECK_THROWS_AS(build_perturbation_set(corpus(), 0.3, 5, eo), std::invalid_argument);
}

TEST_CASE("corpus statistics") {
  const CorpusStats empty = corpus_stats(Dataset{});
  CHECK(empty.samples == 0);
  CHECK(empty.positives == 0);
  CHECK(empty.length.bins.empty());
  CHECK(total(empty.states) == 0);

  const CorpusStats st = corpus_stats(corpus());
  CHECK(st.samples == 60);
  CHECK(st.positives == 30);
  for (const Histogram* h : {&st.length, &st.states, &st.transitions}) {
    CHECK(total(*h) == 60);
    CHECK(h->bins.size() <= 10);
    CHECK(h->min <= h->max);
    CHECK(h->mean >= static_cast<double>(h->min));
    CHECK(h->mean <= static_cast<double>(h->max));
    CHECK(h->min + h->bins.size() * h->bin_width > h->max);
  }
  CHECK(st.length.max <= 80);
  CHECK(st.states.max <= 95);
  CHECK(st.transitions.max <= 1711);
  CHECK(to_json(st).find("\"samples\":60") != std::string::npos);
  CHECK_THROWS_AS(corpus_stats(corpus(), 0), std::invalid_argument);
}

TEST_CASE("jsonl round trip rebuilds samples") {
  const auto dict = graph::Dictionary::make(3);
  const graph::EncodeOptions eo{graph::Scheme::OneHot, true, &dict};
  const auto encoded = encode(corpus(), eo);
  const auto path = (std::filesystem::temp_directory_path() / "octal_test_dataset.jsonl").string();
  write_jsonl(path, encoded);
  const auto back = read_jsonl(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == encoded.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(graph::write_sample(back[i]) == graph::write_sample(encoded[i]));
    const Sample s = decode(back[i]);
    const Sample& orig = corpus().samples[i];
    CHECK(s.label == orig.label);
    CHECK(s.seed == orig.seed);
    CHECK(ltl::to_string(s.formula) == ltl::to_string(orig.formula));
    CHECK(s.automaton.state_count == orig.automaton.state_count);
    CHECK(s.automaton.transitions.size() == orig.automaton.transitions.size());
    CHECK(holds(s.automaton, s.formula) == (s.label == 1));
  }
  CHECK_THROWS(read_jsonl("/nonexistent/octal.jsonl"));
}
