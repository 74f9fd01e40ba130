#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "octal/dataset.hpp"

namespace octal::dataset {

std::string_view name(Profile p) { return p == Profile::ShortLike ? "short_like" : "diverse_like"; }

Profile parse_profile(std::string_view text) {
  if (text == "short_like") return Profile::ShortLike;
  if (text == "diverse_like") return Profile::DiverseLike;
  throw std::invalid_argument("unknown profile '" + std::string(text) + "'");
}

ProfileConfig profile_config(Profile p) {
  if (p == Profile::ShortLike) return {3, 25, 1, 3, 80, 95, 1711};
  return {3, 50, 2, 5, 144, 2234, 397814};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1) + 0xbf58476d1ce4e5b9ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const Sample& s) { return s.label == 1; }));
}

namespace {

enum Stream : std::uint64_t { kCorpus = 1, kRanking = 2, kPerturb = 3 };

buchi::Limits limits_for(const GenOptions& o) {
  buchi::Limits l;
  l.state_cap = o.state_cap;
  l.deadline = std::chrono::steady_clock::now() + o.timeout;
  return l;
}

struct Draw {
  ltl::Formula formula;
  std::size_t tree_size;
};

Draw draw_formula(std::mt19937_64& rng, const ProfileConfig& cfg, int atoms) {
  std::uniform_int_distribution<std::size_t> size(cfg.min_tree, cfg.max_tree);
  while (true) {
    const std::size_t n = size(rng);
    ltl::Formula f = ltl::random_formula({n, atoms, rng(), false});
    if (ltl::printed_length(f) <= cfg.max_length) return {f, n};
  }
}

int draw_atoms(std::mt19937_64& rng, const ProfileConfig& cfg) {
  return std::uniform_int_distribution<int>(cfg.min_atoms, cfg.max_atoms)(rng);
}

// Translation of a fresh draw, or nullopt when it exceeds the limits.
std::optional<buchi::Automaton> try_translate(const ltl::Formula& f, const GenOptions& o) {
  const ProfileConfig cfg = profile_config(o.profile);
  try {
    buchi::Automaton b = buchi::translate_any(f, limits_for(o));
    if (b.state_count > cfg.max_states || b.transitions.size() > cfg.max_transitions) {
      return std::nullopt;
    }
    return b;
  } catch (const buchi::ResourceLimit&) {
    return std::nullopt;
  }
}

// Oracle verdict, or nullopt for "unknown".
std::optional<bool> try_check(const buchi::Automaton& b, const ltl::Formula& f, const GenOptions& o) {
  try {
    return buchi::check(b, f, limits_for(o)).holds;
  } catch (const buchi::ResourceLimit&) {
    return std::nullopt;
  }
}

Sample make_slot(const GenOptions& o, std::size_t slot) {
  const ProfileConfig cfg = profile_config(o.profile);
  const std::uint64_t seed = derive_seed(o.seed, kCorpus, slot);
  std::mt19937_64 rng(seed);
  const bool positive = slot % 2 == 0;
  for (std::size_t attempt = 0; attempt < o.max_attempts; ++attempt) {
    const int atoms = draw_atoms(rng, cfg);
    const Draw source = draw_formula(rng, cfg, atoms);
    const auto b = try_translate(source.formula, o);
    if (!b) continue;
    Sample s;
    s.automaton = *b;
    s.seed = seed;
    s.source = ltl::to_string(source.formula);
    s.atom_count = atoms;
    if (positive) {
      if (try_check(*b, source.formula, o) != std::optional<bool>(true)) continue;
      s.formula = source.formula;
      s.tree_size = source.tree_size;
      s.label = 1;
      return s;
    }
    const Draw other = draw_formula(rng, cfg, atoms);
    if (try_check(*b, other.formula, o) != std::optional<bool>(false)) continue;
    s.formula = other.formula;
    s.tree_size = other.tree_size;
    s.label = 0;
    return s;
  }
  throw BudgetExhausted("no sample for slot " + std::to_string(slot) + " within " +
                        std::to_string(o.max_attempts) + " attempts");
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first error.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

Dataset generate_corpus(const GenOptions& options) {
  if (options.count % 2 != 0) throw std::invalid_argument("count must be even");
  Dataset ds;
  ds.profile = options.profile;
  ds.seed = options.seed;
  ds.samples.resize(options.count);
  parallel_for(options.count, options.threads,
               [&](std::size_t i) { ds.samples[i] = make_slot(options, i); });
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("ratio must lie in [0, 1]");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) (ds.samples[i].label ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> train, val;
  for (const auto* cls : {&pos, &neg}) {
    const auto cut = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(cls->size())));
    train.insert(train.end(), cls->begin(), cls->begin() + cut);
    val.insert(val.end(), cls->begin() + cut, cls->end());
  }
  std::shuffle(train.begin(), train.end(), rng);
  std::shuffle(val.begin(), val.end(), rng);
  std::pair<Dataset, Dataset> out;
  out.first.profile = out.second.profile = ds.profile;
  out.first.seed = out.second.seed = ds.seed;
  for (auto i : train) out.first.samples.push_back(ds.samples[i]);
  for (auto i : val) out.second.samples.push_back(ds.samples[i]);
  return out;
}

// Draws per negative before a group gives up on its automaton.
constexpr std::size_t kNegativeTries = 20;

std::vector<RankingGroup> build_ranking_groups(const GenOptions& options, std::size_t negatives) {
  const ProfileConfig cfg = profile_config(options.profile);
  std::vector<RankingGroup> groups(options.count);
  parallel_for(options.count, options.threads, [&](std::size_t g) {
    const std::uint64_t seed = derive_seed(options.seed, kRanking, g);
    std::mt19937_64 rng(seed);
    for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
      const int atoms = draw_atoms(rng, cfg);
      const Draw source = draw_formula(rng, cfg, atoms);
      const auto b = try_translate(source.formula, options);
      if (!b || try_check(*b, source.formula, options) != std::optional<bool>(true)) continue;
      // An empty language satisfies every formula, so no negative exists.
      if (!buchi::find_accepting_lasso(*b)) continue;
      RankingGroup group{*b, source.formula, {}, seed};
      std::size_t tries = 0;
      while (group.negatives.size() < negatives && tries++ < kNegativeTries * negatives) {
        const Draw other = draw_formula(rng, cfg, atoms);
        if (try_check(*b, other.formula, options) == std::optional<bool>(false)) {
          group.negatives.push_back(other.formula);
        }
      }
      if (group.negatives.size() < negatives) continue;
      groups[g] = std::move(group);
      return;
    }
    throw BudgetExhausted("no ranking group " + std::to_string(g) + " within budget");
  });
  return groups;
}

buchi::Automaton surviving_automaton(const graph::UnionGraph& perturbed) {
  std::vector<std::size_t> degree(perturbed.nodes.size(), 0);
  for (const auto& e : perturbed.edges) {
    if (e.kind == graph::EdgeKind::Incidence) ++degree[e.v];
  }
  graph::UnionGraph kept;
  for (std::size_t i = 0; i < perturbed.nodes.size(); ++i) {
    const auto& n = perturbed.nodes[i];
    if (n.kind == graph::NodeKind::State) kept.nodes.push_back(n);
    if (n.kind == graph::NodeKind::Transition && degree[i] == (n.src == n.dst ? 1u : 2u)) {
      kept.nodes.push_back(n);
    }
  }
  return graph::system_automaton(kept);
}

std::vector<graph::Sample> build_perturbation_set(const Dataset& positives, double p,
                                                  std::uint64_t seed,
                                                  const graph::EncodeOptions& encode) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("drop fraction must lie in (0, 1]");
  std::vector<graph::Sample> out;
  out.reserve(2 * positives.samples.size());
  for (std::size_t i = 0; i < positives.samples.size(); ++i) {
    const Sample& s = positives.samples[i];
    if (s.label != 1) throw std::invalid_argument("perturbation input must be positive pairs");
    graph::Sample original = graph::encode_pair(s.automaton, s.formula, 1, encode, s.seed);
    graph::Sample perturbed = original;
    perturbed.graph = graph::perturb_edges(original.graph, p, derive_seed(seed, kPerturb, i));
    perturbed.features = graph::encode_features(perturbed.graph, encode.scheme, encode.directed, encode.dict);
    perturbed.label = 0;
    out.push_back(std::move(original));
    out.push_back(std::move(perturbed));
  }
  return out;
}

}  // namespace octal::dataset
