#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "octal/buchi.hpp"
#include "octal/graph.hpp"
#include "octal/ltl.hpp"

namespace octal::dataset {

enum class Profile : std::uint8_t { ShortLike, DiverseLike };

std::string_view name(Profile p);
/// Accepts "short_like" and "diverse_like".
Profile parse_profile(std::string_view text);

struct ProfileConfig {
  std::size_t min_tree = 3;
  std::size_t max_tree = 25;
  int min_atoms = 1;
  int max_atoms = 3;
  std::size_t max_length = 80;  // printed characters, whitespace excluded
  std::size_t max_states = 95;
  std::size_t max_transitions = 1711;
};

ProfileConfig profile_config(Profile p);

/// Mixes a base seed with a stream tag and an index into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct Sample {
  buchi::Automaton automaton;
  ltl::Formula formula = ltl::Formula::constant(true);
  int label = 0;
  std::uint64_t seed = 0;        // per-sample seed
  std::string source;            // formula the automaton was translated from
  std::size_t tree_size = 0;     // requested size of the checked formula
  int atom_count = 0;
};

struct Dataset {
  Profile profile = Profile::ShortLike;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t positives() const;
  std::size_t negatives() const { return samples.size() - positives(); }
};

/// Raised when the per-sample attempt budget runs out.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenOptions {
  Profile profile = Profile::ShortLike;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  /// Bounds for every translation and check. Draws that exceed them are
  /// discarded.
  std::size_t state_cap = 200'000;
  std::chrono::milliseconds timeout{120'000};
  std::size_t max_attempts = 1000;  // per sample
  unsigned threads = 1;
};

/// Even slots are positives (translate(f), f); odd slots pair translate(f)
/// with an independent f' that the oracle rejects. Each slot draws from its
/// own seed, so the result does not depend on the thread count.
Dataset generate_corpus(const GenOptions& options);

/// Shuffled split with both classes cut at the same ratio.
std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio, std::uint64_t seed);

struct RankingGroup {
  buchi::Automaton automaton;
  ltl::Formula positive = ltl::Formula::constant(true);
  std::vector<ltl::Formula> negatives;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kRankingNegatives = 50;

/// `count` groups of one generating formula and 50 oracle-rejected formulas.
std::vector<RankingGroup> build_ranking_groups(const GenOptions& options,
                                               std::size_t negatives = kRankingNegatives);

/// Automaton left after removing every transition that lost an incidence
/// edge in a perturbed system graph.
buchi::Automaton surviving_automaton(const graph::UnionGraph& perturbed);

/// For each positive, its encoded sample (label 1) followed by a copy whose
/// system graph lost ceil(p * |incidence|) edges (label 0).
std::vector<graph::Sample> build_perturbation_set(const Dataset& positives, double p,
                                                  std::uint64_t seed,
                                                  const graph::EncodeOptions& encode);

struct Histogram {
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;
  std::size_t bin_width = 1;
  std::vector<std::size_t> bins;  // bins[i] counts values in [min + i*w, min + (i+1)*w)
};

struct CorpusStats {
  std::size_t samples = 0;
  std::size_t positives = 0;
  Histogram length;  // printed formula length
  Histogram states;
  Histogram transitions;
};

/// Histograms use at most `max_bins` equal-width integer bins.
CorpusStats corpus_stats(const Dataset& ds, std::size_t max_bins = 10);
std::string to_json(const CorpusStats& stats);

/// Encodes every sample; meta carries the sample seed, formula and hash.
std::vector<graph::Sample> encode(const Dataset& ds, const graph::EncodeOptions& options);

/// Rebuilds a dataset sample from an encoded record.
Sample decode(const graph::Sample& s);

/// JSON lines, one record per sample.
void write_jsonl(const std::string& path, const std::vector<graph::Sample>& samples);
std::vector<graph::Sample> read_jsonl(const std::string& path);

}  // namespace octal::dataset
