#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "octal/dataset.hpp"
#include "octal/graph.hpp"
#include "octal/nn.hpp"

namespace octal::workflow {

/// Feature settings shared by every step that turns pairs into model input.
struct Encoding {
  graph::Scheme scheme = graph::Scheme::Gaussian;
  bool directed = false;
  std::uint64_t dictionary_seed = 0;
  double sigma = 0.05;

  std::size_t width() const { return directed ? graph::kDirectedWidth : graph::kWidth; }
};

/// Owns the dictionary an Encoding describes.
class Encoder {
 public:
  explicit Encoder(const Encoding& e);
  Encoder(const Encoder& other) : Encoder(other.encoding_) {}
  Encoder& operator=(const Encoder&) = delete;

  const Encoding& encoding() const { return encoding_; }
  const graph::EncodeOptions& options() const { return options_; }

  graph::Sample sample(const buchi::Automaton& b, const ltl::Formula& f, int label,
                       std::uint64_t seed = 0) const;
  nn::GraphInput input(const buchi::Automaton& b, const ltl::Formula& f, int label) const;
  std::vector<nn::GraphInput> inputs(const dataset::Dataset& ds) const;

 private:
  Encoding encoding_;
  graph::Dictionary dict_;
  graph::EncodeOptions options_;
};

Encoding encoding_of(const nn::Checkpoint& c);
void set_encoding(nn::Checkpoint& c, const Encoding& e);
std::string_view name(graph::Scheme s);
graph::Scheme parse_scheme(std::string_view text);

std::vector<nn::GraphInput> inputs(const std::vector<graph::Sample>& samples);
std::vector<int> labels(const std::vector<nn::GraphInput>& inputs);

/// Model scores for each group: the positive first, then its negatives.
std::vector<std::vector<double>> ranking_scores(const nn::Model& model,
                                                const std::vector<dataset::RankingGroup>& groups,
                                                const Encoder& encoder);

struct BenchSample {
  double oracle_seconds = 0.0;      // check(B, phi); the timeout when unknown
  double preprocess_seconds = 0.0;  // union graph and features
  double inference_seconds = 0.0;   // forward pass alone
  std::string verdict;              // "holds", "fails" or "unknown"
  std::size_t nodes = 0;
};

struct BenchReport {
  std::vector<BenchSample> samples;
  double oracle_seconds = 0.0;
  double preprocess_seconds = 0.0;
  double inference_seconds = 0.0;
  std::size_t unknown = 0;

  /// oracle / inference; 0 when there is nothing to compare.
  double inference_speedup() const;
  /// oracle / (inference + preprocessing); 0 when there is nothing to compare.
  double overall_speedup() const;
};

struct BenchOptions {
  std::size_t state_cap = 200'000;
  std::chrono::milliseconds timeout{120'000};
};

/// Times the oracle and the model on every sample, one sample at a time.
BenchReport bench(const dataset::Dataset& ds, const nn::Model& model, const Encoder& encoder,
                  const BenchOptions& options);

std::string to_json(const BenchReport& r);
std::string to_json(const nn::Metrics& m);
std::string to_json(const nn::RankingMetrics& m);

}  // namespace octal::workflow
