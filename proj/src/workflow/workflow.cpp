#include "octal/workflow.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace octal::workflow {

using clk = std::chrono::steady_clock;
using nlohmann::ordered_json;

namespace {

double seconds_since(clk::time_point t) { return std::chrono::duration<double>(clk::now() - t).count(); }

}  // namespace

Encoder::Encoder(const Encoding& e)
    : encoding_(e), dict_(graph::Dictionary::make(e.dictionary_seed, e.sigma)), options_{e.scheme, e.directed, &dict_} {}

graph::Sample Encoder::sample(const buchi::Automaton& b, const ltl::Formula& f, int label, std::uint64_t seed) const {
  return graph::encode_pair(b, f, label, options_, seed);
}

nn::GraphInput Encoder::input(const buchi::Automaton& b, const ltl::Formula& f, int label) const {
  return nn::to_input(sample(b, f, label));
}

std::vector<nn::GraphInput> Encoder::inputs(const dataset::Dataset& ds) const {
  std::vector<nn::GraphInput> out;
  out.reserve(ds.samples.size());
  for (const auto& s : ds.samples) out.push_back(input(s.automaton, s.formula, s.label));
  return out;
}

std::string_view name(graph::Scheme s) { return s == graph::Scheme::Gaussian ? "gaussian" : "one_hot"; }

graph::Scheme parse_scheme(std::string_view text) {
  if (text == "gaussian") return graph::Scheme::Gaussian;
  if (text == "one_hot") return graph::Scheme::OneHot;
  throw std::invalid_argument("unknown scheme '" + std::string(text) + "'");
}

Encoding encoding_of(const nn::Checkpoint& c) {
  return {parse_scheme(c.scheme), c.directed, c.dictionary_seed, c.dictionary_sigma};
}

void set_encoding(nn::Checkpoint& c, const Encoding& e) {
  c.scheme = std::string(name(e.scheme));
  c.directed = e.directed;
  c.dictionary_seed = e.dictionary_seed;
  c.dictionary_sigma = e.sigma;
}

std::vector<nn::GraphInput> inputs(const std::vector<graph::Sample>& samples) {
  std::vector<nn::GraphInput> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(nn::to_input(s));
  return out;
}

std::vector<int> labels(const std::vector<nn::GraphInput>& inputs) {
  std::vector<int> out;
  out.reserve(inputs.size());
  for (const auto& g : inputs) out.push_back(g.label);
  return out;
}

std::vector<std::vector<double>> ranking_scores(const nn::Model& model,
                                                const std::vector<dataset::RankingGroup>& groups,
                                                const Encoder& encoder) {
  std::vector<std::vector<double>> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    std::vector<nn::GraphInput> candidates;
    candidates.push_back(encoder.input(g.automaton, g.positive, 1));
    for (const auto& f : g.negatives) candidates.push_back(encoder.input(g.automaton, f, 0));
    // Logits rank like probabilities but do not saturate into ties.
    out.push_back(nn::predict_logits(model, candidates));
  }
  return out;
}

double BenchReport::inference_speedup() const {
  return inference_seconds > 0.0 ? oracle_seconds / inference_seconds : 0.0;
}

double BenchReport::overall_speedup() const {
  const double nn = inference_seconds + preprocess_seconds;
  return nn > 0.0 ? oracle_seconds / nn : 0.0;
}

BenchReport bench(const dataset::Dataset& ds, const nn::Model& model, const Encoder& encoder,
                  const BenchOptions& options) {
  BenchReport r;
  for (const auto& s : ds.samples) {
    BenchSample b;
    auto t = clk::now();
    try {
      buchi::Limits limits;
      limits.state_cap = options.state_cap;
      limits.deadline = t + options.timeout;
      b.verdict = buchi::check(s.automaton, s.formula, limits).holds ? "holds" : "fails";
      b.oracle_seconds = seconds_since(t);
    } catch (const buchi::ResourceLimit&) {
      b.verdict = "unknown";
      // Unknown runs are charged the full timeout, as an upper bound.
      b.oracle_seconds = std::max(seconds_since(t), std::chrono::duration<double>(options.timeout).count());
      ++r.unknown;
    }

    t = clk::now();
    const nn::GraphInput in = encoder.input(s.automaton, s.formula, s.label);
    const nn::Batch batch = nn::make_batch({&in});
    b.preprocess_seconds = seconds_since(t);
    b.nodes = static_cast<std::size_t>(in.x.rows());

    t = clk::now();
    const nn::Vector z = model.logits(batch);
    b.inference_seconds = seconds_since(t);
    if (!std::isfinite(z[0])) throw std::domain_error("non-finite model output");

    r.oracle_seconds += b.oracle_seconds;
    r.preprocess_seconds += b.preprocess_seconds;
    r.inference_seconds += b.inference_seconds;
    r.samples.push_back(std::move(b));
  }
  return r;
}

std::string to_json(const BenchReport& r) {
  ordered_json samples = ordered_json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"verdict", s.verdict},
                       {"nodes", s.nodes},
                       {"oracle_s", s.oracle_seconds},
                       {"preprocess_s", s.preprocess_seconds},
                       {"inference_s", s.inference_seconds}});
  }
  ordered_json j = {{"samples", r.samples.size()},
                    {"unknown", r.unknown},
                    {"oracle_s", r.oracle_seconds},
                    {"preprocess_s", r.preprocess_seconds},
                    {"inference_s", r.inference_seconds},
                    {"speedup_inference", r.inference_speedup()},
                    {"speedup_with_overhead", r.overall_speedup()},
                    {"per_sample", std::move(samples)}};
  return j.dump(2);
}

std::string to_json(const nn::Metrics& m) {
  ordered_json j = {{"accuracy", m.accuracy},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"tp", m.confusion.tp},
                    {"fp", m.confusion.fp},
                    {"tn", m.confusion.tn},
                    {"fn", m.confusion.fn}};
  return j.dump(2);
}

std::string to_json(const nn::RankingMetrics& m) {
  ordered_json j = {{"groups", m.groups}, {"mrr", m.mrr}};
  for (std::size_t i = 0; i < m.ks.size(); ++i) j["hits@" + std::to_string(m.ks[i])] = m.hits[i];
  return j.dump(2);
}

}  // namespace octal::workflow
