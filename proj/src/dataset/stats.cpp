#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "octal/dataset.hpp"

namespace octal::dataset {

namespace {

Histogram histogram(const std::vector<std::size_t>& values, std::size_t max_bins) {
  Histogram h;
  if (values.empty()) return h;
  h.min = *std::min_element(values.begin(), values.end());
  h.max = *std::max_element(values.begin(), values.end());
  const std::size_t span = h.max - h.min + 1;
  h.bin_width = (span + max_bins - 1) / max_bins;
  h.bins.assign((span + h.bin_width - 1) / h.bin_width, 0);
  double total = 0.0;
  for (auto v : values) {
    ++h.bins[(v - h.min) / h.bin_width];
    total += static_cast<double>(v);
  }
  h.mean = total / static_cast<double>(values.size());
  return h;
}

nlohmann::ordered_json to_json(const Histogram& h) {
  return {{"min", h.min}, {"max", h.max}, {"mean", h.mean}, {"bin_width", h.bin_width}, {"bins", h.bins}};
}

}  // namespace

CorpusStats corpus_stats(const Dataset& ds, std::size_t max_bins) {
  if (max_bins == 0) throw std::invalid_argument("max_bins must be positive");
  CorpusStats out;
  out.samples = ds.samples.size();
  out.positives = ds.positives();
  std::vector<std::size_t> length, states, transitions;
  for (const Sample& s : ds.samples) {
    length.push_back(ltl::printed_length(s.formula));
    states.push_back(s.automaton.state_count);
    transitions.push_back(s.automaton.transitions.size());
  }
  out.length = histogram(length, max_bins);
  out.states = histogram(states, max_bins);
  out.transitions = histogram(transitions, max_bins);
  return out;
}

std::string to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j = {{"samples", stats.samples},
                              {"positives", stats.positives},
                              {"length", to_json(stats.length)},
                              {"states", to_json(stats.states)},
                              {"transitions", to_json(stats.transitions)}};
  return j.dump();
}

std::vector<graph::Sample> encode(const Dataset& ds, const graph::EncodeOptions& options) {
  std::vector<graph::Sample> out;
  out.reserve(ds.samples.size());
  for (const Sample& s : ds.samples) {
    out.push_back(graph::encode_pair(s.automaton, s.formula, s.label, options, s.seed));
  }
  return out;
}

Sample decode(const graph::Sample& s) {
  Sample out;
  out.automaton = graph::system_automaton(s.graph);
  out.formula = ltl::parse(s.meta.formula);
  out.automaton.atoms = out.automaton.atoms | out.formula.atoms();
  out.label = s.label;
  out.seed = s.meta.seed;
  out.atom_count = static_cast<int>(out.automaton.atoms.size());
  out.tree_size = out.formula.size();
  return out;
}

void write_jsonl(const std::string& path, const std::vector<graph::Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& s : samples) out << graph::write_sample(s) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<graph::Sample> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<graph::Sample> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(graph::read_sample(line));
    } catch (const graph::SchemaError& e) {
      throw graph::SchemaError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace octal::dataset
