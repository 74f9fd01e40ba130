#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "octal/graph.hpp"

namespace octal::graph {

std::size_t operator_slot(ltl::Kind kind) {
  for (std::size_t i = 0; i < kOperatorOrder.size(); ++i) {
    if (kOperatorOrder[i] == kind) return i;
  }
  throw std::invalid_argument("symbol has no operator slot");
}

double quantize(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

Dictionary Dictionary::make(std::uint64_t seed, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  Dictionary d;
  d.seed_ = seed;
  d.sigma_ = sigma;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < kSymbolCount; ++i) {
    std::normal_distribution<double> normal(static_cast<double>(i + 1), sigma);
    while (true) {
      const double v = quantize(normal(rng));
      bool clash = v == 0.0;
      for (std::size_t j = 0; j < i && !clash; ++j) clash = std::abs(d.values_[j] - v) < 1e-6;
      if (!clash) {
        d.values_[i] = v;
        break;
      }
    }
  }
  return d;
}

double Dictionary::atom(char name) const {
  return values_[static_cast<std::size_t>(atom_index(name))];
}

double Dictionary::op(ltl::Kind kind) const { return values_[kAtomCount + operator_slot(kind)]; }

FeatureMatrix encode_features(const UnionGraph& g, Scheme scheme, bool directed,
                              const Dictionary* dict) {
  if (scheme == Scheme::Gaussian && dict == nullptr) {
    throw std::invalid_argument("gaussian features need a dictionary");
  }
  FeatureMatrix x;
  x.rows = g.nodes.size();
  x.cols = directed ? kDirectedWidth : kWidth;
  x.data.assign(x.rows * x.cols, 0.0);
  const auto atom_value = [&](char a) { return scheme == Scheme::Gaussian ? dict->atom(a) : 1.0; };
  const std::size_t states = g.count(NodeKind::State);
  const double scale = states == 0 ? 0.0 : 1.0 / static_cast<double>(states);

  for (std::size_t r = 0; r < g.nodes.size(); ++r) {
    const Node& n = g.nodes[r];
    switch (n.kind) {
      case NodeKind::State:
        x.at(r, kPartV) = n.initial ? 1.0 : 0.0;
        x.at(r, kPartV + 1) = n.accepting ? 1.0 : 0.0;
        break;
      case NodeKind::Transition:
        if (n.cube.is_true()) x.at(r, kPartI) = 1.0;
        for (char a : AtomSet(n.cube.positive()).letters()) {
          x.at(r, kPartII + atom_index(a)) = atom_value(a);
        }
        for (char a : AtomSet(n.cube.negative()).letters()) {
          x.at(r, kPartIII + atom_index(a)) = atom_value(a);
        }
        if (directed) {
          x.at(r, kPartVI) = quantize(n.src * scale);
          x.at(r, kPartVI + 1) = quantize(n.dst * scale);
        }
        break;
      case NodeKind::Literal:
        x.at(r, (n.positive ? kPartII : kPartIII) + atom_index(n.atom)) = atom_value(n.atom);
        break;
      case NodeKind::Constant:
        x.at(r, kPartI) = n.value ? 1.0 : -1.0;
        break;
      case NodeKind::Operator:
        x.at(r, kPartIV + operator_slot(n.op)) =
            scheme == Scheme::Gaussian ? dict->op(n.op) : 1.0;
        break;
    }
  }
  return x;
}

std::vector<std::string> check_features(const UnionGraph& g, const FeatureMatrix& x, bool directed) {
  std::vector<std::string> out;
  const std::size_t width = directed ? kDirectedWidth : kWidth;
  if (x.cols != width) out.push_back("feature width mismatch");
  if (x.rows != g.nodes.size()) out.push_back("feature row count mismatch");
  if (!out.empty()) return out;
  const auto nonzeros = [&](std::size_t r, std::size_t from, std::size_t to) {
    std::size_t k = 0;
    for (std::size_t c = from; c < to; ++c) k += x.at(r, c) != 0.0;
    return k;
  };
  for (std::size_t r = 0; r < x.rows; ++r) {
    const Node& n = g.nodes[r];
    const std::size_t total = nonzeros(r, 0, width);
    const std::size_t part_vi = directed ? nonzeros(r, kPartVI, width) : 0;
    switch (n.kind) {
      case NodeKind::State:
        if (total != nonzeros(r, kPartV, kPartVI)) out.push_back("state row outside Part V");
        break;
      case NodeKind::Transition: {
        const auto literals = static_cast<std::size_t>(n.cube.literal_count());
        const std::size_t part_i = nonzeros(r, kPartI, kPartII);
        if (nonzeros(r, kPartII, kPartIV) != literals) out.push_back("transition literal count");
        if (part_i != (n.cube.is_true() ? 1u : 0u)) out.push_back("transition Part I flag");
        if (total != literals + part_i + part_vi) out.push_back("transition row outside its parts");
        break;
      }
      case NodeKind::Literal:
        if (total != 1 || nonzeros(r, kPartII, kPartIV) != 1) out.push_back("literal row sparsity");
        break;
      case NodeKind::Operator:
        if (total != 1 || nonzeros(r, kPartIV, kPartV) != 1) out.push_back("operator row sparsity");
        break;
      case NodeKind::Constant:
        if (total != 1 || nonzeros(r, kPartI, kPartII) != 1) out.push_back("constant row sparsity");
        break;
    }
  }
  return out;
}

}  // namespace octal::graph
