#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "octal/buchi.hpp"
#include "octal/ltl.hpp"

namespace octal::graph {

enum class NodeKind : std::uint8_t { State, Transition, Operator, Literal, Constant };
enum class EdgeKind : std::uint8_t { Incidence, Tree, Union };

std::string_view name(NodeKind kind);
std::string_view name(EdgeKind kind);

struct Node {
  NodeKind kind = NodeKind::State;
  // State
  bool initial = false;
  bool accepting = false;
  // Transition
  buchi::Cube cube;
  buchi::StateId src = 0;
  buchi::StateId dst = 0;
  // Operator
  ltl::Kind op = ltl::Kind::And;
  // Literal
  char atom = 0;
  bool positive = true;
  // Constant
  bool value = false;

  bool in_system() const { return kind == NodeKind::State || kind == NodeKind::Transition; }

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  EdgeKind kind = EdgeKind::Incidence;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// System graph, specification tree, or their union. Node ids are indices.
/// In a union, system nodes (states, then transitions) come first and tree
/// nodes follow in postorder, so the root is last.
struct UnionGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::size_t count(NodeKind kind) const;
  std::size_t count(EdgeKind kind) const;

  friend bool operator==(const UnionGraph&, const UnionGraph&) = default;
};

/// One State node per state, one Transition node per transition, and an
/// incidence edge to the source and to the destination (one for self-loops).
UnionGraph build_system_graph(const buchi::Automaton& b);

/// Expression tree of an NNF formula with negations folded into literals.
/// Edges run parent to child. Throws std::invalid_argument on non-NNF input.
UnionGraph build_spec_tree(const ltl::Formula& nnf);

/// Disjoint union plus one Union edge (literal, transition) for every literal
/// leaf and every transition whose cube mentions the same atom, regardless of
/// polarity.
UnionGraph build_union(const UnionGraph& system, const UnionGraph& tree);

/// Structural invariant violations, empty when the graph is well formed.
/// With `perturbed`, transitions may have lost incidence edges.
std::vector<std::string> check_invariants(const UnionGraph& g, bool perturbed = false);

/// Removes ceil(p * |incidence edges|) incidence edges chosen uniformly at
/// random. Other edges and all nodes are kept.
UnionGraph perturb_edges(const UnionGraph& g, double p, std::uint64_t seed);

// Feature layout.
inline constexpr std::size_t kPartI = 0;
inline constexpr std::size_t kPartII = 1;
inline constexpr std::size_t kPartIII = 27;
inline constexpr std::size_t kPartIV = 53;
inline constexpr std::size_t kPartV = 62;
inline constexpr std::size_t kPartVI = 64;
inline constexpr std::size_t kWidth = 64;
inline constexpr std::size_t kDirectedWidth = 66;

/// Operators in feature order; "!" has no slot.
inline constexpr std::array<ltl::Kind, 9> kOperatorOrder = {
    ltl::Kind::Globally,  ltl::Kind::Finally,       ltl::Kind::Release,
    ltl::Kind::WeakUntil, ltl::Kind::StrongRelease, ltl::Kind::Next,
    ltl::Kind::Until,     ltl::Kind::And,           ltl::Kind::Or};

/// Slot of an operator within Part IV. Throws std::invalid_argument for "!"
/// and leaves.
std::size_t operator_slot(ltl::Kind kind);

inline constexpr std::size_t kSymbolCount = 35;

/// One value per symbol: atoms a..z are symbols 1..26, operators 27..35 in
/// kOperatorOrder. Symbol i is drawn from Normal(i, sigma).
class Dictionary {
 public:
  static Dictionary make(std::uint64_t seed, double sigma = 0.05);

  double atom(char name) const;
  double op(ltl::Kind kind) const;
  const std::array<double, kSymbolCount>& values() const { return values_; }
  std::uint64_t seed() const { return seed_; }
  double sigma() const { return sigma_; }

 private:
  std::array<double, kSymbolCount> values_{};
  std::uint64_t seed_ = 0;
  double sigma_ = 0.05;
};

enum class Scheme : std::uint8_t { Gaussian, OneHot };

/// Dense row-major matrix, one row per node.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Values are rounded to 9 significant digits so that the text form of a
/// sample round-trips exactly.
double quantize(double x);

/// `dict` may be null for the one-hot scheme.
FeatureMatrix encode_features(const UnionGraph& g, Scheme scheme, bool directed,
                              const Dictionary* dict);

/// Row-sparsity violations of a feature matrix against its graph.
std::vector<std::string> check_features(const UnionGraph& g, const FeatureMatrix& x, bool directed);

struct SampleMeta {
  std::uint64_t seed = 0;
  std::string formula;
  std::string automaton_hash;

  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

struct Sample {
  UnionGraph graph;
  FeatureMatrix features;
  int label = 0;
  SampleMeta meta;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct EncodeOptions {
  Scheme scheme = Scheme::Gaussian;
  bool directed = false;
  const Dictionary* dict = nullptr;
};

/// Union graph of b and to_nnf(f) with features attached.
Sample encode_pair(const buchi::Automaton& b, const ltl::Formula& f, int label,
                   const EncodeOptions& options, std::uint64_t seed = 0);

/// Rebuilds the system automaton from the State and Transition nodes.
buchi::Automaton system_automaton(const UnionGraph& g);

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON object without a trailing newline.
std::string write_sample(const Sample& s);
/// Throws SchemaError on malformed records.
Sample read_sample(std::string_view line);

}  // namespace octal::graph
