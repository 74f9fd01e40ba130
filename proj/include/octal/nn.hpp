#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "octal/graph.hpp"

namespace octal::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Variant : std::uint8_t { Gin, Gcn, Mlp, LinkPredictor };

std::string_view name(Variant v);
/// Accepts "gin", "gcn", "mlp" and "linkpred".
Variant parse_variant(std::string_view text);

struct Architecture {
  Variant variant = Variant::Gin;
  std::size_t input_width = graph::kWidth;
  std::size_t hidden = 128;
  std::size_t layers = 3;
  /// Link predictor only: combine the two embeddings by elementwise product
  /// instead of concatenation.
  bool multiply = false;
  /// GIN only: batch normalization between the two linear maps of each layer.
  bool inner_norm = false;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Model input: features plus undirected edges and the system/tree split.
struct GraphInput {
  Matrix x;
  std::vector<graph::Edge> edges;
  std::vector<char> in_system;
  int label = 0;
};

GraphInput to_input(const graph::Sample& s);

/// Disjoint union of several graphs with precomputed propagation operators.
struct Batch {
  Matrix x;
  std::vector<std::size_t> offsets;  // node offset of each graph, plus the total
  Vector labels;
  Sparse adjacency;     // all edges, both directions (GIN)
  Sparse normalized;    // D^-1/2 (A + I) D^-1/2 over all edges (GCN)
  // Link predictor: separate node sets with their own operators.
  std::vector<std::uint32_t> system_nodes, tree_nodes;
  std::vector<std::size_t> system_offsets, tree_offsets;
  Sparse system_normalized;  // incidence edges only
  Sparse tree_normalized;    // tree edges only

  std::size_t size() const { return offsets.size() - 1; }
};

Batch make_batch(const std::vector<const GraphInput*>& graphs);

/// Named parameter block inside the flat parameter vector.
struct Block {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
};

enum class Mode : std::uint8_t { Train, Eval };

/// Forward activations kept for the backward pass.
struct Tape;

class Model {
 public:
  Model() = default;
  /// PyTorch-style initialization: weights and biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
  /// batch-norm scale 1 and shift 0.
  Model(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::string_view name) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  /// Batch-norm running means and variances.
  std::vector<double>& running() { return running_; }
  const std::vector<double>& running() const { return running_; }

  /// Logits, one per graph. In Train mode batch-norm uses batch statistics
  /// and updates the running ones; dropout uses `rng` when rate > 0.
  Vector forward(const Batch& batch, Mode mode, double dropout = 0.0, std::mt19937_64* rng = nullptr,
                 Tape* tape = nullptr);
  /// Adds d(loss)/d(params) to `grad`, given d(loss)/d(logits).
  void backward(const Tape& tape, const Vector& dlogits, std::vector<double>& grad) const;

  /// Probabilities in eval mode.
  Vector predict(const Batch& batch) const;
  /// Eval-mode logits; these keep their order where probabilities saturate.
  Vector logits(const Batch& batch) const;

 private:
  void add_block(const std::string& name, std::size_t rows, std::size_t cols);
  void add_linear(const std::string& prefix, std::size_t in, std::size_t out);
  void add_norm(const std::string& prefix, std::size_t width);

  Architecture arch_;
  std::vector<Block> blocks_;
  std::vector<double> params_;
  std::vector<double> running_;
};

/// Mean binary cross-entropy of logits against labels and its gradient.
double bce_with_logits(const Vector& logits, const Vector& labels, Vector* dlogits);

double sigmoid(double z);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

/// Central finite differences (step 1e-4) on `coordinates` random parameters
/// of the training-mode loss without dropout. Coordinates whose perturbation
/// flips a ReLU are resampled, since the loss is not differentiable there.
GradCheckReport grad_check(Model& model, const Batch& batch, std::size_t coordinates,
                           std::uint64_t seed);

struct Hyper {
  double learning_rate = 1e-5;
  double dropout = 0.1;
  std::size_t patience = 5;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const Hyper&, const Hyper&) = default;
};

class Adam {
 public:
  Adam(std::size_t size, const Hyper& hp);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  Hyper hp_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  Model model;  // best checkpoint
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

class Divergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const Architecture& arch, const std::vector<GraphInput>& train_set,
                  const std::vector<GraphInput>& val_set, const Hyper& hp,
                  const EpochCallback& on_epoch = {});

/// Eval-mode probabilities for every input, batched.
std::vector<double> predict(const Model& model, const std::vector<GraphInput>& inputs,
                            std::size_t batch_size = 64);
std::vector<double> predict_logits(const Model& model, const std::vector<GraphInput>& inputs,
                                   std::size_t batch_size = 64);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct Metrics {
  Confusion confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Probability >= 0.5 predicts label 1. Throws on empty input.
Metrics classification_metrics(const std::vector<double>& probabilities,
                               const std::vector<int>& labels);
Metrics metrics_from_confusion(const Confusion& c);

struct RankingMetrics {
  std::size_t groups = 0;
  double mrr = 0.0;
  std::vector<std::size_t> ks{1, 3, 10};
  std::vector<double> hits;  // one per k
};

/// scores[g][0] is the positive; higher ranks first, ties by index.
std::size_t rank_of_positive(const std::vector<double>& scores);
RankingMetrics ranking_metrics(const std::vector<std::vector<double>>& scores,
                               std::vector<std::size_t> ks = {1, 3, 10});

/// Checkpoint text: architecture, hyperparameters, weights with 9 significant
/// digits, running statistics, and the encoding dictionary values.
struct Checkpoint {
  Model model;
  Hyper hyper;
  std::string scheme = "gaussian";
  bool directed = false;
  std::uint64_t dictionary_seed = 0;
  double dictionary_sigma = 0.05;
};

std::string write_checkpoint(const Checkpoint& c);
Checkpoint read_checkpoint(std::string_view text);

/// One JSON object per line: {"epoch", "train_loss", "val_accuracy"}.
std::string write_history(const std::vector<EpochRecord>& history);

}  // namespace octal::nn
