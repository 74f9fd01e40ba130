#include <algorithm>
#include <cmath>
#include <numeric>

#include "octal/nn.hpp"
#include "tape.hpp"

namespace octal::nn {

Adam::Adam(std::size_t size, const Hyper& hp) : hp_(hp), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = hp_.beta1 * m_[i] + (1 - hp_.beta1) * grad[i];
    v_[i] = hp_.beta2 * v_[i] + (1 - hp_.beta2) * grad[i] * grad[i];
    params[i] -= hp_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + hp_.epsilon);
  }
}

namespace {

std::vector<const GraphInput*> slice(const std::vector<GraphInput>& data, const std::vector<std::size_t>& order,
                                     std::size_t from, std::size_t to) {
  std::vector<const GraphInput*> out;
  for (std::size_t i = from; i < to; ++i) out.push_back(&data[order[i]]);
  return out;
}

std::vector<int> labels_of(const std::vector<GraphInput>& data) {
  std::vector<int> out;
  for (const auto& g : data) out.push_back(g.label);
  return out;
}

void validate(const Hyper& hp) {
  if (!(hp.learning_rate > 0) || hp.batch_size == 0 || hp.max_epochs == 0 || hp.patience == 0 ||
      !(hp.dropout >= 0 && hp.dropout < 1) || !(hp.beta1 > 0 && hp.beta1 < 1) ||
      !(hp.beta2 > 0 && hp.beta2 < 1) || !(hp.epsilon > 0)) {
    throw std::invalid_argument("invalid hyperparameters");
  }
}

}  // namespace

TrainResult train(const Architecture& arch, const std::vector<GraphInput>& train_set,
                  const std::vector<GraphInput>& val_set, const Hyper& hp, const EpochCallback& on_epoch) {
  validate(hp);
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("empty training or validation set");
  Model model(arch, hp.seed);
  Adam adam(model.params().size(), hp);
  std::mt19937_64 rng(hp.seed ^ 0x5eedull);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::vector<int> val_labels = labels_of(val_set);

  TrainResult result;
  result.model = model;
  result.best_val_accuracy = -1.0;
  std::size_t stale = 0;
  std::vector<double> grad(model.params().size());
  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t from = 0; from < order.size(); from += hp.batch_size) {
      const std::size_t to = std::min(order.size(), from + hp.batch_size);
      const Batch batch = make_batch(slice(train_set, order, from, to));
      Tape tape;
      const Vector logits = model.forward(batch, Mode::Train, hp.dropout, &rng, &tape);
      Vector dlogits;
      const double loss = bce_with_logits(logits, batch.labels, &dlogits);
      if (!std::isfinite(loss)) {
        throw Divergence("non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(to - from);
      std::fill(grad.begin(), grad.end(), 0.0);
      model.backward(tape, dlogits, grad);
      adam.step(model.params(), grad);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_accuracy = classification_metrics(predict(model, val_set, hp.batch_size), val_labels).accuracy;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = rec.val_accuracy;
      result.best_epoch = epoch;
      result.model = model;
      stale = 0;
    } else if (++stale >= hp.patience) {
      break;
    }
  }
  return result;
}

namespace {

template <typename Fn>
std::vector<double> batched(const std::vector<GraphInput>& inputs, std::size_t batch_size, Fn fn) {
  std::vector<double> out;
  out.reserve(inputs.size());
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t from = 0; from < inputs.size(); from += batch_size) {
    const std::size_t to = std::min(inputs.size(), from + batch_size);
    const Vector p = fn(make_batch(slice(inputs, order, from, to)));
    out.insert(out.end(), p.data(), p.data() + p.size());
  }
  return out;
}

}  // namespace

std::vector<double> predict(const Model& model, const std::vector<GraphInput>& inputs, std::size_t batch_size) {
  return batched(inputs, batch_size, [&](const Batch& b) { return model.predict(b); });
}

std::vector<double> predict_logits(const Model& model, const std::vector<GraphInput>& inputs,
                                   std::size_t batch_size) {
  return batched(inputs, batch_size, [&](const Batch& b) { return model.logits(b); });
}

Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const std::size_t n = c.tp + c.fp + c.tn + c.fn;
  if (n == 0) throw std::invalid_argument("empty evaluation set");
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
  m.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return m;
}

Metrics classification_metrics(const std::vector<double>& probabilities, const std::vector<int>& labels) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("size mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= 0.5;
    if (labels[i] == 1) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return metrics_from_confusion(c);
}

std::size_t rank_of_positive(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("empty ranking group");
  // Candidates before the positive in a stable descending sort: strictly
  // higher scores only, since the positive has the lowest index.
  std::size_t rank = 1;
  for (std::size_t i = 1; i < scores.size(); ++i) rank += scores[i] > scores[0];
  return rank;
}

RankingMetrics ranking_metrics(const std::vector<std::vector<double>>& scores, std::vector<std::size_t> ks) {
  if (scores.empty()) throw std::invalid_argument("no ranking groups");
  RankingMetrics m;
  m.groups = scores.size();
  m.ks = std::move(ks);
  m.hits.assign(m.ks.size(), 0.0);
  for (const auto& group : scores) {
    const std::size_t r = rank_of_positive(group);
    m.mrr += 1.0 / static_cast<double>(r);
    for (std::size_t j = 0; j < m.ks.size(); ++j) m.hits[j] += r <= m.ks[j];
  }
  m.mrr /= static_cast<double>(scores.size());
  for (double& h : m.hits) h /= static_cast<double>(scores.size());
  return m;
}

}  // namespace octal::nn
