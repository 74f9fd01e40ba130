#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "octal/nn.hpp"
#include "support/lasso_oracle.hpp"

using namespace octal;
using namespace octal::nn;

namespace {

constexpr Variant kVariants[] = {Variant::Gin, Variant::Gcn, Variant::Mlp, Variant::LinkPredictor};

const graph::Dictionary& dict() {
  static const graph::Dictionary d = graph::Dictionary::make(7);
  return d;
}

graph::Sample small_sample(std::mt19937_64& rng, std::size_t max_states = 3, bool directed = false) {
  const int atoms = 1 + static_cast<int>(rng() % 3);
  const buchi::Automaton b =
      oracle::random_automaton(rng, AtomSet::first(atoms), 1 + rng() % max_states, 1 + rng() % 4);
  const ltl::Formula f = ltl::random_formula({1 + rng() % 6, atoms, rng(), true});
  return graph::encode_pair(b, f, static_cast<int>(rng() % 2), {graph::Scheme::Gaussian, directed, &dict()},
                            rng());
}

GraphInput small_input(std::mt19937_64& rng) { return to_input(small_sample(rng)); }

Batch batch_of(const std::vector<GraphInput>& gs) {
  std::vector<const GraphInput*> ptrs;
  for (const auto& g : gs) ptrs.push_back(&g);
  return make_batch(ptrs);
}

Batch batch_of(const GraphInput& g) { return make_batch({&g}); }

// Same graph with node i moved to position perm[i].
GraphInput permuted(const GraphInput& g, const std::vector<std::uint32_t>& perm) {
  GraphInput out = g;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.x.row(perm[i]) = g.x.row(static_cast<Eigen::Index>(i));
    out.in_system[perm[i]] = g.in_system[i];
  }
  for (auto& e : out.edges) {
    e.u = perm[e.u];
    e.v = perm[e.v];
  }
  return out;
}

std::vector<std::uint32_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

Architecture arch_for(Variant v, std::size_t width = graph::kWidth) {
  Architecture a;
  a.variant = v;
  a.input_width = width;
  return a;
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (Variant v : kVariants) CHECK(parse_variant(name(v)) == v);
  CHECK_THROWS_AS(parse_variant("gat"), std::invalid_argument);
}

TEST_CASE("parameter shapes follow the architecture") {
  const Model gin(arch_for(Variant::Gin), 1);
  CHECK(gin.block("gnn0.lin1.w").rows == 64);
  CHECK(gin.block("gnn0.lin1.w").cols == 128);
  CHECK(gin.block("gnn2.lin2.w").rows == 128);
  CHECK(gin.block("head.lin1.w").rows == 128);
  CHECK(gin.block("head.lin2.w").cols == 1);
  CHECK(gin.running().size() == 3 * 2 * 128);

  const Model gcn(arch_for(Variant::Gcn, graph::kDirectedWidth), 1);
  CHECK(gcn.block("gnn0.lin.w").rows == 66);
  CHECK_THROWS_AS(gcn.block("gnn0.lin1.w"), std::out_of_range);

  const Model mlp(arch_for(Variant::Mlp), 1);
  CHECK(mlp.blocks().size() == 4);
  CHECK(mlp.block("head.lin1.w").rows == 64);
  CHECK(mlp.running().empty());

  Architecture lp = arch_for(Variant::LinkPredictor);
  CHECK(Model(lp, 1).block("head.lin1.w").rows == 256);
  lp.multiply = true;
  CHECK(Model(lp, 1).block("head.lin1.w").rows == 128);
  CHECK(Model(lp, 1).running().size() == 6 * 2 * 128);
}

TEST_CASE("initialization is uniform within 1/sqrt(fan_in)") {
  const Model m(arch_for(Variant::Gin), 3);
  for (const Block& b : m.blocks()) {
    const auto begin = m.params().begin() + static_cast<std::ptrdiff_t>(b.offset);
    const auto end = begin + static_cast<std::ptrdiff_t>(b.rows * b.cols);
    if (b.name.ends_with(".gamma")) {
      CHECK(std::all_of(begin, end, [](double v) { return v == 1.0; }));
    } else if (b.name.ends_with(".beta")) {
      CHECK(std::all_of(begin, end, [](double v) { return v == 0.0; }));
    } else {
      const std::size_t fan_in = b.name.ends_with(".w") ? b.rows : m.block(b.name.substr(0, b.name.size() - 2) + ".w").rows;
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      CHECK(std::all_of(begin, end, [&](double v) { return std::abs(v) <= bound; }));
    }
  }
  CHECK(Model(arch_for(Variant::Gin), 3).params() == m.params());
  CHECK(Model(arch_for(Variant::Gin), 4).params() != m.params());
}

TEST_CASE("outputs are probabilities; zero weights give 0.5") {
  std::mt19937_64 rng(11);
  std::vector<GraphInput> gs;
  for (int i = 0; i < 6; ++i) gs.push_back(small_input(rng));
  const Batch batch = batch_of(gs);
  for (Variant v : kVariants) {
    CAPTURE(name(v));
    Model m(arch_for(v), 5);
    const Vector p = m.predict(batch);
    REQUIRE(p.size() == 6);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      CHECK(p[i] > 0.0);
      CHECK(p[i] < 1.0);
    }
    std::fill(m.params().begin(), m.params().end(), 0.0);
    const Vector z = m.predict(batch);
    for (Eigen::Index i = 0; i < z.size(); ++i) CHECK(z[i] == 0.5);
  }
}

TEST_CASE("zero weights: gradient reaches only the output bias") {
  std::mt19937_64 rng(12);
  std::vector<GraphInput> gs;
  for (int i = 0; i < 4; ++i) gs.push_back(small_input(rng));
  gs[0].label = 1;
  gs[1].label = gs[2].label = gs[3].label = 0;
  const Batch batch = batch_of(gs);
  for (Variant v : kVariants) {
    CAPTURE(name(v));
    Model m(arch_for(v), 5);
    std::fill(m.params().begin(), m.params().end(), 0.0);
    GradCheckReport r = grad_check(m, batch, 30, 1);
    CHECK(r.max_relative_error < 1e-3);
    // d(mean BCE)/d(bias) = mean(sigmoid(0) - y) = 0.5 - 0.25.
    std::vector<double> probe = m.params();
    const Block& b = m.block("head.lin2.b");
    const double h = 1e-6;
    probe[b.offset] = h;
    Model shifted = m;
    shifted.params() = probe;
    const Vector z0 = m.forward(batch, Mode::Train);
    const Vector z1 = shifted.forward(batch, Mode::Train);
    const double numeric = (bce_with_logits(z1, batch.labels, nullptr) - bce_with_logits(z0, batch.labels, nullptr)) / h;
    CHECK(numeric == doctest::Approx(0.25).epsilon(1e-5));
  }
}

TEST_CASE("permuting node ids leaves every variant unchanged") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<GraphInput> gs, ps;
    for (int i = 0; i < 3; ++i) {
      gs.push_back(small_input(rng));
      ps.push_back(permuted(gs.back(), random_permutation(gs.back().x.rows(), rng)));
    }
    const Batch a = batch_of(gs), b = batch_of(ps);
    for (Variant v : kVariants) {
      CAPTURE(name(v));
      Model m(arch_for(v), static_cast<std::uint64_t>(trial));
      const Vector za = m.logits(a), zb = m.logits(b);
      for (Eigen::Index i = 0; i < za.size(); ++i) CHECK(std::abs(za[i] - zb[i]) <= 1e-9);
      Model ma = m, mb = m;
      const Vector ta = ma.forward(a, Mode::Train), tb = mb.forward(b, Mode::Train);
      for (Eigen::Index i = 0; i < ta.size(); ++i) CHECK(std::abs(ta[i] - tb[i]) <= 1e-9);
    }
  }
}

TEST_CASE("gcn on an edgeless graph is a per-node transform") {
  GraphInput g;
  g.x = Matrix::Zero(2, graph::kWidth);
  g.x(0, 0) = 1.0;
  g.x(1, 5) = -2.0;
  g.in_system = {1, 1};
  Architecture a = arch_for(Variant::Gcn);
  a.layers = 1;
  const Model m(a, 21);
  const auto mat = [&](const std::string& n) {
    const Block& b = m.block(n);
    return Eigen::Map<const Matrix>(m.params().data() + b.offset, static_cast<Eigen::Index>(b.rows),
                                    static_cast<Eigen::Index>(b.cols));
  };
  // Fresh running statistics: mean 0, variance 1, scale 1, shift 0.
  Matrix h = g.x * mat("gnn0.lin.w");
  h.rowwise() += mat("gnn0.lin.b").row(0);
  h = (h / std::sqrt(1.0 + 1e-5)).cwiseMax(0.0);
  const Eigen::RowVectorXd pooled = h.colwise().mean();
  Eigen::RowVectorXd y = pooled * mat("head.lin1.w") + mat("head.lin1.b").row(0);
  y = y.cwiseMax(0.0);
  const double z = (y * mat("head.lin2.w"))(0, 0) + mat("head.lin2.b")(0, 0);
  CHECK(m.logits(batch_of(g))[0] == doctest::Approx(z).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences on 20 small graphs, all variants") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 20; ++i) {
    std::vector<GraphInput> gs;
    const int graphs = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < graphs; ++k) gs.push_back(small_input(rng));
    const Batch batch = batch_of(gs);
    for (Variant v : kVariants) {
      CAPTURE(i);
      CAPTURE(name(v));
      Model m(arch_for(v), rng());
      const GradCheckReport r = grad_check(m, batch, 100, rng());
      CHECK(r.checked == 100);
      CHECK(r.max_relative_error < 1e-3);
    }
  }
}

TEST_CASE("gradient check covers the inner-norm GIN") {
  std::mt19937_64 rng(23);
  Architecture a = arch_for(Variant::Gin);
  a.inner_norm = true;
  CHECK(Model(a, 1).running().size() == 6 * 2 * 128);
  for (int i = 0; i < 5; ++i) {
    std::vector<GraphInput> gs{small_input(rng), small_input(rng)};
    Model m(a, rng());
    const GradCheckReport r = grad_check(m, batch_of(gs), 100, rng());
    CHECK(r.checked == 100);
    CHECK(r.max_relative_error < 1e-3);
  }
}

TEST_CASE("gradient check covers the multiplied link predictor and directed width") {
  std::mt19937_64 rng(15);
  Architecture a = arch_for(Variant::LinkPredictor, graph::kDirectedWidth);
  a.multiply = true;
  for (int i = 0; i < 5; ++i) {
    const GraphInput g = to_input(small_sample(rng, 3, true));
    Model m(a, rng());
    const GradCheckReport r = grad_check(m, batch_of(g), 100, rng());
    CHECK(r.max_relative_error < 1e-3);
  }
}

TEST_CASE("mlp ignores edges; link predictor ignores union edges") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const graph::Sample s = small_sample(rng);
    graph::Sample perturbed = s;
    perturbed.graph = graph::perturb_edges(s.graph, 0.3 + 0.7 * (trial / 9.0), rng());
    perturbed.features = graph::encode_features(perturbed.graph, graph::Scheme::Gaussian, false, &dict());
    graph::Sample no_union = s;
    std::erase_if(no_union.graph.edges, [](const graph::Edge& e) { return e.kind == graph::EdgeKind::Union; });

    const Model mlp(arch_for(Variant::Mlp), 3);
    CHECK(mlp.logits(batch_of(to_input(s)))[0] == mlp.logits(batch_of(to_input(perturbed)))[0]);
    const Model lp(arch_for(Variant::LinkPredictor), 3);
    CHECK(lp.logits(batch_of(to_input(s)))[0] == lp.logits(batch_of(to_input(no_union)))[0]);
    // The full union graph model does read union edges.
    if (no_union.graph.edges.size() != s.graph.edges.size()) {
      const Model gin(arch_for(Variant::Gin), 3);
      CHECK(gin.logits(batch_of(to_input(s)))[0] != gin.logits(batch_of(to_input(no_union)))[0]);
    }
  }
}

TEST_CASE("shape errors") {
  std::mt19937_64 rng(17);
  const GraphInput g = small_input(rng);
  const Model m(arch_for(Variant::Gin, graph::kDirectedWidth), 1);
  CHECK_THROWS_AS(m.logits(batch_of(g)), std::invalid_argument);
  GraphInput broken = g;
  broken.in_system.pop_back();
  CHECK_THROWS_AS(batch_of(broken), std::invalid_argument);
  CHECK_THROWS_AS(make_batch({}), std::invalid_argument);
}

TEST_CASE("classification metrics") {
  const Metrics all = classification_metrics({0.9, 0.1, 0.7, 0.2}, {1, 0, 1, 0});
  CHECK(all.accuracy == 1.0);
  CHECK(all.precision == 1.0);
  CHECK(all.recall == 1.0);

  Confusion c;
  c.tp = 3;
  c.fp = 1;
  c.fn = 2;
  c.tn = 4;
  const Metrics m = metrics_from_confusion(c);
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.6));
  CHECK(m.accuracy == doctest::Approx(0.7));

  // Constant 0.5 predicts label 1 for every sample.
  const Metrics tie = classification_metrics(std::vector<double>(10, 0.5), {1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
  CHECK(tie.accuracy == 0.5);
  CHECK(tie.recall == 1.0);
  CHECK(tie.confusion.fp == 5);

  CHECK_THROWS_AS(classification_metrics({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(classification_metrics({0.1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("ranking metrics") {
  CHECK(rank_of_positive({0.9, 0.1, 0.2}) == 1);
  CHECK(rank_of_positive({0.5, 0.5, 0.5}) == 1);
  CHECK(rank_of_positive({0.2, 0.9, 0.2, 0.3}) == 3);

  std::vector<double> fourth(51, 0.0);
  fourth[0] = 0.5;
  fourth[1] = fourth[2] = fourth[3] = 0.9;
  const RankingMetrics r4 = ranking_metrics({fourth, fourth});
  CHECK(r4.mrr == doctest::Approx(0.25));
  CHECK(r4.hits == std::vector<double>{0.0, 0.0, 1.0});

  std::vector<double> second(51, 0.0);
  second[0] = 0.5;
  second[7] = 0.6;
  const RankingMetrics r2 = ranking_metrics({second});
  CHECK(r2.mrr == doctest::Approx(0.5));
  CHECK(r2.hits == std::vector<double>{0.0, 1.0, 1.0});

  std::vector<double> first(51, 0.1);
  first[0] = 0.9;
  const RankingMetrics r1 = ranking_metrics({first, first, first});
  CHECK(r1.mrr == 1.0);
  CHECK(r1.hits[1] == 1.0);

  CHECK_THROWS_AS(ranking_metrics({}), std::invalid_argument);
  CHECK_THROWS_AS(rank_of_positive({}), std::invalid_argument);
}

TEST_CASE("ranking metrics properties on random scores") {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> groups(1 + rng() % 10, std::vector<double>(51));
    for (auto& g : groups) {
      for (auto& s : g) s = std::round(u(rng) * 8) / 8;  // coarse values force ties
    }
    const RankingMetrics r = ranking_metrics(groups, {1, 3, 10, 51});
    CHECK(r.mrr > 0.0);
    CHECK(r.mrr <= 1.0);
    CHECK(std::is_sorted(r.hits.begin(), r.hits.end()));
    CHECK(r.hits.back() == 1.0);
    // Rank via a stable descending sort with the positive first.
    for (const auto& g : groups) {
      std::vector<std::size_t> order(g.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return g[a] > g[b]; });
      const auto at = std::find(order.begin(), order.end(), 0) - order.begin();
      CHECK(rank_of_positive(g) == static_cast<std::size_t>(at + 1));
    }
  }
}

TEST_CASE("hyperparameter validation") {
  std::mt19937_64 rng(19);
  const std::vector<GraphInput> data{small_input(rng), small_input(rng)};
  Hyper bad;
  bad.dropout = 1.0;
  CHECK_THROWS_AS(train(arch_for(Variant::Mlp), data, data, bad), std::invalid_argument);
  bad = Hyper{};
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train(arch_for(Variant::Mlp), data, data, bad), std::invalid_argument);
  CHECK_THROWS_AS(train(arch_for(Variant::Mlp), {}, data, Hyper{}), std::invalid_argument);
}

TEST_CASE("training overfits 20 samples and is deterministic") {
  std::mt19937_64 rng(20);
  std::vector<GraphInput> data;
  for (int i = 0; i < 20; ++i) {
    data.push_back(small_input(rng));
    data.back().label = i % 2;
  }
  Hyper hp;
  hp.learning_rate = 3e-3;
  hp.dropout = 0.0;
  hp.batch_size = 10;
  hp.patience = 200;
  hp.max_epochs = 200;
  hp.seed = 4;
  const TrainResult a = train(arch_for(Variant::Gin), data, data, hp);
  CHECK(a.best_val_accuracy == 1.0);
  std::vector<int> labels;
  for (const auto& g : data) labels.push_back(g.label);
  CHECK(classification_metrics(predict(a.model, data), labels).accuracy == 1.0);

  hp.max_epochs = 8;
  hp.dropout = 0.1;
  const TrainResult b = train(arch_for(Variant::Gin), data, data, hp);
  // Shift the heap so the second run sees different allocation addresses.
  const std::vector<double> shift(3, 0.0);
  const TrainResult c = train(arch_for(Variant::Gin), data, data, hp);
  CHECK(b.history == c.history);
  CHECK(b.model.params() == c.model.params());
  CHECK(write_history(b.history) == write_history(c.history));
}

TEST_CASE("early stopping returns the best epoch") {
  std::mt19937_64 rng(21);
  std::vector<GraphInput> data;
  for (int i = 0; i < 8; ++i) data.push_back(small_input(rng));
  Hyper hp;
  hp.patience = 2;
  hp.max_epochs = 50;
  std::vector<EpochRecord> seen;
  const TrainResult r = train(arch_for(Variant::Mlp), data, data, hp, [&](const EpochRecord& e) { seen.push_back(e); });
  CHECK(seen == r.history);
  CHECK(r.history.size() < 50);
  const auto best = std::max_element(r.history.begin(), r.history.end(),
                                     [](const auto& x, const auto& y) { return x.val_accuracy < y.val_accuracy; });
  CHECK(r.best_epoch == best->epoch);
  CHECK(r.history.size() == r.best_epoch + hp.patience);
  CHECK(classification_metrics(predict(r.model, data), [&] {
          std::vector<int> l;
          for (const auto& g : data) l.push_back(g.label);
          return l;
        }()).accuracy == r.best_val_accuracy);
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(22);
  std::vector<GraphInput> gs;
  for (int i = 0; i < 4; ++i) gs.push_back(small_input(rng));
  const Batch batch = batch_of(gs);
  for (Variant v : kVariants) {
    CAPTURE(name(v));
    Checkpoint c;
    c.model = Model(arch_for(v), 9);
    c.model.forward(batch, Mode::Train);  // move the running statistics
    c.hyper.seed = 123;
    c.hyper.learning_rate = 2e-4;
    c.dictionary_seed = 7;
    const std::string text = write_checkpoint(c);
    const Checkpoint back = read_checkpoint(text);
    CHECK(back.model.architecture() == c.model.architecture());
    CHECK(back.hyper == c.hyper);
    CHECK(back.dictionary_seed == 7);
    CHECK(write_checkpoint(back) == text);
    for (std::size_t i = 0; i < c.model.params().size(); ++i) {
      CHECK(back.model.params()[i] == graph::quantize(c.model.params()[i]));
    }
    const Vector za = c.model.logits(batch), zb = back.model.logits(batch);
    for (Eigen::Index i = 0; i < za.size(); ++i) CHECK(za[i] == doctest::Approx(zb[i]).epsilon(1e-6));
  }
  CHECK_THROWS_AS(read_checkpoint("{"), std::invalid_argument);
  CHECK_THROWS_AS(read_checkpoint("{\"format\":\"octal-checkpoint-1\"}"), std::invalid_argument);
}
