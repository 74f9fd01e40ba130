#include <cmath>
#include <stdexcept>

#include "octal/nn.hpp"
#include "tape.hpp"

namespace octal::nn {

namespace {

constexpr double kNormEps = 1e-5;
constexpr double kMomentum = 0.1;

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using RowMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;

Sparse normalized_operator(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::vector<double> degree(n, 1.0);
  for (auto [u, v] : edges) {
    degree[u] += 1.0;
    degree[v] += 1.0;
  }
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(n + 2 * edges.size());
  for (std::size_t i = 0; i < n; ++i) t.emplace_back(i, i, 1.0 / degree[i]);
  for (auto [u, v] : edges) {
    const double w = 1.0 / std::sqrt(degree[u] * degree[v]);
    t.emplace_back(u, v, w);
    t.emplace_back(v, u, w);
  }
  Sparse s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

// Mean of the rows of each segment [offsets[g], offsets[g+1]).
Matrix mean_pool(const Matrix& h, const std::vector<std::size_t>& offsets) {
  const std::size_t graphs = offsets.size() - 1;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(graphs), h.cols());
  for (std::size_t g = 0; g < graphs; ++g) {
    const auto count = static_cast<Eigen::Index>(offsets[g + 1] - offsets[g]);
    if (count == 0) continue;
    out.row(g) = h.middleRows(static_cast<Eigen::Index>(offsets[g]), count).colwise().sum() /
                 static_cast<double>(count);
  }
  return out;
}

Matrix mean_pool_backward(const Matrix& dpooled, const std::vector<std::size_t>& offsets) {
  Matrix dh = Matrix::Zero(static_cast<Eigen::Index>(offsets.back()), dpooled.cols());
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    const auto count = static_cast<Eigen::Index>(offsets[g + 1] - offsets[g]);
    if (count == 0) continue;
    dh.middleRows(static_cast<Eigen::Index>(offsets[g]), count).rowwise() =
        dpooled.row(g) / static_cast<double>(count);
  }
  return dh;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& dy, const Matrix& pre) {
  return (pre.array() > 0.0).select(dy, 0.0);
}

}  // namespace

std::string_view name(Variant v) {
  switch (v) {
    case Variant::Gin: return "gin";
    case Variant::Gcn: return "gcn";
    case Variant::Mlp: return "mlp";
    case Variant::LinkPredictor: return "linkpred";
  }
  return "";
}

Variant parse_variant(std::string_view text) {
  for (auto v : {Variant::Gin, Variant::Gcn, Variant::Mlp, Variant::LinkPredictor}) {
    if (name(v) == text) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(text) + "'");
}

GraphInput to_input(const graph::Sample& s) {
  GraphInput in;
  in.x = ConstMatrixMap(s.features.data.data(), static_cast<Eigen::Index>(s.features.rows),
                        static_cast<Eigen::Index>(s.features.cols));
  in.edges = s.graph.edges;
  in.in_system.reserve(s.graph.nodes.size());
  for (const auto& n : s.graph.nodes) in.in_system.push_back(n.in_system() ? 1 : 0);
  in.label = s.label;
  return in;
}

Batch make_batch(const std::vector<const GraphInput*>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("empty batch");
  Batch b;
  const auto width = graphs.front()->x.cols();
  std::size_t total = 0;
  b.offsets.push_back(0);
  for (const auto* g : graphs) {
    if (g->x.cols() != width) throw std::invalid_argument("feature width mismatch within batch");
    if (g->in_system.size() != static_cast<std::size_t>(g->x.rows())) {
      throw std::invalid_argument("missing system/tree partition");
    }
    total += static_cast<std::size_t>(g->x.rows());
    b.offsets.push_back(total);
  }
  b.x.resize(static_cast<Eigen::Index>(total), width);
  b.labels.resize(static_cast<Eigen::Index>(graphs.size()));

  std::vector<std::pair<std::uint32_t, std::uint32_t>> all, sys_edges, tree_edges;
  std::vector<std::uint32_t> local(total, 0);
  b.system_offsets.push_back(0);
  b.tree_offsets.push_back(0);
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const GraphInput& g = *graphs[gi];
    const auto base = static_cast<std::uint32_t>(b.offsets[gi]);
    b.x.middleRows(base, g.x.rows()) = g.x;
    b.labels[static_cast<Eigen::Index>(gi)] = g.label;
    for (std::uint32_t i = 0; i < g.in_system.size(); ++i) {
      auto& list = g.in_system[i] ? b.system_nodes : b.tree_nodes;
      local[base + i] = static_cast<std::uint32_t>(list.size());
      list.push_back(base + i);
    }
    b.system_offsets.push_back(b.system_nodes.size());
    b.tree_offsets.push_back(b.tree_nodes.size());
    for (const auto& e : g.edges) {
      const std::uint32_t u = base + e.u, v = base + e.v;
      all.emplace_back(u, v);
      if (e.kind == graph::EdgeKind::Incidence) sys_edges.emplace_back(local[u], local[v]);
      if (e.kind == graph::EdgeKind::Tree) tree_edges.emplace_back(local[u], local[v]);
    }
  }
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * all.size());
  for (auto [u, v] : all) {
    t.emplace_back(u, v, 1.0);
    t.emplace_back(v, u, 1.0);
  }
  b.adjacency.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  b.adjacency.setFromTriplets(t.begin(), t.end());
  b.normalized = normalized_operator(total, all);
  b.system_normalized = normalized_operator(b.system_nodes.size(), sys_edges);
  b.tree_normalized = normalized_operator(b.tree_nodes.size(), tree_edges);
  return b;
}

// ---------------------------------------------------------------------------
// Parameters

void Model::add_block(const std::string& name, std::size_t rows, std::size_t cols) {
  blocks_.push_back({name, rows, cols, params_.size()});
  params_.resize(params_.size() + rows * cols, 0.0);
}

void Model::add_linear(const std::string& prefix, std::size_t in, std::size_t out) {
  add_block(prefix + ".w", in, out);
  add_block(prefix + ".b", 1, out);
}

void Model::add_norm(const std::string& prefix, std::size_t width) {
  add_block(prefix + ".gamma", 1, width);
  add_block(prefix + ".beta", 1, width);
}

Model::Model(const Architecture& arch, std::uint64_t seed) : arch_(arch) {
  if (arch.input_width == 0 || arch.hidden == 0) throw std::invalid_argument("empty architecture");
  const std::size_t h = arch.hidden;
  const auto add_stack = [&](const std::string& prefix, bool gin) {
    for (std::size_t l = 0; l < arch.layers; ++l) {
      const std::size_t in = l == 0 ? arch.input_width : h;
      const std::string p = prefix + std::to_string(l);
      if (gin) {
        add_linear(p + ".lin1", in, h);
        if (arch.inner_norm) add_norm(p + ".norm1", h);
        add_linear(p + ".lin2", h, h);
      } else {
        add_linear(p + ".lin", in, h);
      }
      add_norm(p + ".norm", h);
    }
  };
  std::size_t head_in = h;
  switch (arch.variant) {
    case Variant::Gin: add_stack("gnn", true); break;
    case Variant::Gcn: add_stack("gnn", false); break;
    case Variant::Mlp: head_in = arch.input_width; break;
    case Variant::LinkPredictor:
      add_stack("sys", false);
      add_stack("tree", false);
      head_in = arch.multiply ? h : 2 * h;
      break;
  }
  add_linear("head.lin1", head_in, h);
  add_linear("head.lin2", h, 1);

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    const bool is_gamma = b.name.ends_with(".gamma");
    if (b.name.ends_with(".beta") || is_gamma) {
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(b.offset), b.rows * b.cols,
                  is_gamma ? 1.0 : 0.0);
      continue;
    }
    // Weights and their bias share fan_in = rows of the weight block.
    const std::size_t fan_in = b.name.ends_with(".w") ? b.rows : blocks_[i - 1].rows;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t k = 0; k < b.rows * b.cols; ++k) params_[b.offset + k] = u(rng);
  }
  // Running mean 0 and variance 1 per normalized layer.
  for (const Block& b : blocks_) {
    if (!b.name.ends_with(".gamma")) continue;
    running_.insert(running_.end(), b.cols, 0.0);
    running_.insert(running_.end(), b.cols, 1.0);
  }
}

const Block& Model::block(std::string_view name) const {
  for (const Block& b : blocks_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("no parameter block '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Forward and backward

namespace {

// Parameters and gradients live in Eigen-owned buffers so every block has the
// same alignment on every run; vectorized reductions depend on it.
struct Ctx {
  const Model& model;
  Eigen::VectorXd params;
  std::vector<double>* running;  // updated in train mode when non-null
  std::size_t running_cursor = 0;

  ConstMatrixMap mat(const std::string& name) const {
    const Block& b = model.block(name);
    return ConstMatrixMap(params.data() + b.offset, static_cast<Eigen::Index>(b.rows),
                          static_cast<Eigen::Index>(b.cols));
  }
  ConstRowMap row(const std::string& name) const {
    const Block& b = model.block(name);
    return ConstRowMap(params.data() + b.offset, static_cast<Eigen::Index>(b.cols));
  }
};

Matrix linear(const Matrix& x, const ConstMatrixMap& w, const ConstRowMap& b) {
  Matrix y = x * w;
  y.rowwise() += b;
  return y;
}

Matrix batch_norm(Ctx& c, const std::string& prefix, const Matrix& x, Mode mode, std::size_t norm_index,
                  Matrix* xhat_out, Eigen::RowVectorXd* inv_std_out) {
  const auto width = x.cols();
  const std::vector<double>& running = c.model.running();
  const std::size_t base = norm_index * 2 * static_cast<std::size_t>(width);
  Eigen::RowVectorXd mean, var;
  if (mode == Mode::Train) {
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().mean();
    if (c.running) {
      const double n = static_cast<double>(x.rows());
      const double unbias = n > 1 ? n / (n - 1) : 1.0;
      for (Eigen::Index j = 0; j < width; ++j) {
        double& rm = (*c.running)[base + j];
        double& rv = (*c.running)[base + width + j];
        rm = (1 - kMomentum) * rm + kMomentum * mean[j];
        rv = (1 - kMomentum) * rv + kMomentum * var[j] * unbias;
      }
    }
  } else {
    mean = ConstRowMap(running.data() + base, width);
    var = ConstRowMap(running.data() + base + width, width);
  }
  const Eigen::RowVectorXd inv_std = (var.array() + kNormEps).rsqrt();
  Matrix xhat = (x.rowwise() - mean).array().rowwise() * inv_std.array();
  Matrix y = xhat.array().rowwise() * c.row(prefix + ".gamma").array();
  y.rowwise() += c.row(prefix + ".beta");
  if (xhat_out) *xhat_out = std::move(xhat);
  if (inv_std_out) *inv_std_out = inv_std;
  return y;
}

Matrix run_stack(Ctx& c, const std::string& prefix, bool gin, const Matrix& x, const Sparse& op,
                 Mode mode, std::size_t& norm_index, StackTape* tape) {
  Matrix h = x;
  if (tape) tape->layers.assign(c.model.architecture().layers, {});
  for (std::size_t l = 0; l < c.model.architecture().layers; ++l) {
    const std::string p = prefix + std::to_string(l);
    LayerTape* lt = tape ? &tape->layers[l] : nullptr;
    Matrix agg = op * h;
    if (gin) agg += h;  // (1 + eps) h + sum of neighbours, eps = 0
    Matrix pre;
    if (gin) {
      Matrix z1 = linear(agg, c.mat(p + ".lin1.w"), c.row(p + ".lin1.b"));
      Matrix r1;
      if (c.model.architecture().inner_norm) {
        Matrix n1 = batch_norm(c, p + ".norm1", z1, mode, norm_index++, lt ? &lt->xhat1 : nullptr,
                               lt ? &lt->inv_std1 : nullptr);
        r1 = relu(n1);
        if (lt) lt->n1 = std::move(n1);
      } else {
        r1 = relu(z1);
      }
      pre = linear(r1, c.mat(p + ".lin2.w"), c.row(p + ".lin2.b"));
      if (lt) {
        lt->z1 = std::move(z1);
        lt->r1 = std::move(r1);
      }
    } else {
      pre = linear(agg, c.mat(p + ".lin.w"), c.row(p + ".lin.b"));
    }
    Matrix norm = batch_norm(c, p + ".norm", pre, mode, norm_index++, lt ? &lt->xhat : nullptr,
                             lt ? &lt->inv_std : nullptr);
    Matrix out = relu(norm);
    if (lt) {
      lt->input = std::move(h);
      lt->agg = std::move(agg);
      lt->norm = std::move(norm);
    }
    h = std::move(out);
  }
  if (tape) tape->output = h;
  return h;
}

struct Grad {
  const Model& model;
  Eigen::VectorXd g;

  MatrixMap mat(const std::string& name) {
    const Block& b = model.block(name);
    return MatrixMap(g.data() + b.offset, static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
  }
  RowMap row(const std::string& name) {
    const Block& b = model.block(name);
    return RowMap(g.data() + b.offset, static_cast<Eigen::Index>(b.cols));
  }
};

Matrix batch_norm_backward(Grad& gr, const Ctx& c, const std::string& prefix, const Matrix& dy,
                           const Matrix& xhat, const Eigen::RowVectorXd& inv_std) {
  const double n = static_cast<double>(dy.rows());
  gr.row(prefix + ".gamma") += (dy.array() * xhat.array()).colwise().sum().matrix();
  gr.row(prefix + ".beta") += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * c.row(prefix + ".gamma").array();
  const Eigen::RowVectorXd sum = dxhat.colwise().sum();
  const Eigen::RowVectorXd dot = (dxhat.array() * xhat.array()).colwise().sum();
  Matrix dx = (n * dxhat.array()).matrix();
  dx.rowwise() -= sum;
  dx -= (xhat.array().rowwise() * dot.array()).matrix();
  dx = dx.array().rowwise() * (inv_std.array() / n);
  return dx;
}

void stack_backward(Grad& gr, const Ctx& c, const std::string& prefix, bool gin, const Sparse& op,
                    const StackTape& tape, Matrix dh) {
  for (std::size_t l = tape.layers.size(); l-- > 0;) {
    const LayerTape& t = tape.layers[l];
    const std::string p = prefix + std::to_string(l);
    const Matrix dnorm = relu_backward(dh, t.norm);
    const Matrix dpre = batch_norm_backward(gr, c, p + ".norm", dnorm, t.xhat, t.inv_std);
    Matrix dagg;
    if (gin) {
      gr.mat(p + ".lin2.w").noalias() += t.r1.transpose() * dpre;
      gr.row(p + ".lin2.b") += dpre.colwise().sum();
      Matrix dz1;
      if (c.model.architecture().inner_norm) {
        const Matrix dn1 = relu_backward(dpre * c.mat(p + ".lin2.w").transpose(), t.n1);
        dz1 = batch_norm_backward(gr, c, p + ".norm1", dn1, t.xhat1, t.inv_std1);
      } else {
        dz1 = relu_backward(dpre * c.mat(p + ".lin2.w").transpose(), t.z1);
      }
      gr.mat(p + ".lin1.w").noalias() += t.agg.transpose() * dz1;
      gr.row(p + ".lin1.b") += dz1.colwise().sum();
      if (l == 0) return;
      dagg = dz1 * c.mat(p + ".lin1.w").transpose();
    } else {
      gr.mat(p + ".lin.w").noalias() += t.agg.transpose() * dpre;
      gr.row(p + ".lin.b") += dpre.colwise().sum();
      if (l == 0) return;
      dagg = dpre * c.mat(p + ".lin.w").transpose();
    }
    // Propagation operators are symmetric.
    dh = op * dagg;
    if (gin) dh += dagg;
  }
}

void add_to(std::vector<double>& out, const Eigen::VectorXd& g) {
  Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) += g;
}

Matrix gather_rows(const Matrix& x, const std::vector<std::uint32_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng) < rate ? 0.0 : keep;
  return m;
}

Vector run(const Model& model, std::vector<double>* running, const Batch& batch, Mode mode,
           double dropout, std::mt19937_64* rng, Tape* tape) {
  const Architecture& arch = model.architecture();
  if (static_cast<std::size_t>(batch.x.cols()) != arch.input_width) {
    throw std::invalid_argument("feature width does not match the model");
  }
  Ctx c{model, Eigen::Map<const Eigen::VectorXd>(model.params().data(), static_cast<Eigen::Index>(model.params().size())),
        mode == Mode::Train ? running : nullptr};
  std::size_t norm_index = 0;
  Matrix pooled;
  switch (arch.variant) {
    case Variant::Gin:
    case Variant::Gcn: {
      const bool gin = arch.variant == Variant::Gin;
      const Matrix h = run_stack(c, "gnn", gin, batch.x, gin ? batch.adjacency : batch.normalized, mode,
                                 norm_index, tape ? &tape->main : nullptr);
      pooled = mean_pool(h, batch.offsets);
      break;
    }
    case Variant::Mlp:
      pooled = mean_pool(batch.x, batch.offsets);
      break;
    case Variant::LinkPredictor: {
      const Matrix hs = run_stack(c, "sys", false, gather_rows(batch.x, batch.system_nodes),
                                  batch.system_normalized, mode, norm_index, tape ? &tape->sys : nullptr);
      const Matrix ht = run_stack(c, "tree", false, gather_rows(batch.x, batch.tree_nodes),
                                  batch.tree_normalized, mode, norm_index, tape ? &tape->tree : nullptr);
      Matrix ps = mean_pool(hs, batch.system_offsets);
      Matrix pt = mean_pool(ht, batch.tree_offsets);
      if (arch.multiply) {
        pooled = ps.cwiseProduct(pt);
      } else {
        pooled.resize(ps.rows(), ps.cols() + pt.cols());
        pooled << ps, pt;
      }
      if (tape) {
        tape->sys_pooled = std::move(ps);
        tape->tree_pooled = std::move(pt);
      }
      break;
    }
  }
  const bool drop = mode == Mode::Train && dropout > 0.0;
  if (drop && rng == nullptr) throw std::invalid_argument("dropout needs a random generator");
  Matrix in1 = pooled;
  Matrix mask1, mask2;
  if (drop) {
    mask1 = dropout_mask(in1.rows(), in1.cols(), dropout, *rng);
    in1 = in1.cwiseProduct(mask1);
  }
  Matrix y1 = linear(in1, c.mat("head.lin1.w"), c.row("head.lin1.b"));
  Matrix hidden = relu(y1);
  if (drop) {
    mask2 = dropout_mask(hidden.rows(), hidden.cols(), dropout, *rng);
    hidden = hidden.cwiseProduct(mask2);
  }
  const Matrix logits = linear(hidden, c.mat("head.lin2.w"), c.row("head.lin2.b"));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!std::isfinite(logits(i, 0))) throw std::domain_error("non-finite activation");
  }
  if (tape) {
    tape->mode = mode;
    tape->batch = &batch;
    tape->pooled = std::move(pooled);
    tape->mask1 = std::move(mask1);
    tape->mask2 = std::move(mask2);
    tape->y1 = std::move(y1);
    tape->hidden = std::move(hidden);
  }
  return logits.col(0);
}

}  // namespace

Vector Model::forward(const Batch& batch, Mode mode, double dropout, std::mt19937_64* rng, Tape* tape) {
  return run(*this, &running_, batch, mode, dropout, rng, tape);
}

Vector Model::logits(const Batch& batch) const {
  return run(*this, nullptr, batch, Mode::Eval, 0.0, nullptr, nullptr);
}

Vector Model::predict(const Batch& batch) const {
  return logits(batch).unaryExpr([](double v) { return sigmoid(v); });
}

void Model::backward(const Tape& tape, const Vector& dlogits, std::vector<double>& grad) const {
  if (tape.mode != Mode::Train || tape.batch == nullptr) {
    throw std::invalid_argument("backward needs a training-mode tape");
  }
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  const Batch& batch = *tape.batch;
  Ctx c{*this, Eigen::Map<const Eigen::VectorXd>(params_.data(), static_cast<Eigen::Index>(params_.size())), nullptr};
  Grad gr{*this, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params_.size()))};
  // Head.
  const Matrix dlog = dlogits;  // graphs x 1
  gr.mat("head.lin2.w").noalias() += tape.hidden.transpose() * dlog;
  gr.row("head.lin2.b") += dlog.colwise().sum();
  Matrix dhidden = dlog * c.mat("head.lin2.w").transpose();
  if (tape.mask2.size()) dhidden = dhidden.cwiseProduct(tape.mask2);
  const Matrix dy1 = relu_backward(dhidden, tape.y1);
  Matrix in1 = tape.pooled;
  if (tape.mask1.size()) in1 = in1.cwiseProduct(tape.mask1);
  gr.mat("head.lin1.w").noalias() += in1.transpose() * dy1;
  gr.row("head.lin1.b") += dy1.colwise().sum();
  if (arch_.variant == Variant::Mlp) {
    add_to(grad, gr.g);
    return;
  }
  Matrix dpooled = dy1 * c.mat("head.lin1.w").transpose();
  if (tape.mask1.size()) dpooled = dpooled.cwiseProduct(tape.mask1);

  switch (arch_.variant) {
    case Variant::Gin:
    case Variant::Gcn: {
      const bool gin = arch_.variant == Variant::Gin;
      stack_backward(gr, c, "gnn", gin, gin ? batch.adjacency : batch.normalized, tape.main,
                     mean_pool_backward(dpooled, batch.offsets));
      break;
    }
    case Variant::LinkPredictor: {
      Matrix ds, dt;
      if (arch_.multiply) {
        ds = dpooled.cwiseProduct(tape.tree_pooled);
        dt = dpooled.cwiseProduct(tape.sys_pooled);
      } else {
        const auto h = static_cast<Eigen::Index>(arch_.hidden);
        ds = dpooled.leftCols(h);
        dt = dpooled.rightCols(h);
      }
      stack_backward(gr, c, "sys", false, batch.system_normalized, tape.sys,
                     mean_pool_backward(ds, batch.system_offsets));
      stack_backward(gr, c, "tree", false, batch.tree_normalized, tape.tree,
                     mean_pool_backward(dt, batch.tree_offsets));
      break;
    }
    case Variant::Mlp:
      break;
  }
  add_to(grad, gr.g);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logits(const Vector& logits, const Vector& labels, Vector* dlogits) {
  const auto n = static_cast<double>(logits.size());
  double loss = 0.0;
  if (dlogits) dlogits->resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits[i], y = labels[i];
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    if (dlogits) (*dlogits)[i] = (sigmoid(z) - y) / n;
  }
  return loss / n;
}

// ---------------------------------------------------------------------------
// Finite-difference check

namespace {

// Sign pattern of every ReLU input, used to detect kinks.
std::vector<char> relu_signature(const Tape& t) {
  std::vector<char> sig;
  const auto add = [&](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) sig.push_back(m.data()[i] > 0.0);
  };
  for (const StackTape* s : {&t.main, &t.sys, &t.tree}) {
    for (const LayerTape& l : s->layers) {
      add(l.n1.size() ? l.n1 : l.z1);
      add(l.norm);
    }
  }
  add(t.y1);
  return sig;
}

}  // namespace

GradCheckReport grad_check(Model& model, const Batch& batch, std::size_t coordinates, std::uint64_t seed) {
  constexpr double h = 1e-4;
  const std::vector<double> running = model.running();
  Tape tape;
  const Vector logits = model.forward(batch, Mode::Train, 0.0, nullptr, &tape);
  Vector dlogits;
  bce_with_logits(logits, batch.labels, &dlogits);
  std::vector<double> grad(model.params().size(), 0.0);
  model.backward(tape, dlogits, grad);
  const std::vector<char> base = relu_signature(tape);

  const auto loss_at = [&](std::size_t k, double value, std::vector<char>* sig) {
    const double saved = model.params()[k];
    model.params()[k] = value;
    Tape t;
    const double loss = bce_with_logits(model.forward(batch, Mode::Train, 0.0, nullptr, &t), batch.labels, nullptr);
    *sig = relu_signature(t);
    model.params()[k] = saved;
    return loss;
  };

  GradCheckReport report;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, model.params().size() - 1);
  std::size_t draws = 0;
  while (report.checked < coordinates && draws++ < coordinates * 20) {
    const std::size_t k = pick(rng);
    const double w = model.params()[k];
    std::vector<char> sig_plus, sig_minus;
    const double up = loss_at(k, w + h, &sig_plus);
    const double down = loss_at(k, w - h, &sig_minus);
    if (sig_plus != base || sig_minus != base) {
      ++report.skipped_kinks;
      continue;
    }
    const double numeric = (up - down) / (2 * h);
    const double analytic = grad[k];
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(numeric - analytic) / scale);
    ++report.checked;
  }
  model.running() = running;
  return report;
}

}  // namespace octal::nn
