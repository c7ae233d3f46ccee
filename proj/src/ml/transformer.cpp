#include "sentinel/ml/transformer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sentinel::ml {

namespace {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RVec = Eigen::RowVectorXd;
using CMap = Eigen::Map<const RMat>;
using MMap = Eigen::Map<RMat>;
using CVMap = Eigen::Map<const RVec>;
using MVMap = Eigen::Map<RVec>;

constexpr double kLnEps = 1e-5;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LnCache {
  RMat xhat;
  Eigen::VectorXd inv_sigma;
};

RMat layer_norm(const RMat& x, const RVec& g, const RVec& b, LnCache& c) {
  const auto L = x.rows();
  c.xhat.resize(L, x.cols());
  c.inv_sigma.resize(L);
  for (Eigen::Index i = 0; i < L; ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().mean();
    c.inv_sigma[i] = 1.0 / std::sqrt(var + kLnEps);
    c.xhat.row(i) = (x.row(i).array() - mu) * c.inv_sigma[i];
  }
  RMat y = c.xhat.array().rowwise() * g.array();
  y.rowwise() += b;
  return y;
}

RMat layer_norm_backward(const RMat& dy, const RVec& g, const LnCache& c, MVMap dg, MVMap db) {
  dg += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  db += dy.colwise().sum();
  RMat dxhat = dy.array().rowwise() * g.array();
  RMat dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double m1 = dxhat.row(i).mean();
    const double m2 = (dxhat.row(i).array() * c.xhat.row(i).array()).mean();
    dx.row(i) = c.inv_sigma[i] * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
  }
  return dx;
}

RMat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng* rng) {
  RMat m = RMat::Ones(rows, cols);
  if (!rng || p <= 0) return m;
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng->uniform() < p ? 0.0 : keep;
  return m;
}

struct LayerCache {
  RMat x, q, k, v;
  std::vector<RMat> attn;  ///< per head, L x L
  RMat ocat, d1, x1, h, hr, d2;
  LnCache ln1, ln2;
};

}  // namespace

void TransformerConfig::validate() const {
  if (vocab_size < 3) throw std::invalid_argument("transformer: vocab_size must include the reserved tokens");
  if (d_model == 0 || heads == 0 || d_model % heads != 0)
    throw std::invalid_argument("transformer: d_model must be a positive multiple of heads");
  if (layers == 0 || d_ff == 0 || max_length < 2) throw std::invalid_argument("transformer: bad layer sizes");
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("transformer: dropout must lie in [0,1)");
  if (batch_size == 0) throw std::invalid_argument("transformer: batch_size must be positive");
}

std::size_t TransformerModel::reserve(const std::string& name, std::size_t rows, std::size_t cols) {
  const std::size_t off = theta_.size();
  blocks_.push_back({name, off, rows, cols});
  theta_.resize(off + rows * cols, 0.0);
  return off;
}

void TransformerModel::build_layout() {
  const auto d = cfg_.d_model, f = cfg_.d_ff;
  theta_.clear();
  blocks_.clear();
  layer_.clear();
  emb_ = reserve("embedding", cfg_.vocab_size, d);
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const auto p = "layer" + std::to_string(l) + ".";
    LayerOffsets o{};
    o.wq = reserve(p + "wq", d, d);
    o.wk = reserve(p + "wk", d, d);
    o.wv = reserve(p + "wv", d, d);
    o.wo = reserve(p + "wo", d, d);
    o.bq = reserve(p + "bq", 1, d);
    o.bk = reserve(p + "bk", 1, d);
    o.bv = reserve(p + "bv", 1, d);
    o.bo = reserve(p + "bo", 1, d);
    o.g1 = reserve(p + "ln1.gamma", 1, d);
    o.be1 = reserve(p + "ln1.beta", 1, d);
    o.w1 = reserve(p + "ff.w1", d, f);
    o.b1 = reserve(p + "ff.b1", 1, f);
    o.w2 = reserve(p + "ff.w2", f, d);
    o.b2 = reserve(p + "ff.b2", 1, d);
    o.g2 = reserve(p + "ln2.gamma", 1, d);
    o.be2 = reserve(p + "ln2.beta", 1, d);
    layer_.push_back(o);
  }
  wh_ = reserve("head.w", d, d);
  bh_ = reserve("head.b", 1, d);
  wout_ = reserve("out.w", 1, d);
  bout_ = reserve("out.b", 1, 1);

  positions_.assign(cfg_.max_length * d, 0.0);
  for (std::size_t pos = 0; pos < cfg_.max_length; ++pos)
    for (std::size_t i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(d));
      positions_[pos * d + i] = i % 2 == 0 ? std::sin(pos * rate) : std::cos(pos * rate);
    }
}

TransformerModel::TransformerModel(const TransformerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  build_layout();
  Rng rng(cfg_.seed);
  for (const auto& b : blocks_) {
    const bool is_gamma = b.name.find("gamma") != std::string::npos;
    const bool is_bias = b.rows == 1 && !is_gamma && b.name != "out.w";
    double* p = theta_.data() + b.offset;
    const std::size_t n = b.rows * b.cols;
    if (is_gamma) {
      std::fill(p, p + n, 1.0);
    } else if (is_bias) {
      std::fill(p, p + n, 0.0);
    } else if (b.name == "embedding") {
      for (std::size_t i = 0; i < n; ++i) p[i] = rng.normal(0.0, 0.1);
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(b.rows + b.cols));
      for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(-limit, limit);
    }
  }
}

// label -1 asks forward_backward for the raw logit
double TransformerModel::logit(std::span<const TokenId> ids) const {
  return forward_backward(ids, -1, 1.0, nullptr, nullptr);
}

double TransformerModel::predict_proba(std::span<const TokenId> ids) const { return sigmoid(logit(ids)); }

double TransformerModel::example_loss(std::span<const TokenId> ids, int label, double weight, std::vector<double>* grad,
                                      Rng* dropout_rng) const {
  if (label != 0 && label != 1) throw std::invalid_argument("transformer: label must be 0 or 1");
  if (grad && grad->size() != theta_.size()) grad->assign(theta_.size(), 0.0);
  return forward_backward(ids, label, weight, grad, dropout_rng);
}

double TransformerModel::forward_backward(std::span<const TokenId> ids_in, int label, double weight,
                                          std::vector<double>* grad, Rng* rng) const {
  const auto d = static_cast<Eigen::Index>(cfg_.d_model);
  const auto dk = d / static_cast<Eigen::Index>(cfg_.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  const double p_drop = rng ? cfg_.dropout : 0.0;

  // trailing PAD carries no information; drop it before the quadratic part
  std::size_t len = std::min(ids_in.size(), cfg_.max_length);
  while (len > 0 && ids_in[len - 1] == kPad) --len;
  if (len == 0) throw std::invalid_argument("transformer: empty sequence");
  const auto L = static_cast<Eigen::Index>(len);
  std::vector<TokenId> ids(ids_in.begin(), ids_in.begin() + static_cast<std::ptrdiff_t>(len));
  for (auto t : ids)
    if (t >= cfg_.vocab_size) throw std::out_of_range("transformer: token id outside vocabulary");
  std::vector<char> keep(len);
  double n_keep = 0;
  for (std::size_t j = 0; j < len; ++j) {
    keep[j] = ids[j] != kPad;
    n_keep += keep[j];
  }
  if (n_keep == 0) throw std::invalid_argument("transformer: sequence holds only PAD");

  auto M = [&](std::size_t off, Eigen::Index r, Eigen::Index c) { return CMap(theta_.data() + off, r, c); };
  auto V = [&](std::size_t off, Eigen::Index n) { return CVMap(theta_.data() + off, n); };

  RMat x(L, d);
  for (Eigen::Index j = 0; j < L; ++j)
    x.row(j) = M(emb_, static_cast<Eigen::Index>(cfg_.vocab_size), d).row(ids[static_cast<std::size_t>(j)]) +
               CVMap(positions_.data() + j * d, d);

  std::vector<LayerCache> caches(cfg_.layers);
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const auto& o = layer_[l];
    auto& c = caches[l];
    c.x = x;
    c.q = (x * M(o.wq, d, d)).rowwise() + V(o.bq, d);
    c.k = (x * M(o.wk, d, d)).rowwise() + V(o.bk, d);
    c.v = (x * M(o.wv, d, d)).rowwise() + V(o.bv, d);
    c.ocat.resize(L, d);
    c.attn.resize(cfg_.heads);
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      const auto c0 = static_cast<Eigen::Index>(h) * dk;
      RMat s = c.q.middleCols(c0, dk) * c.k.middleCols(c0, dk).transpose() * scale;
      for (Eigen::Index i = 0; i < L; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < L; ++j)
          if (keep[static_cast<std::size_t>(j)]) mx = std::max(mx, s(i, j));
        double sum = 0;
        for (Eigen::Index j = 0; j < L; ++j) {
          s(i, j) = keep[static_cast<std::size_t>(j)] ? std::exp(s(i, j) - mx) : 0.0;
          sum += s(i, j);
        }
        s.row(i) /= sum;
      }
      c.ocat.middleCols(c0, dk) = s * c.v.middleCols(c0, dk);
      c.attn[h] = std::move(s);
    }
    RMat att = (c.ocat * M(o.wo, d, d)).rowwise() + V(o.bo, d);
    c.d1 = dropout_mask(L, d, p_drop, rng);
    RMat r1 = x + att.cwiseProduct(c.d1);
    c.x1 = layer_norm(r1, V(o.g1, d), V(o.be1, d), c.ln1);
    const auto f = static_cast<Eigen::Index>(cfg_.d_ff);
    c.h = (c.x1 * M(o.w1, d, f)).rowwise() + V(o.b1, f);
    c.hr = c.h.cwiseMax(0.0);
    RMat ff = (c.hr * M(o.w2, f, d)).rowwise() + V(o.b2, d);
    c.d2 = dropout_mask(L, d, p_drop, rng);
    RMat r2 = c.x1 + ff.cwiseProduct(c.d2);
    x = layer_norm(r2, V(o.g2, d), V(o.be2, d), c.ln2);
  }

  RVec pooled = RVec::Zero(d);
  for (Eigen::Index j = 0; j < L; ++j)
    if (keep[static_cast<std::size_t>(j)]) pooled += x.row(j);
  pooled /= n_keep;
  RVec z = pooled * M(wh_, d, d) + V(bh_, d);
  RVec a = z.cwiseMax(0.0);
  RMat d3 = dropout_mask(1, d, p_drop, rng);
  RVec ad = a.cwiseProduct(RVec(d3.row(0)));
  const double lg = ad.dot(V(wout_, d)) + theta_[bout_];
  if (label < 0) return lg;

  const double loss = weight * (softplus(lg) - label * lg);
  if (!grad) return loss;

  auto& G = *grad;
  auto GM = [&](std::size_t off, Eigen::Index r, Eigen::Index c) { return MMap(G.data() + off, r, c); };
  auto GV = [&](std::size_t off, Eigen::Index n) { return MVMap(G.data() + off, n); };

  const double dlg = weight * (sigmoid(lg) - label);
  GV(wout_, d) += dlg * ad;
  G[bout_] += dlg;
  RVec dz = (dlg * V(wout_, d)).cwiseProduct(RVec(d3.row(0)));
  for (Eigen::Index i = 0; i < d; ++i)
    if (z[i] <= 0) dz[i] = 0;
  GM(wh_, d, d) += pooled.transpose() * dz;
  GV(bh_, d) += dz;
  RVec dpooled = dz * M(wh_, d, d).transpose();
  RMat dx = RMat::Zero(L, d);
  for (Eigen::Index j = 0; j < L; ++j)
    if (keep[static_cast<std::size_t>(j)]) dx.row(j) = dpooled / n_keep;

  for (std::size_t li = cfg_.layers; li-- > 0;) {
    const auto& o = layer_[li];
    const auto& c = caches[li];
    const auto f = static_cast<Eigen::Index>(cfg_.d_ff);
    RMat dr2 = layer_norm_backward(dx, V(o.g2, d), c.ln2, GV(o.g2, d), GV(o.be2, d));
    RMat dff = dr2.cwiseProduct(c.d2);
    GM(o.w2, f, d) += c.hr.transpose() * dff;
    GV(o.b2, d) += dff.colwise().sum();
    RMat dh = dff * M(o.w2, f, d).transpose();
    dh = dh.cwiseProduct((c.h.array() > 0).cast<double>().matrix());
    GM(o.w1, d, f) += c.x1.transpose() * dh;
    GV(o.b1, f) += dh.colwise().sum();
    RMat dx1 = dr2 + dh * M(o.w1, d, f).transpose();
    RMat dr1 = layer_norm_backward(dx1, V(o.g1, d), c.ln1, GV(o.g1, d), GV(o.be1, d));
    RMat datt = dr1.cwiseProduct(c.d1);
    GM(o.wo, d, d) += c.ocat.transpose() * datt;
    GV(o.bo, d) += datt.colwise().sum();
    RMat docat = datt * M(o.wo, d, d).transpose();
    RMat dq(L, d), dk_(L, d), dv(L, d);
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      const auto c0 = static_cast<Eigen::Index>(h) * dk;
      const RMat& A = c.attn[h];
      RMat dO = docat.middleCols(c0, dk);
      RMat dA = dO * c.v.middleCols(c0, dk).transpose();
      dv.middleCols(c0, dk) = A.transpose() * dO;
      Eigen::VectorXd rs = (dA.array() * A.array()).rowwise().sum();
      RMat dS = A.array() * (dA.colwise() - rs).array();
      dq.middleCols(c0, dk) = dS * c.k.middleCols(c0, dk) * scale;
      dk_.middleCols(c0, dk) = dS.transpose() * c.q.middleCols(c0, dk) * scale;
    }
    GM(o.wq, d, d) += c.x.transpose() * dq;
    GM(o.wk, d, d) += c.x.transpose() * dk_;
    GM(o.wv, d, d) += c.x.transpose() * dv;
    GV(o.bq, d) += dq.colwise().sum();
    GV(o.bk, d) += dk_.colwise().sum();
    GV(o.bv, d) += dv.colwise().sum();
    dx = dr1 + dq * M(o.wq, d, d).transpose() + dk_ * M(o.wk, d, d).transpose() + dv * M(o.wv, d, d).transpose();
  }
  auto gemb = GM(emb_, static_cast<Eigen::Index>(cfg_.vocab_size), d);
  for (Eigen::Index j = 0; j < L; ++j) gemb.row(ids[static_cast<std::size_t>(j)]) += dx.row(j);
  return loss;
}

void TransformerModel::save(BinaryWriter& w) const {
  w.u64(cfg_.vocab_size);
  w.u64(cfg_.d_model);
  w.u64(cfg_.heads);
  w.u64(cfg_.layers);
  w.u64(cfg_.d_ff);
  w.u64(cfg_.max_length);
  w.f64(cfg_.dropout);
  w.f64s(theta_);
}

TransformerModel TransformerModel::load(BinaryReader& r) {
  TransformerConfig cfg;
  cfg.vocab_size = r.u64();
  cfg.d_model = r.u64();
  cfg.heads = r.u64();
  cfg.layers = r.u64();
  cfg.d_ff = r.u64();
  cfg.max_length = r.u64();
  cfg.dropout = r.f64();
  if (cfg.vocab_size > (1u << 24) || cfg.d_model > 4096 || cfg.layers > 64 || cfg.d_ff > 65536 ||
      cfg.max_length > (1u << 20))
    throw std::runtime_error("transformer: configuration out of range");
  TransformerModel m(cfg);
  auto theta = r.f64s();
  if (theta.size() != m.theta_.size()) throw std::runtime_error("transformer: parameter count does not match shapes");
  m.theta_ = std::move(theta);
  return m;
}

TransformerModel train_transformer(const std::vector<LabeledSequence>& train, const std::vector<LabeledSequence>& valid,
                                   const TransformerConfig& cfg, TrainingLog* log) {
  std::size_t pos = 0;
  for (const auto& s : train) {
    if (s.label != 0 && s.label != 1) throw std::invalid_argument("transformer: labels must be 0 or 1");
    pos += static_cast<std::size_t>(s.label);
  }
  if (pos == 0 || pos == train.size()) throw std::invalid_argument("transformer: training set holds a single class");

  TransformerModel model(cfg);
  const double n = static_cast<double>(train.size());
  double w[2] = {1.0, 1.0};
  if (cfg.class_weighting) {
    w[0] = n / (2.0 * static_cast<double>(train.size() - pos));
    w[1] = n / (2.0 * static_cast<double>(pos));
  }

  auto mean_loss = [&](const std::vector<LabeledSequence>& set) {
    double s = 0;
    for (const auto& e : set) s += model.example_loss(e.ids, e.label, 1.0, nullptr, nullptr);
    return s / static_cast<double>(set.size());
  };

  const std::size_t P = model.parameter_count();
  std::vector<double> m1(P, 0.0), m2(P, 0.0), grad(P, 0.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::size_t step = 0;
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Rng drop_rng(cfg.seed + 1);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> best = model.parameters();
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  TrainingLog local;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto& e = train[order[i]];
        epoch_loss += model.example_loss(e.ids, e.label, w[e.label], &grad, cfg.dropout > 0 ? &drop_rng : nullptr);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      double norm = 0;
      for (auto& g : grad) {
        g *= inv;
        norm += g * g;
      }
      norm = std::sqrt(norm);
      const double clip = cfg.clip_norm > 0 && norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      auto& theta = model.parameters();
      for (std::size_t k = 0; k < P; ++k) {
        const double g = grad[k] * clip;
        m1[k] = b1 * m1[k] + (1 - b1) * g;
        m2[k] = b2 * m2[k] + (1 - b2) * g * g;
        theta[k] -= cfg.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
      }
    }
    local.train_loss.push_back(epoch_loss / n);
    const double vl = valid.empty() ? mean_loss(train) : mean_loss(valid);
    local.valid_loss.push_back(vl);
    local.epochs_run = epoch + 1;
    if (vl < best_loss - 1e-12) {
      best_loss = vl;
      best = model.parameters();
      local.best_epoch = epoch + 1;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.parameters() = best;
  if (log) *log = std::move(local);
  return model;
}

}  // namespace sentinel::ml
