#include "sentinel/ml/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sentinel/common/rng.hpp"

namespace sentinel::ml {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {
// log(1 + exp(z))
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_dim(const Vector& x, std::size_t dim) {
  if (static_cast<std::size_t>(x.size()) != dim)
    throw std::invalid_argument("classifier: expected " + std::to_string(dim) + " inputs, got " +
                                std::to_string(x.size()));
}
}  // namespace

Vector Classifier::predict_proba(const Matrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_proba(Vector(X.row(i).transpose()));
  return out;
}

void Classifier::save(BinaryWriter& w) const {
  w.str(kind());
  save_body(w);
}

std::unique_ptr<Classifier> load_classifier(BinaryReader& r) {
  const auto k = r.str();
  if (k == "LR") return std::make_unique<LogisticRegression>(LogisticRegression::load_body(r));
  if (k == "DT") return std::make_unique<DecisionTree>(DecisionTree::load_body(r));
  if (k == "RF") return std::make_unique<RandomForest>(RandomForest::load_body(r));
  if (k == "GBT") return std::make_unique<GradientBoostedTrees>(GradientBoostedTrees::load_body(r));
  if (k == "KNN") return std::make_unique<KNearestNeighbors>(KNearestNeighbors::load_body(r));
  if (k == "SVM") return std::make_unique<LinearSvm>(LinearSvm::load_body(r));
  throw std::runtime_error("unknown classifier kind: " + k);
}

void check_training_set(const Matrix& X, const std::vector<int>& y) {
  if (X.rows() == 0) throw std::invalid_argument("training set is empty");
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw std::invalid_argument("one label per row required");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == 0) neg = true;
    else throw std::invalid_argument("labels must be 0 or 1");
  }
  if (!pos || !neg) throw std::invalid_argument("training set holds a single class");
}

// ---- LR ----

double LogisticRegression::loss(const Matrix& X, const std::vector<int>& y, const Vector& theta, double l2,
                                Vector* grad) {
  const auto d = X.cols();
  if (theta.size() != d + 1) throw std::invalid_argument("theta size must be dim + 1");
  const auto n = static_cast<double>(X.rows());
  const auto w = theta.head(d);
  const double b = theta[d];
  const Vector z = (X * w).array() + b;
  double total = 0;
  Vector resid(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    // -[y log s(z) + (1-y) log(1-s(z))] = softplus(z) - y z
    total += softplus(z[i]) - y[i] * z[i];
    resid[i] = sigmoid(z[i]) - y[i];
  }
  const double value = total / n + 0.5 * l2 * w.squaredNorm();
  if (grad) {
    grad->resize(d + 1);
    grad->head(d) = X.transpose() * resid / n + l2 * w;
    (*grad)[d] = resid.sum() / n;
  }
  return value;
}

LogisticRegression LogisticRegression::fit(const Matrix& X, const std::vector<int>& y, const LogisticParams& p) {
  check_training_set(X, y);
  const auto d = X.cols();
  Vector theta = Vector::Zero(d + 1);
  Vector grad;
  for (std::size_t it = 0; it < p.iterations; ++it) {
    loss(X, y, theta, p.l2, &grad);
    theta -= p.learning_rate * grad;
  }
  return LogisticRegression(theta.head(d), theta[d]);
}

double LogisticRegression::predict_proba(const Vector& x) const {
  check_dim(x, input_dimension());
  return sigmoid(w_.dot(x) + b_);
}

void LogisticRegression::save_body(BinaryWriter& w) const {
  w.f64s(std::span<const double>(w_.data(), static_cast<std::size_t>(w_.size())));
  w.f64(b_);
}

LogisticRegression LogisticRegression::load_body(BinaryReader& r) {
  const auto v = r.f64s();
  const double b = r.f64();
  return LogisticRegression(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())), b);
}

// ---- DT ----

DecisionTree DecisionTree::fit(const Matrix& X, const std::vector<int>& y, const TreeParams& p) {
  check_training_set(X, y);
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  return DecisionTree(build_gini_tree(X, y, rows, p), static_cast<std::size_t>(X.cols()));
}

void DecisionTree::save_body(BinaryWriter& w) const {
  w.u64(dim_);
  tree_.save(w);
}

DecisionTree DecisionTree::load_body(BinaryReader& r) {
  const auto dim = r.u64();
  return DecisionTree(Tree::load(r), dim);
}

// ---- RF ----

RandomForest RandomForest::fit(const Matrix& X, const std::vector<int>& y, const ForestParams& p) {
  check_training_set(X, y);
  if (p.trees == 0) throw std::invalid_argument("random forest needs at least one tree");
  const auto n = y.size();
  const auto d = static_cast<std::size_t>(X.cols());
  std::size_t m = p.max_features;
  if (p.all_features) m = d;
  else if (m == 0) m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(double(d)))));
  RandomForest f;
  f.dim_ = d;
  Rng rng(p.seed);
  for (std::size_t t = 0; t < p.trees; ++t) {
    std::vector<std::size_t> rows(n);
    if (p.bootstrap) {
      for (auto& r : rows) r = rng.index(n);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeParams tp;
    tp.max_depth = p.max_depth;
    tp.min_samples_leaf = p.min_samples_leaf;
    tp.max_features = m;
    tp.seed = rng.next_u64();
    f.trees_.push_back(build_gini_tree(X, y, rows, tp));
  }
  return f;
}

double RandomForest::predict_proba(const Vector& x) const {
  check_dim(x, dim_);
  double s = 0;
  for (const auto& t : trees_) s += t.eval(x);
  return s / static_cast<double>(trees_.size());
}

void RandomForest::save_body(BinaryWriter& w) const {
  w.u64(dim_);
  w.u64(trees_.size());
  for (const auto& t : trees_) t.save(w);
}

RandomForest RandomForest::load_body(BinaryReader& r) {
  RandomForest f;
  f.dim_ = r.u64();
  const auto n = r.u64();
  if (n == 0 || n > 100000) throw std::runtime_error("random forest: tree count out of range");
  for (std::uint64_t i = 0; i < n; ++i) f.trees_.push_back(Tree::load(r));
  return f;
}

// ---- GBT ----

GradientBoostedTrees GradientBoostedTrees::fit(const Matrix& X, const std::vector<int>& y, const BoostingParams& p) {
  check_training_set(X, y);
  const auto n = y.size();
  GradientBoostedTrees m;
  m.dim_ = static_cast<std::size_t>(X.cols());
  m.shrinkage_ = p.shrinkage;
  std::vector<double> F(n, 0.0), g(n), h(n);
  for (std::size_t round = 0; round < p.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = sigmoid(F[i]);
      g[i] = prob - y[i];
      h[i] = std::max(prob * (1 - prob), 1e-12);
    }
    Tree t = build_gradient_tree(X, g, h, p.tree);
    for (std::size_t i = 0; i < n; ++i) F[i] += p.shrinkage * t.eval(Vector(X.row(static_cast<Eigen::Index>(i)).transpose()));
    m.trees_.push_back(std::move(t));
  }
  return m;
}

double GradientBoostedTrees::margin(const Vector& x) const {
  check_dim(x, dim_);
  double f = 0;
  for (const auto& t : trees_) f += shrinkage_ * t.eval(x);
  return f;
}

double GradientBoostedTrees::predict_proba(const Vector& x) const { return sigmoid(margin(x)); }

void GradientBoostedTrees::save_body(BinaryWriter& w) const {
  w.u64(dim_);
  w.f64(shrinkage_);
  w.u64(trees_.size());
  for (const auto& t : trees_) t.save(w);
}

GradientBoostedTrees GradientBoostedTrees::load_body(BinaryReader& r) {
  GradientBoostedTrees m;
  m.dim_ = r.u64();
  m.shrinkage_ = r.f64();
  const auto n = r.u64();
  if (n > 100000) throw std::runtime_error("boosting: tree count out of range");
  for (std::uint64_t i = 0; i < n; ++i) m.trees_.push_back(Tree::load(r));
  return m;
}

// ---- KNN ----

KNearestNeighbors KNearestNeighbors::fit(const Matrix& X, const std::vector<int>& y, std::size_t k) {
  check_training_set(X, y);
  if (k == 0) throw std::invalid_argument("knn: k must be positive");
  KNearestNeighbors m;
  m.X_ = X;
  m.y_ = y;
  m.k_ = k;
  return m;
}

double KNearestNeighbors::predict_proba(const Vector& x) const {
  check_dim(x, input_dimension());
  const auto n = static_cast<std::size_t>(X_.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i)
    dist[i] = {(X_.row(static_cast<Eigen::Index>(i)).transpose() - x).norm(), i};
  const auto k = std::min(k_, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) pos += static_cast<std::size_t>(y_[dist[i].second]);
  const double share = static_cast<double>(pos) / static_cast<double>(k);
  if (2 * pos != k) return share;
  double wp = 0, wt = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = 1.0 / (dist[i].first + 1e-12);
    wt += w;
    if (y_[dist[i].second] == 1) wp += w;
  }
  const double weighted = wp / wt;
  if (weighted != 0.5) return weighted;
  return y_[dist[0].second] == 1 ? 1.0 : 0.0;
}

void KNearestNeighbors::save_body(BinaryWriter& w) const {
  w.u64(k_);
  w.u64(static_cast<std::uint64_t>(X_.rows()));
  w.u64(static_cast<std::uint64_t>(X_.cols()));
  for (Eigen::Index i = 0; i < X_.rows(); ++i) {
    for (Eigen::Index j = 0; j < X_.cols(); ++j) w.f64(X_(i, j));
    w.u32(static_cast<std::uint32_t>(y_[static_cast<std::size_t>(i)]));
  }
}

KNearestNeighbors KNearestNeighbors::load_body(BinaryReader& r) {
  KNearestNeighbors m;
  m.k_ = r.u64();
  const auto rows = r.u64(), cols = r.u64();
  if (rows > (1u << 24) || cols > 4096) throw std::runtime_error("knn: shape out of range");
  m.X_.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.y_.resize(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint64_t j = 0; j < cols; ++j) m.X_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.f64();
    m.y_[i] = static_cast<int>(r.u32());
  }
  return m;
}

// ---- SVM ----

LinearSvm LinearSvm::fit(const Matrix& X, const std::vector<int>& y, const SvmParams& p) {
  check_training_set(X, y);
  const auto n = X.rows();
  const auto d = X.cols();
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  Vector w = Vector::Zero(d);
  double b = 0;
  LinearSvm best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= p.iterations; ++it) {
    const Vector margin = s.cwiseProduct(((X * w).array() + b).matrix());
    double hinge = 0;
    Vector gw = p.lambda * w;
    double gb = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (margin[i] < 1) {
        hinge += 1 - margin[i];
        gw -= s[i] * X.row(i).transpose() / static_cast<double>(n);
        gb -= s[i] / static_cast<double>(n);
      }
    }
    const double obj = 0.5 * p.lambda * w.squaredNorm() + hinge / static_cast<double>(n);
    if (obj < best_obj) {
      best_obj = obj;
      best.w_ = w;
      best.b_ = b;
    }
    if (it == p.iterations) break;
    w -= p.learning_rate * gw;
    b -= p.learning_rate * gb;
  }
  return best;
}

double LinearSvm::predict_proba(const Vector& x) const {
  check_dim(x, input_dimension());
  return sigmoid(decision(x));
}

void LinearSvm::save_body(BinaryWriter& w) const {
  w.f64s(std::span<const double>(w_.data(), static_cast<std::size_t>(w_.size())));
  w.f64(b_);
}

LinearSvm LinearSvm::load_body(BinaryReader& r) {
  LinearSvm m;
  const auto v = r.f64s();
  m.w_ = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  m.b_ = r.f64();
  return m;
}

// ---- factories ----

std::string kind_name(CandidateKind k) {
  switch (k) {
    case CandidateKind::LR: return "LR";
    case CandidateKind::DT: return "DT";
    case CandidateKind::RF: return "RF";
    case CandidateKind::GBT: return "GBT";
  }
  return "?";
}

std::string kind_name(MetaKind k) {
  switch (k) {
    case MetaKind::KNN: return "KNN";
    case MetaKind::LR: return "LR";
    case MetaKind::SVM: return "SVM";
    case MetaKind::DT: return "DT";
  }
  return "?";
}

std::unique_ptr<Classifier> train_candidate(CandidateKind kind, const Matrix& X, const std::vector<int>& y,
                                            const CandidateParams& p) {
  switch (kind) {
    case CandidateKind::LR: return std::make_unique<LogisticRegression>(LogisticRegression::fit(X, y, p.lr));
    case CandidateKind::DT: return std::make_unique<DecisionTree>(DecisionTree::fit(X, y, p.dt));
    case CandidateKind::RF: return std::make_unique<RandomForest>(RandomForest::fit(X, y, p.rf));
    case CandidateKind::GBT: return std::make_unique<GradientBoostedTrees>(GradientBoostedTrees::fit(X, y, p.gbt));
  }
  throw std::invalid_argument("unknown candidate kind");
}

void check_meta_input(const Matrix& P) {
  if (P.cols() != 2) throw std::invalid_argument("meta input must be 2-dimensional");
  if ((P.array() < 0.0).any() || (P.array() > 1.0).any() || !P.allFinite())
    throw std::invalid_argument("meta input coordinates must lie in [0,1]");
}

std::unique_ptr<Classifier> train_meta(MetaKind kind, const Matrix& P, const std::vector<int>& y,
                                       const MetaParams& p) {
  check_meta_input(P);
  switch (kind) {
    case MetaKind::KNN: return std::make_unique<KNearestNeighbors>(KNearestNeighbors::fit(P, y, p.knn_k));
    case MetaKind::LR: return std::make_unique<LogisticRegression>(LogisticRegression::fit(P, y, p.lr));
    case MetaKind::SVM: return std::make_unique<LinearSvm>(LinearSvm::fit(P, y, p.svm));
    case MetaKind::DT: return std::make_unique<DecisionTree>(DecisionTree::fit(P, y, p.dt));
  }
  throw std::invalid_argument("unknown meta kind");
}

}  // namespace sentinel::ml
