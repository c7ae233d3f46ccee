#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sentinel/common/binary.hpp"

namespace sentinel::ml {

using Matrix = Eigen::MatrixXd;  ///< rows are samples
using Vector = Eigen::VectorXd;

/// Probabilistic binary classifier over dense vectors.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t input_dimension() const = 0;
  virtual double predict_proba(const Vector& x) const = 0;
  Vector predict_proba(const Matrix& X) const;
  int predict(const Vector& x, double threshold = 0.5) const { return predict_proba(x) >= threshold ? 1 : 0; }

  /// Kind string first, then the model's own layout.
  void save(BinaryWriter& w) const;

 protected:
  virtual void save_body(BinaryWriter& w) const = 0;
};

std::unique_ptr<Classifier> load_classifier(BinaryReader& r);

/// Throws std::invalid_argument unless y is 0/1 with both classes present
/// and one label per row.
void check_training_set(const Matrix& X, const std::vector<int>& y);

// ---- logistic regression ----

struct LogisticParams {
  double l2 = 1e-4;
  double learning_rate = 0.5;
  std::size_t iterations = 1500;
};

class LogisticRegression : public Classifier {
 public:
  LogisticRegression() = default;
  LogisticRegression(Vector weights, double bias) : w_(std::move(weights)), b_(bias) {}

  static LogisticRegression fit(const Matrix& X, const std::vector<int>& y, const LogisticParams& p = {});

  /// Mean logistic loss plus l2/2 * |w|^2 at theta = [w..., b]. Fills grad
  /// when non-null.
  static double loss(const Matrix& X, const std::vector<int>& y, const Vector& theta, double l2, Vector* grad);

  std::string kind() const override { return "LR"; }
  std::size_t input_dimension() const override { return static_cast<std::size_t>(w_.size()); }
  double predict_proba(const Vector& x) const override;
  using Classifier::predict_proba;
  const Vector& weights() const { return w_; }
  double bias() const { return b_; }
  static LogisticRegression load_body(BinaryReader& r);

 protected:
  void save_body(BinaryWriter& w) const override;

 private:
  Vector w_;
  double b_ = 0;
};

// ---- trees ----

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0;
  int left = -1, right = -1;
  double value = 0;  ///< leaf output
};

struct Tree {
  std::vector<TreeNode> nodes;
  double eval(const Vector& x) const;
  std::size_t depth() const;
  void save(BinaryWriter& w) const;
  static Tree load(BinaryReader& r);
};

struct TreeParams {
  std::size_t max_depth = 8;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  ///< 0 = all features
  std::uint64_t seed = 0;        ///< feature subsampling only
};

/// CART with Gini impurity over the given rows; leaves hold the positive
/// fraction. Impure nodes split even at zero gain when any split exists.
Tree build_gini_tree(const Matrix& X, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                     const TreeParams& p);

struct GradientTreeParams {
  std::size_t max_depth = 3;
  double lambda = 1.0;
  double min_child_hessian = 1e-6;
};

/// Second-order regression tree: leaf = -G/(H+lambda), split gain
/// GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l) > 0.
Tree build_gradient_tree(const Matrix& X, const std::vector<double>& g, const std::vector<double>& h,
                         const GradientTreeParams& p);

class DecisionTree : public Classifier {
 public:
  DecisionTree() = default;
  explicit DecisionTree(Tree t, std::size_t dim) : tree_(std::move(t)), dim_(dim) {}
  static DecisionTree fit(const Matrix& X, const std::vector<int>& y, const TreeParams& p = {});

  std::string kind() const override { return "DT"; }
  std::size_t input_dimension() const override { return dim_; }
  double predict_proba(const Vector& x) const override { return tree_.eval(x); }
  using Classifier::predict_proba;
  const Tree& tree() const { return tree_; }
  static DecisionTree load_body(BinaryReader& r);

 protected:
  void save_body(BinaryWriter& w) const override;

 private:
  Tree tree_;
  std::size_t dim_ = 0;
};

struct ForestParams {
  std::size_t trees = 100;
  bool bootstrap = true;
  std::size_t max_features = 0;  ///< 0 = round(sqrt(d))
  bool all_features = false;     ///< overrides max_features
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 1;
};

class RandomForest : public Classifier {
 public:
  static RandomForest fit(const Matrix& X, const std::vector<int>& y, const ForestParams& p = {});

  std::string kind() const override { return "RF"; }
  std::size_t input_dimension() const override { return dim_; }
  double predict_proba(const Vector& x) const override;
  using Classifier::predict_proba;
  const std::vector<Tree>& trees() const { return trees_; }
  static RandomForest load_body(BinaryReader& r);

 protected:
  void save_body(BinaryWriter& w) const override;

 private:
  std::vector<Tree> trees_;
  std::size_t dim_ = 0;
};

struct BoostingParams {
  std::size_t rounds = 150;
  double shrinkage = 0.1;
  GradientTreeParams tree{};
};

/// Stagewise additive trees on logistic loss starting from F0 = 0.
class GradientBoostedTrees : public Classifier {
 public:
  static GradientBoostedTrees fit(const Matrix& X, const std::vector<int>& y, const BoostingParams& p = {});

  std::string kind() const override { return "GBT"; }
  std::size_t input_dimension() const override { return dim_; }
  double margin(const Vector& x) const;
  double predict_proba(const Vector& x) const override;
  using Classifier::predict_proba;
  const std::vector<Tree>& trees() const { return trees_; }
  double shrinkage() const { return shrinkage_; }
  static GradientBoostedTrees load_body(BinaryReader& r);

 protected:
  void save_body(BinaryWriter& w) const override;

 private:
  std::vector<Tree> trees_;
  double shrinkage_ = 0.1;
  std::size_t dim_ = 0;
};

// ---- meta-only kinds ----

/// Euclidean k nearest neighbours. proba is the positive vote share; an
/// exact 0.5 share is replaced by the inverse-distance weighted share, and
/// if that also ties, by the nearest neighbour's label.
class KNearestNeighbors : public Classifier {
 public:
  static KNearestNeighbors fit(const Matrix& X, const std::vector<int>& y, std::size_t k = 5);

  std::string kind() const override { return "KNN"; }
  std::size_t input_dimension() const override { return static_cast<std::size_t>(X_.cols()); }
  double predict_proba(const Vector& x) const override;
  using Classifier::predict_proba;
  static KNearestNeighbors load_body(BinaryReader& r);

 protected:
  void save_body(BinaryWriter& w) const override;

 private:
  Matrix X_;
  std::vector<int> y_;
  std::size_t k_ = 5;
};

struct SvmParams {
  double lambda = 1e-3;
  double learning_rate = 0.1;
  std::size_t iterations = 2000;
};

/// Linear SVM on hinge loss via full-batch sub-gradient descent; keeps the
/// iterate with the lowest objective. proba = sigmoid(w.x + b).
class LinearSvm : public Classifier {
 public:
  static LinearSvm fit(const Matrix& X, const std::vector<int>& y, const SvmParams& p = {});

  std::string kind() const override { return "SVM"; }
  std::size_t input_dimension() const override { return static_cast<std::size_t>(w_.size()); }
  double decision(const Vector& x) const { return w_.dot(x) + b_; }
  double predict_proba(const Vector& x) const override;
  using Classifier::predict_proba;
  static LinearSvm load_body(BinaryReader& r);

 protected:
  void save_body(BinaryWriter& w) const override;

 private:
  Vector w_;
  double b_ = 0;
};

// ---- kinds and factories ----

enum class CandidateKind { LR, DT, RF, GBT };
enum class MetaKind { KNN, LR, SVM, DT };

inline constexpr CandidateKind kCandidateKinds[] = {CandidateKind::LR, CandidateKind::DT, CandidateKind::RF,
                                                    CandidateKind::GBT};
inline constexpr MetaKind kMetaKinds[] = {MetaKind::KNN, MetaKind::LR, MetaKind::SVM, MetaKind::DT};

std::string kind_name(CandidateKind k);
std::string kind_name(MetaKind k);

struct CandidateParams {
  LogisticParams lr{};
  TreeParams dt{};
  ForestParams rf{};
  BoostingParams gbt{};
};

std::unique_ptr<Classifier> train_candidate(CandidateKind kind, const Matrix& X, const std::vector<int>& y,
                                            const CandidateParams& p = {});

struct MetaParams {
  std::size_t knn_k = 5;
  LogisticParams lr{};
  SvmParams svm{};
  TreeParams dt{.max_depth = 4};
};

/// Validates a n x 2 input with coordinates in [0,1]; throws
/// std::invalid_argument otherwise.
void check_meta_input(const Matrix& P);
std::unique_ptr<Classifier> train_meta(MetaKind kind, const Matrix& P, const std::vector<int>& y,
                                       const MetaParams& p = {});

double sigmoid(double z);

}  // namespace sentinel::ml
