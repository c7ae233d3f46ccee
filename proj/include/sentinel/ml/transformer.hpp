#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sentinel/common/binary.hpp"
#include "sentinel/common/rng.hpp"
#include "sentinel/ml/vocab.hpp"

namespace sentinel::ml {

struct TransformerConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t d_ff = 128;
  std::size_t max_length = 512;
  double dropout = 0.1;
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t patience = 3;
  std::size_t batch_size = 16;
  double clip_norm = 5.0;
  bool class_weighting = true;
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
  bool operator==(const TransformerConfig&) const = default;
};

struct LabeledSequence {
  std::vector<TokenId> ids;
  int label = 0;
};

/// Encoder-only classifier: token embeddings plus sinusoidal positions,
/// post-norm encoder layers (multi-head self-attention, ReLU feed-forward),
/// mean pooling over non-PAD positions, a ReLU dense layer and a sigmoid
/// output. All parameters live in one flat vector.
class TransformerModel {
 public:
  explicit TransformerModel(const TransformerConfig& cfg);

  const TransformerConfig& config() const { return cfg_; }
  std::size_t parameter_count() const { return theta_.size(); }
  std::vector<double>& parameters() { return theta_; }
  const std::vector<double>& parameters() const { return theta_; }

  double logit(std::span<const TokenId> ids) const;
  double predict_proba(std::span<const TokenId> ids) const;

  /// weight * BCE for one sequence. Adds d(loss)/d(theta) into grad when
  /// non-null. Dropout is applied only when dropout_rng is non-null.
  double example_loss(std::span<const TokenId> ids, int label, double weight, std::vector<double>* grad,
                      Rng* dropout_rng) const;

  void save(BinaryWriter& w) const;
  static TransformerModel load(BinaryReader& r);

  /// Shapes of each named parameter block, for inspection.
  struct Block {
    std::string name;
    std::size_t offset, rows, cols;
  };
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  struct LayerOffsets {
    std::size_t wq, wk, wv, wo, bq, bk, bv, bo, g1, be1, w1, b1, w2, b2, g2, be2;
  };
  void build_layout();
  std::size_t reserve(const std::string& name, std::size_t rows, std::size_t cols);
  double forward_backward(std::span<const TokenId> ids, int label, double weight, std::vector<double>* grad,
                          Rng* dropout_rng) const;

  TransformerConfig cfg_;
  std::vector<double> theta_;
  std::vector<Block> blocks_;
  std::size_t emb_ = 0, wh_ = 0, bh_ = 0, wout_ = 0, bout_ = 0;
  std::vector<LayerOffsets> layer_;
  std::vector<double> positions_;  ///< max_length x d_model, not a parameter
};

struct TrainingLog {
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

/// Adam on class-weighted BCE with dropout; early stopping on validation
/// loss (train loss when valid is empty); returns the best-epoch weights.
/// Throws std::invalid_argument when train lacks either class.
TransformerModel train_transformer(const std::vector<LabeledSequence>& train, const std::vector<LabeledSequence>& valid,
                                   const TransformerConfig& cfg, TrainingLog* log = nullptr);

}  // namespace sentinel::ml
