#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/features/encoding.hpp"
#include "sentinel/ml/metrics.hpp"
#include "sentinel/ml/models.hpp"
#include "sentinel/ml/transformer.hpp"
#include "sentinel/ml/vocab.hpp"

namespace sentinel::ml {

inline constexpr int kBundleFormatVersion = 1;

struct EnsembleConfig {
  std::uint64_t seed = 42;
  features::EncodingOptions encoding{};
  double train_fraction = 0.8;
  double meta_fraction = 0.25;
  double adasyn_beta = 1.0;
  std::size_t adasyn_k = 5;
  std::size_t vocab_min_frequency = 1;
  double transformer_holdout = 0.15;  ///< latest share of base_train used for early stopping
  double meta_holdout = 0.3;          ///< latest share of meta_train used to pick the meta kind
  CandidateParams candidates{};
  MetaParams metas{};
  TransformerConfig transformer{};  ///< vocab_size is filled in from the built vocabulary
};

struct Prediction {
  int label = 0;
  double p_pred = 0;
  double p_candidate = 0;
  double p_transformer = 0;
};

class IncompatibleBundle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Ensemble {
  features::EncodingOptions encoding{};
  features::NormalizerStats normalizer{};
  TokenVocabulary vocab;
  std::vector<std::unique_ptr<Classifier>> candidates;  ///< kCandidateKinds order
  std::size_t selected_candidate = 0;
  std::optional<TransformerModel> transformer;
  std::vector<std::unique_ptr<Classifier>> metas;  ///< kMetaKinds order
  std::size_t selected_meta = 0;
  std::uint64_t seed = 0;
  std::vector<EvalReport> candidate_validation;
  std::vector<EvalReport> meta_validation;

  const Classifier& candidate() const { return *candidates.at(selected_candidate); }
  const Classifier& meta() const { return *metas.at(selected_meta); }

  std::vector<double> encode(const features::FeatureRecord& r) const;
  std::vector<TokenId> tokens(const features::FeatureRecord& r) const;
  double transformer_proba(const features::FeatureRecord& r) const;
  double candidate_proba(std::size_t index, const features::FeatureRecord& r) const;
  double meta_proba(std::size_t index, double p_candidate, double p_transformer) const;

  /// Selected candidate and transformer feed the selected meta;
  /// label = p_pred >= 0.5.
  Prediction predict(const features::FeatureRecord& r) const;
};

struct SplitSizes {
  std::size_t base_train = 0, meta_train = 0, test = 0, synthetic = 0;
};

struct TrainReport {
  SplitSizes sizes;
  TrainingLog transformer_log;
  std::vector<std::string> notes;
};

/// chrono_split -> ADASYN on base_train -> 4 candidates + transformer ->
/// candidate chosen by F1 on meta_train -> stacking inputs on meta_train ->
/// 4 metas fitted on the earlier part of meta_train, the kind chosen on the
/// later part and refitted on all of meta_train. Needs labels and both
/// classes in each stage; throws std::invalid_argument otherwise.
Ensemble train_ensemble(const std::vector<features::FeatureRecord>& records, const EnsembleConfig& cfg,
                        TrainReport* report = nullptr);

/// Rows: LR, DT, RF, GBT, Transformer, Meta-KNN, Meta-LR, Meta-SVM, Meta-DT.
struct EvalRow {
  std::string name;
  EvalReport report;
};
std::vector<EvalRow> evaluate_ensemble(const Ensemble& e, const std::vector<features::FeatureRecord>& records);

/// Rows of `records` that chrono_split would put in the test slice.
std::vector<features::FeatureRecord> test_slice(const std::vector<features::FeatureRecord>& records,
                                                double train_fraction = 0.8, double meta_fraction = 0.25);

/// Directory with manifest.json and little-endian weight files.
void save_bundle(const Ensemble& e, const std::filesystem::path& dir);
/// Throws IncompatibleBundle on a format version, hash or shape mismatch.
Ensemble load_bundle(const std::filesystem::path& dir);
/// keccak256 over every file in the bundle (name, size, bytes), sorted by name.
Hash32 bundle_hash(const std::filesystem::path& dir);

}  // namespace sentinel::ml
