#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sentinel/ml/metrics.hpp"
#include "sentinel/ml/models.hpp"

namespace sentinel::ml {

/// Index of the best report: highest F1, then highest recall, then lowest
/// FPR, then lowest index. Throws std::invalid_argument when empty.
std::size_t select_best(const std::vector<EvalReport>& reports);

enum class ImportanceMetric { F1, Accuracy };

double score_metric(ImportanceMetric m, const Vector& probabilities, const std::vector<int>& y);

/// Mean metric drop over `repeats` seeded shuffles of each column.
std::vector<double> permutation_importance(const std::function<Vector(const Matrix&)>& predict, const Matrix& X,
                                           const std::vector<int>& y, ImportanceMetric metric, std::size_t repeats,
                                           std::uint64_t seed);

}  // namespace sentinel::ml
