#include "sentinel/ml/selection.hpp"

#include <numeric>
#include <stdexcept>

#include "sentinel/common/rng.hpp"

namespace sentinel::ml {

std::size_t select_best(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("select_best: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& a = reports[i];
    const auto& b = reports[best];
    if (a.f1 != b.f1) {
      if (a.f1 > b.f1) best = i;
    } else if (a.recall != b.recall) {
      if (a.recall > b.recall) best = i;
    } else if (a.fpr < b.fpr) {
      best = i;
    }
  }
  return best;
}

double score_metric(ImportanceMetric m, const Vector& probabilities, const std::vector<int>& y) {
  const auto r = evaluate(std::span<const double>(probabilities.data(), static_cast<std::size_t>(probabilities.size())), y);
  return m == ImportanceMetric::F1 ? r.f1 : r.accuracy;
}

std::vector<double> permutation_importance(const std::function<Vector(const Matrix&)>& predict, const Matrix& X,
                                           const std::vector<int>& y, ImportanceMetric metric, std::size_t repeats,
                                           std::uint64_t seed) {
  if (repeats == 0) throw std::invalid_argument("permutation_importance: repeats must be positive");
  const double base = score_metric(metric, predict(X), y);
  Rng rng(seed);
  std::vector<double> out(static_cast<std::size_t>(X.cols()), 0.0);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    double drop = 0;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      Matrix Xp = X;
      for (Eigen::Index i = 0; i < X.rows(); ++i) Xp(i, f) = X(perm[static_cast<std::size_t>(i)], f);
      drop += base - score_metric(metric, predict(Xp), y);
    }
    out[static_cast<std::size_t>(f)] = drop / static_cast<double>(repeats);
  }
  return out;
}

}  // namespace sentinel::ml
