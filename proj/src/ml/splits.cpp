#include "sentinel/ml/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace sentinel::ml {

std::vector<std::size_t> chronological_order(const std::vector<TimeKey>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].timestamp != keys[b].timestamp) return keys[a].timestamp < keys[b].timestamp;
    return keys[a].id < keys[b].id;
  });
  return order;
}

ChronoSplit chrono_split(const std::vector<TimeKey>& keys, double train_fraction, double meta_fraction) {
  if (keys.size() < 5) throw std::invalid_argument("chrono_split needs at least 5 records");
  const auto order = chronological_order(keys);
  const auto n = order.size();
  const auto pool = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  const auto meta = static_cast<std::size_t>(std::floor(meta_fraction * static_cast<double>(pool) + 1e-9));
  ChronoSplit s;
  s.base_train.assign(order.begin(), order.begin() + (pool - meta));
  s.meta_train.assign(order.begin() + (pool - meta), order.begin() + pool);
  s.test.assign(order.begin() + pool, order.end());
  return s;
}

CvPlan expanding_window_cv(const std::vector<TimeKey>& keys, const std::vector<int>& labels, std::size_t n_splits) {
  if (n_splits < 2) throw std::invalid_argument("expanding_window_cv needs n_splits >= 2");
  if (keys.size() < n_splits) throw std::invalid_argument("expanding_window_cv: fewer rows than splits");
  if (labels.size() != keys.size()) throw std::invalid_argument("expanding_window_cv: label count mismatch");
  const auto order = chronological_order(keys);
  const auto n = order.size();
  auto bound = [&](std::size_t k) { return k * n / n_splits; };
  CvPlan plan;
  for (std::size_t i = 1; i < n_splits; ++i) {
    CvFold f;
    f.index = i;
    f.train.assign(order.begin(), order.begin() + bound(i));
    f.test.assign(order.begin() + bound(i), order.begin() + bound(i + 1));
    std::set<int> classes;
    for (auto r : f.train) classes.insert(labels[r]);
    if (classes.size() < 2) {
      plan.diagnostics.push_back("fold " + std::to_string(i) + " skipped: training window holds a single class");
      continue;
    }
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

CvResult run_cv(const CvPlan& plan,
                const std::function<EvalReport(const std::vector<std::size_t>&, const std::vector<std::size_t>&)>& trainer) {
  CvResult out;
  out.diagnostics = plan.diagnostics;
  for (const auto& f : plan.folds) out.reports.push_back(trainer(f.train, f.test));
  if (!out.reports.empty()) {
    double sum = 0;
    for (const auto& r : out.reports) sum += r.f1;
    out.mean_f1 = sum / static_cast<double>(out.reports.size());
  }
  return out;
}

}  // namespace sentinel::ml
