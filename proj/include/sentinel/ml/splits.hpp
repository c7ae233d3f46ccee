#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sentinel/ml/metrics.hpp"

namespace sentinel::ml {

struct TimeKey {
  std::int64_t timestamp = 0;
  std::string id;  ///< tiebreak for equal timestamps
};

struct ChronoSplit {
  std::vector<std::size_t> base_train;
  std::vector<std::size_t> meta_train;
  std::vector<std::size_t> test;
};

/// Indices in chronological order (timestamp, then id). The earliest
/// floor(train_fraction * n) rows form the training pool; its latest
/// floor(meta_fraction * pool) rows are meta_train. Throws
/// std::invalid_argument with fewer than 5 rows.
ChronoSplit chrono_split(const std::vector<TimeKey>& keys, double train_fraction = 0.8, double meta_fraction = 0.25);

/// Stable chronological order of `keys`.
std::vector<std::size_t> chronological_order(const std::vector<TimeKey>& keys);

struct CvFold {
  std::size_t index = 0;  ///< 1-based: trains on splits 1..index
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct CvPlan {
  std::vector<CvFold> folds;
  std::vector<std::string> diagnostics;  ///< skipped folds
};

/// Cuts the chronologically ordered rows into n_splits near-equal
/// contiguous chunks; fold i trains on chunks 1..i and tests on chunk i+1.
/// Folds whose training part holds a single class are skipped. Throws
/// std::invalid_argument if n_splits < 2 or n_splits > rows.
CvPlan expanding_window_cv(const std::vector<TimeKey>& keys, const std::vector<int>& labels, std::size_t n_splits = 5);

struct CvResult {
  std::vector<EvalReport> reports;
  double mean_f1 = 0;
  std::vector<std::string> diagnostics;
};

CvResult run_cv(const CvPlan& plan,
                const std::function<EvalReport(const std::vector<std::size_t>&, const std::vector<std::size_t>&)>& trainer);

}  // namespace sentinel::ml
