#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sentinel::ml {

struct EvalReport {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, fpr = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
};

inline constexpr double kDefaultThreshold = 0.5;

/// F1 = 2PR / (P + R), 0 when P + R = 0.
double f1_score(double precision, double recall);

/// Metrics from confusion counts; each ratio is 0 when its denominator is 0.
EvalReport report_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn);

/// Thresholds probabilities (label = p >= threshold). Throws
/// std::invalid_argument on empty or mismatched input or labels outside {0,1}.
EvalReport evaluate(std::span<const double> probabilities, std::span<const int> labels,
                    double threshold = kDefaultThreshold);

std::string format_report_row(const std::string& name, const EvalReport& r);

}  // namespace sentinel::ml
