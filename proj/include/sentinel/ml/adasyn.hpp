#pragma once

#include <cstdint>
#include <vector>

#include "sentinel/ml/models.hpp"

namespace sentinel::ml {

struct SyntheticOrigin {
  std::size_t base = 0;      ///< minority row the sample grew from
  std::size_t neighbor = 0;  ///< minority neighbour it moved towards
  double lambda = 0;
};

struct AdasynResult {
  Matrix X;  ///< original rows first, then synthetics
  std::vector<int> y;
  double G = 0;
  std::vector<double> r;              ///< per minority row, in row order
  std::vector<std::size_t> g;         ///< synthetics per minority row
  std::vector<std::size_t> minority;  ///< row indices of label 1
  std::vector<SyntheticOrigin> origins;
  bool uniform_fallback = false;
};

/// Oversamples label 1. G = (majority - minority) * beta; ri is the share of
/// majority rows among a row's k nearest neighbours in the full set;
/// gi = round(ri / sum(r) * G), or round(G / ms) for every row when sum(r)
/// is 0. Throws std::invalid_argument when fewer than 2 minority rows exist,
/// k is 0 or k >= minority count, or beta is outside (0, 1].
AdasynResult adasyn(const Matrix& X, const std::vector<int>& y, double beta, std::size_t k, std::uint64_t seed);

}  // namespace sentinel::ml
