#include "sentinel/ml/adasyn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sentinel/common/rng.hpp"

namespace sentinel::ml {

namespace {

/// k nearest rows of `candidates` to row i (itself excluded), by
/// (distance, row index).
std::vector<std::size_t> nearest(const Matrix& X, std::size_t i, const std::vector<std::size_t>& candidates,
                                 std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(candidates.size());
  const auto xi = X.row(static_cast<Eigen::Index>(i));
  for (auto c : candidates)
    if (c != i) d.emplace_back((X.row(static_cast<Eigen::Index>(c)) - xi).squaredNorm(), c);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < k; ++j) out.push_back(d[j].second);
  return out;
}

}  // namespace

AdasynResult adasyn(const Matrix& X, const std::vector<int>& y, double beta, std::size_t k, std::uint64_t seed) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw std::invalid_argument("adasyn: one label per row");
  if (!(beta > 0 && beta <= 1)) throw std::invalid_argument("adasyn: beta must lie in (0, 1]");
  AdasynResult out;
  std::vector<std::size_t> all(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    all[i] = i;
    if (y[i] == 1) out.minority.push_back(i);
    else if (y[i] != 0) throw std::invalid_argument("adasyn: labels must be 0 or 1");
  }
  const std::size_t ms = out.minority.size();
  const std::size_t ml = y.size() - ms;
  if (ms < 2) throw std::invalid_argument("adasyn: needs at least 2 minority rows");
  if (k == 0 || k >= ms) throw std::invalid_argument("adasyn: k must satisfy 0 < k < minority count");
  out.X = X;
  out.y = y;
  out.G = ml > ms ? static_cast<double>(ml - ms) * beta : 0.0;
  out.r.assign(ms, 0.0);
  out.g.assign(ms, 0);
  if (out.G == 0) return out;

  double sum_r = 0;
  for (std::size_t m = 0; m < ms; ++m) {
    const auto nb = nearest(X, out.minority[m], all, k);
    std::size_t maj = 0;
    for (auto j : nb) maj += y[j] == 0 ? 1 : 0;
    out.r[m] = static_cast<double>(maj) / static_cast<double>(k);
    sum_r += out.r[m];
  }
  std::size_t total = 0;
  for (std::size_t m = 0; m < ms; ++m) {
    const double share = sum_r > 0 ? out.r[m] / sum_r * out.G : out.G / static_cast<double>(ms);
    out.g[m] = static_cast<std::size_t>(std::llround(share));
    total += out.g[m];
  }
  out.uniform_fallback = sum_r == 0;

  Rng rng(seed);
  const auto d = X.cols();
  out.X.conservativeResize(X.rows() + static_cast<Eigen::Index>(total), d);
  out.y.resize(y.size() + total, 1);
  Eigen::Index row = X.rows();
  for (std::size_t m = 0; m < ms; ++m) {
    if (out.g[m] == 0) continue;
    const auto xi = out.minority[m];
    const auto nb = nearest(X, xi, out.minority, k);
    for (std::size_t s = 0; s < out.g[m]; ++s) {
      const auto z = nb[rng.index(nb.size())];
      const double lambda = rng.uniform();
      out.X.row(row) = X.row(static_cast<Eigen::Index>(xi)) +
                       lambda * (X.row(static_cast<Eigen::Index>(z)) - X.row(static_cast<Eigen::Index>(xi)));
      out.origins.push_back({xi, z, lambda});
      ++row;
    }
  }
  return out;
}

}  // namespace sentinel::ml
