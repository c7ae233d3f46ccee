#include "sentinel/features/encoding.hpp"

#include <cmath>

#include "sentinel/common/binary.hpp"
#include "sentinel/common/keccak.hpp"

namespace sentinel::features {

std::vector<std::string> feature_names(const EncodingOptions& opts) {
  std::vector<std::string> names{"fund_safe", "fund_anonymous", "fund_bridge", "fund_unknown", "value_flag"};
  if (opts.include_verified) names.emplace_back("verified");
  for (auto n : kNumericFeatures) names.emplace_back(n);
  return names;
}

std::size_t encoded_dimension(const EncodingOptions& opts) {
  return kCategoryOrder.size() + 1 + (opts.include_verified ? 1 : 0) + kNumericFeatures.size();
}

std::array<double, kNumericFeatures.size()> numeric_columns(const FeatureRecord& r) {
  const auto& d = r.deployment;
  const auto& m = r.implementation;
  return {static_cast<double>(d.nonce),
          static_cast<double>(d.input_data_length),
          static_cast<double>(d.gas_used),
          static_cast<double>(m.func_count),
          static_cast<double>(m.public_func_count),
          static_cast<double>(m.flashloan_callback_count),
          m.flashloan_callback_ratio,
          static_cast<double>(m.token_call_count),
          m.token_call_ratio,
          static_cast<double>(m.max_token_call_count),
          m.avg_token_call_count,
          static_cast<double>(m.delegate_call_count),
          static_cast<double>(m.selfdestruct_count)};
}

Bytes NormalizerStats::serialize() const {
  BinaryWriter w;
  for (double v : mean) w.f64(v);
  for (double v : std) w.f64(v);
  return w.bytes();
}

NormalizerStats NormalizerStats::deserialize(std::span<const std::uint8_t> data) {
  BinaryReader r(data);
  NormalizerStats s;
  for (auto& v : s.mean) v = r.f64();
  for (auto& v : s.std) v = r.f64();
  if (!r.done()) throw std::runtime_error("trailing bytes in normalizer stats");
  return s;
}

Hash32 NormalizerStats::hash() const { return keccak256(serialize()); }

NormalizerStats fit_normalizer(const std::vector<FeatureRecord>& records) {
  if (records.size() < 2) throw std::invalid_argument("fit_normalizer needs at least two records");
  NormalizerStats s;
  const double n = static_cast<double>(records.size());
  for (const auto& r : records) {
    const auto cols = numeric_columns(r);
    for (std::size_t c = 0; c < cols.size(); ++c) s.mean[c] += cols[c];
  }
  for (auto& m : s.mean) m /= n;
  std::array<double, kNumericFeatures.size()> var{};
  for (const auto& r : records) {
    const auto cols = numeric_columns(r);
    for (std::size_t c = 0; c < cols.size(); ++c) var[c] += (cols[c] - s.mean[c]) * (cols[c] - s.mean[c]);
  }
  for (std::size_t c = 0; c < var.size(); ++c) {
    const double sd = std::sqrt(var[c] / n);
    s.std[c] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[c])) ? sd : 1.0;
  }
  return s;
}

std::vector<double> encode(const FeatureRecord& record, const NormalizerStats& stats, const EncodingOptions& opts) {
  std::vector<double> v;
  v.reserve(encoded_dimension(opts));
  for (auto c : kCategoryOrder) v.push_back(record.deployment.fund_source == c ? 1.0 : 0.0);
  v.push_back(record.deployment.value_flag ? 1.0 : 0.0);
  if (opts.include_verified) v.push_back(record.deployment.verified ? 1.0 : 0.0);
  const auto cols = numeric_columns(record);
  for (std::size_t c = 0; c < cols.size(); ++c) v.push_back((cols[c] - stats.mean[c]) / stats.std[c]);
  return v;
}

FundSourceCategory decode_category(const std::vector<double>& encoded) {
  if (encoded.size() < kCategoryOrder.size()) throw std::invalid_argument("vector too short to hold a category");
  std::size_t best = 0;
  for (std::size_t i = 1; i < kCategoryOrder.size(); ++i)
    if (encoded[i] > encoded[best]) best = i;
  return kCategoryOrder[best];
}

}  // namespace sentinel::features
