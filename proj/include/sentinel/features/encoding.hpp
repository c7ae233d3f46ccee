#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/common/bytes.hpp"
#include "sentinel/features/features.hpp"

namespace sentinel::features {

/// z-scored columns, in encoded order.
inline constexpr std::array<std::string_view, 13> kNumericFeatures = {
    "nonce",
    "input_data_length",
    "gas_used",
    "func_count",
    "public_func_count",
    "flashloan_callback_count",
    "flashloan_callback_ratio",
    "token_call_count",
    "token_call_ratio",
    "max_token_call_count",
    "avg_token_call_count",
    "delegate_call_count",
    "selfdestruct_count",
};

inline constexpr std::array<FundSourceCategory, 4> kCategoryOrder = {
    FundSourceCategory::Safe, FundSourceCategory::Anonymous, FundSourceCategory::Bridge, FundSourceCategory::Unknown};

struct EncodingOptions {
  bool include_verified = true;
};

/// Column names of the encoded vector:
/// fund_safe, fund_anonymous, fund_bridge, fund_unknown, value_flag,
/// [verified], then kNumericFeatures.
std::vector<std::string> feature_names(const EncodingOptions& opts = {});
std::size_t encoded_dimension(const EncodingOptions& opts = {});

std::array<double, kNumericFeatures.size()> numeric_columns(const FeatureRecord& r);

struct NormalizerStats {
  std::array<double, kNumericFeatures.size()> mean{};
  std::array<double, kNumericFeatures.size()> std{};  ///< population; 1 for constant columns

  bool operator==(const NormalizerStats&) const = default;
  /// 26 little-endian doubles (means then stds).
  Bytes serialize() const;
  static NormalizerStats deserialize(std::span<const std::uint8_t> data);
  Hash32 hash() const;
};

/// Throws std::invalid_argument with fewer than two records.
NormalizerStats fit_normalizer(const std::vector<FeatureRecord>& records);

std::vector<double> encode(const FeatureRecord& record, const NormalizerStats& stats, const EncodingOptions& opts = {});

/// argmax of the one-hot block.
FundSourceCategory decode_category(const std::vector<double>& encoded);

}  // namespace sentinel::features
