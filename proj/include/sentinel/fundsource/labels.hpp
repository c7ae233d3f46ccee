#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "sentinel/common/bytes.hpp"

namespace sentinel::fundsource {

enum class FundSourceCategory { Safe, Anonymous, Bridge, Unknown };

inline constexpr std::size_t kCategoryCount = 4;

std::string_view category_name(FundSourceCategory c);
/// Case-insensitive; returns nullopt for names outside the enum.
std::optional<FundSourceCategory> parse_category(std::string_view name);
/// Unrecognized names map to Unknown.
FundSourceCategory category_or_unknown(std::string_view name);

struct AddressLabel {
  std::string label;
  FundSourceCategory category = FundSourceCategory::Unknown;
  bool operator==(const AddressLabel&) const = default;
};

/// Lines of `<20-byte hex>,<label>,<category>`; blank lines and `#` comments
/// are skipped. Addresses are matched case-insensitively.
class AddressLabelDB {
 public:
  static AddressLabelDB parse(std::string_view text);
  static AddressLabelDB load(const std::string& path);

  /// Throws std::invalid_argument if the address is already present.
  void add(const Address& address, AddressLabel label);
  std::optional<AddressLabel> lookup(const Address& address) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<Address, AddressLabel> entries_;
};

std::optional<AddressLabel> label_address(std::string_view address_hex, const AddressLabelDB& labels);
std::optional<AddressLabel> label_address(const Address& address, const AddressLabelDB& labels);

}  // namespace sentinel::fundsource
