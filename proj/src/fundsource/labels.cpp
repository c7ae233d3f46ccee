#include "sentinel/fundsource/labels.hpp"

#include "sentinel/common/text.hpp"

namespace sentinel::fundsource {

std::string_view category_name(FundSourceCategory c) {
  switch (c) {
    case FundSourceCategory::Safe: return "Safe";
    case FundSourceCategory::Anonymous: return "Anonymous";
    case FundSourceCategory::Bridge: return "Bridge";
    case FundSourceCategory::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<FundSourceCategory> parse_category(std::string_view name) {
  const auto lower = to_lower(trim(name));
  if (lower == "safe") return FundSourceCategory::Safe;
  if (lower == "anonymous") return FundSourceCategory::Anonymous;
  if (lower == "bridge") return FundSourceCategory::Bridge;
  if (lower == "unknown") return FundSourceCategory::Unknown;
  return std::nullopt;
}

FundSourceCategory category_or_unknown(std::string_view name) {
  return parse_category(name).value_or(FundSourceCategory::Unknown);
}

AddressLabelDB AddressLabelDB::parse(std::string_view text) {
  AddressLabelDB db;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3)
      throw std::invalid_argument("label db line " + std::to_string(line_no) + ": expected <address>,<label>,<category>");
    const auto category = parse_category(fields[2]);
    if (!category)
      throw std::invalid_argument("label db line " + std::to_string(line_no) + ": unknown category '" +
                                  std::string(trim(fields[2])) + "'");
    db.add(Address::from_hex(trim(fields[0])), {std::string(trim(fields[1])), *category});
  }
  return db;
}

AddressLabelDB AddressLabelDB::load(const std::string& path) { return parse(read_file(path)); }

void AddressLabelDB::add(const Address& address, AddressLabel label) {
  if (!entries_.emplace(address, std::move(label)).second)
    throw std::invalid_argument("duplicate label for " + address.hex());
}

std::optional<AddressLabel> AddressLabelDB::lookup(const Address& address) const {
  auto it = entries_.find(address);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<AddressLabel> label_address(std::string_view address_hex, const AddressLabelDB& labels) {
  return labels.lookup(Address::from_hex(trim(address_hex)));
}

std::optional<AddressLabel> label_address(const Address& address, const AddressLabelDB& labels) {
  return labels.lookup(address);
}

}  // namespace sentinel::fundsource
