#include "sentinel/features/config.hpp"

#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"

namespace sentinel::features {

std::set<Selector> parse_signature_list(std::string_view text) {
  std::set<Selector> out;
  for (auto raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.find('(') == std::string_view::npos || line.back() != ')')
      throw std::invalid_argument("not a canonical signature: '" + std::string(line) + "'");
    out.insert(selector_of(line));
  }
  return out;
}

FeatureConfig FeatureConfig::from_lists(std::string_view flashloan_signatures, std::string_view token_signatures) {
  return {parse_signature_list(flashloan_signatures), parse_signature_list(token_signatures)};
}

FeatureConfig FeatureConfig::defaults() {
  return from_lists(default_flashloan_signatures(), default_token_signatures());
}

FeatureConfig FeatureConfig::load(const std::string& flashloan_path, const std::string& token_path) {
  return from_lists(read_file(flashloan_path), read_file(token_path));
}

}  // namespace sentinel::features
