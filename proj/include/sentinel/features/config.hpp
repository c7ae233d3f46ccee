#pragma once

#include <set>
#include <string>
#include <string_view>

#include "sentinel/common/bytes.hpp"

namespace sentinel::features {

/// Selector sets for flashloan callbacks and token-related external calls.
/// Files hold one canonical signature per line (`#` comments allowed).
struct FeatureConfig {
  std::set<Selector> flashloan_callbacks;
  std::set<Selector> token_functions;

  static FeatureConfig defaults();
  static FeatureConfig from_lists(std::string_view flashloan_signatures, std::string_view token_signatures);
  static FeatureConfig load(const std::string& flashloan_path, const std::string& token_path);
};

std::set<Selector> parse_signature_list(std::string_view text);

/// Built-in lists, identical to data/flashloan_callbacks.txt and
/// data/token_signatures.txt.
std::string_view default_flashloan_signatures();
std::string_view default_token_signatures();

}  // namespace sentinel::features
