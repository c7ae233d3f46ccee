#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/chain/transport.hpp"
#include "sentinel/ml/transformer.hpp"

namespace sentinel::pipeline {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Settings shared by every subcommand. Text form: one `key = value` per
/// line, `#` comments. Environment variables SENTINEL_<KEY> (upper case)
/// are read first, then the file, then command-line overrides.
struct PipelineConfig {
  chain::Endpoints endpoints;
  std::string snapshot;  ///< JSONL snapshot path; empty = none
  chain::Mode mode = chain::Mode::Live;
  std::string label_db;       ///< address label CSV
  std::string signature_db;   ///< `<selector>,<signature>` lines
  std::string flashloan_list; ///< empty = built-in list
  std::string token_list;     ///< empty = built-in list
  std::string model;          ///< bundle directory
  std::optional<std::uint64_t> from_block;
  std::optional<std::uint64_t> to_block;
  bool follow = false;
  std::size_t min_unique_callers = 10;
  std::int64_t caller_window_days = 90;
  std::string caller_history;  ///< `<contract> <caller> <ts>` lines
  std::string adversarial_labels;  ///< one contract address per line
  std::size_t fund_trace_depth = 10;
  std::size_t workers = 0;  ///< 0 = hardware concurrency
  int max_retries = 3;
  std::int64_t initial_backoff_ms = 200;
  std::string alerts = "alerts.jsonl";
  std::string reports;  ///< optional JSONL of full reports
  std::uint64_t seed = 42;
  bool no_verified_feature = false;
  bool remote_signatures = true;
  /// transformer_* keys; vocab_size is ignored
  ml::TransformerConfig transformer;

  /// Throws ConfigError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  /// `key = value` lines; errors name the line.
  void apply_text(const std::string& text, const std::string& origin = "config");
  /// Reads SENTINEL_* variables from `env` (name -> value).
  void apply_env(const std::map<std::string, std::string>& env);

  std::size_t effective_workers() const;
  /// Key/value pairs in the text format, for display.
  std::string describe() const;
};

/// Known keys in documentation order.
const std::vector<std::string>& config_keys();

/// Current process environment restricted to SENTINEL_* names.
std::map<std::string, std::string> sentinel_environment();

/// env < file < overrides.
PipelineConfig resolve_config(const std::map<std::string, std::string>& env, const std::string& config_path,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace sentinel::pipeline
