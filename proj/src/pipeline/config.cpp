#include "sentinel/pipeline/config.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "sentinel/common/text.hpp"

extern char** environ;

namespace sentinel::pipeline {

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  const auto l = to_lower(v);
  if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
  if (l == "0" || l == "false" || l == "no" || l == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (v.empty() || v.front() == '-') throw std::invalid_argument("negative");
    const auto n = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !(d >= 0)) throw std::invalid_argument("bad");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative number, got '" + v + "'");
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "rpc_url",        "rpc_api_key",       "explorer_url",      "explorer_api_key",  "signatures_url",
      "timeout_seconds", "snapshot",         "mode",              "label_db",          "signature_db",
      "flashloan_list", "token_list",        "model",             "from_block",        "to_block",
      "follow",         "min_unique_callers", "caller_window_days", "caller_history",   "adversarial_labels",
      "fund_trace_depth", "workers",         "max_retries",       "initial_backoff_ms", "alerts",
      "reports",        "seed",              "no_verified_feature", "remote_signatures",
      "transformer_d_model", "transformer_heads", "transformer_layers", "transformer_d_ff", "transformer_max_length",
      "transformer_dropout", "transformer_learning_rate", "transformer_epochs", "transformer_patience",
      "transformer_batch_size"};
  return keys;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const std::string v(trim(value));
  if (key == "rpc_url") endpoints.rpc.url = v;
  else if (key == "rpc_api_key") endpoints.rpc.api_key = v;
  else if (key == "explorer_url") endpoints.explorer.url = v;
  else if (key == "explorer_api_key") endpoints.explorer.api_key = v;
  else if (key == "signatures_url") endpoints.signatures.url = v;
  else if (key == "timeout_seconds") endpoints.timeout_seconds = static_cast<int>(parse_uint(key, v));
  else if (key == "snapshot") snapshot = v;
  else if (key == "mode") {
    try {
      mode = chain::parse_mode(v);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("mode: ") + e.what());
    }
  } else if (key == "label_db") label_db = v;
  else if (key == "signature_db") signature_db = v;
  else if (key == "flashloan_list") flashloan_list = v;
  else if (key == "token_list") token_list = v;
  else if (key == "model") model = v;
  else if (key == "from_block") from_block = v.empty() ? std::nullopt : std::optional(parse_uint(key, v));
  else if (key == "to_block") to_block = v.empty() ? std::nullopt : std::optional(parse_uint(key, v));
  else if (key == "follow") follow = parse_bool(key, v);
  else if (key == "min_unique_callers") min_unique_callers = parse_uint(key, v);
  else if (key == "caller_window_days") caller_window_days = static_cast<std::int64_t>(parse_uint(key, v));
  else if (key == "caller_history") caller_history = v;
  else if (key == "adversarial_labels") adversarial_labels = v;
  else if (key == "fund_trace_depth") fund_trace_depth = parse_uint(key, v);
  else if (key == "workers") workers = parse_uint(key, v);
  else if (key == "max_retries") max_retries = static_cast<int>(parse_uint(key, v));
  else if (key == "initial_backoff_ms") initial_backoff_ms = static_cast<std::int64_t>(parse_uint(key, v));
  else if (key == "alerts") alerts = v;
  else if (key == "reports") reports = v;
  else if (key == "seed") seed = parse_uint(key, v);
  else if (key == "no_verified_feature") no_verified_feature = parse_bool(key, v);
  else if (key == "remote_signatures") remote_signatures = parse_bool(key, v);
  else if (key == "transformer_d_model") transformer.d_model = parse_uint(key, v);
  else if (key == "transformer_heads") transformer.heads = parse_uint(key, v);
  else if (key == "transformer_layers") transformer.layers = parse_uint(key, v);
  else if (key == "transformer_d_ff") transformer.d_ff = parse_uint(key, v);
  else if (key == "transformer_max_length") transformer.max_length = parse_uint(key, v);
  else if (key == "transformer_dropout") transformer.dropout = parse_double(key, v);
  else if (key == "transformer_learning_rate") transformer.learning_rate = parse_double(key, v);
  else if (key == "transformer_epochs") transformer.epochs = parse_uint(key, v);
  else if (key == "transformer_patience") transformer.patience = parse_uint(key, v);
  else if (key == "transformer_batch_size") transformer.batch_size = parse_uint(key, v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

void PipelineConfig::apply_text(const std::string& text, const std::string& origin) {
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    try {
      set(key, std::string(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void PipelineConfig::apply_env(const std::map<std::string, std::string>& env) {
  for (const auto& key : config_keys()) {
    std::string name = "SENTINEL_" + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (auto it = env.find(name); it != env.end()) {
      try {
        set(key, it->second);
      } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }
  }
}

std::size_t PipelineConfig::effective_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string PipelineConfig::describe() const {
  std::ostringstream os;
  os << "rpc_url = " << endpoints.rpc.url << "\n"
     << "explorer_url = " << endpoints.explorer.url << "\n"
     << "signatures_url = " << endpoints.signatures.url << "\n"
     << "timeout_seconds = " << endpoints.timeout_seconds << "\n"
     << "snapshot = " << snapshot << "\n"
     << "mode = " << chain::mode_name(mode) << "\n"
     << "label_db = " << label_db << "\n"
     << "signature_db = " << signature_db << "\n"
     << "flashloan_list = " << flashloan_list << "\n"
     << "token_list = " << token_list << "\n"
     << "model = " << model << "\n"
     << "from_block = " << (from_block ? std::to_string(*from_block) : "") << "\n"
     << "to_block = " << (to_block ? std::to_string(*to_block) : "") << "\n"
     << "follow = " << (follow ? "true" : "false") << "\n"
     << "min_unique_callers = " << min_unique_callers << "\n"
     << "caller_window_days = " << caller_window_days << "\n"
     << "caller_history = " << caller_history << "\n"
     << "adversarial_labels = " << adversarial_labels << "\n"
     << "fund_trace_depth = " << fund_trace_depth << "\n"
     << "workers = " << workers << "\n"
     << "max_retries = " << max_retries << "\n"
     << "initial_backoff_ms = " << initial_backoff_ms << "\n"
     << "alerts = " << alerts << "\n"
     << "reports = " << reports << "\n"
     << "seed = " << seed << "\n"
     << "no_verified_feature = " << (no_verified_feature ? "true" : "false") << "\n"
     << "remote_signatures = " << (remote_signatures ? "true" : "false") << "\n"
     << "transformer_d_model = " << transformer.d_model << "\n"
     << "transformer_heads = " << transformer.heads << "\n"
     << "transformer_layers = " << transformer.layers << "\n"
     << "transformer_d_ff = " << transformer.d_ff << "\n"
     << "transformer_max_length = " << transformer.max_length << "\n"
     << "transformer_dropout = " << transformer.dropout << "\n"
     << "transformer_learning_rate = " << transformer.learning_rate << "\n"
     << "transformer_epochs = " << transformer.epochs << "\n"
     << "transformer_patience = " << transformer.patience << "\n"
     << "transformer_batch_size = " << transformer.batch_size << "\n";
  return os.str();
}

std::map<std::string, std::string> sentinel_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (!starts_with(kv, "SENTINEL_")) continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return out;
}

PipelineConfig resolve_config(const std::map<std::string, std::string>& env, const std::string& config_path,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  PipelineConfig c;
  c.apply_env(env);
  if (!config_path.empty()) c.apply_text(read_file(config_path), config_path);
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

}  // namespace sentinel::pipeline
