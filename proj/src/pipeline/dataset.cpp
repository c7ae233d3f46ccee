#include "sentinel/pipeline/dataset.hpp"

#include <sstream>
#include <stdexcept>

#include "sentinel/common/text.hpp"
#include "sentinel/features/encoding.hpp"

namespace sentinel::pipeline {

using features::FeatureRecord;

Json record_to_json(const FeatureRecord& r) {
  const auto& d = r.deployment;
  const auto& m = r.implementation;
  Json j;
  j["contract_id"] = r.contract_id;
  j["deploy_timestamp"] = r.deploy_timestamp;
  j["label"] = r.label ? Json(*r.label) : Json(nullptr);
  j["deployment"] = {{"nonce", d.nonce},
                     {"fund_source", std::string(fundsource::category_name(d.fund_source))},
                     {"value_flag", d.value_flag},
                     {"input_data_length", d.input_data_length},
                     {"gas_used", d.gas_used},
                     {"verified", d.verified}};
  j["implementation"] = {{"func_count", m.func_count},
                         {"public_func_count", m.public_func_count},
                         {"flashloan_callback_count", m.flashloan_callback_count},
                         {"flashloan_callback_ratio", m.flashloan_callback_ratio},
                         {"token_call_count", m.token_call_count},
                         {"token_call_ratio", m.token_call_ratio},
                         {"max_token_call_count", m.max_token_call_count},
                         {"avg_token_call_count", m.avg_token_call_count},
                         {"delegate_call_count", m.delegate_call_count},
                         {"selfdestruct_count", m.selfdestruct_count}};
  j["pscft"] = r.pscft;
  return j;
}

FeatureRecord record_from_json(const Json& j) {
  FeatureRecord r;
  r.contract_id = j.at("contract_id").get<std::string>();
  r.deploy_timestamp = j.at("deploy_timestamp").get<std::int64_t>();
  if (j.contains("label") && !j.at("label").is_null()) {
    const int l = j.at("label").get<int>();
    if (l != 0 && l != 1) throw std::runtime_error("label must be 0, 1 or null");
    r.label = l;
  }
  const auto& d = j.at("deployment");
  r.deployment.nonce = d.at("nonce").get<std::uint64_t>();
  const auto fund = d.at("fund_source").get<std::string>();
  const auto cat = fundsource::parse_category(fund);
  if (!cat) throw std::runtime_error("unknown fund_source '" + fund + "'");
  r.deployment.fund_source = *cat;
  r.deployment.value_flag = d.at("value_flag").get<bool>();
  r.deployment.input_data_length = d.at("input_data_length").get<std::uint64_t>();
  r.deployment.gas_used = d.at("gas_used").get<std::uint64_t>();
  r.deployment.verified = d.at("verified").get<bool>();
  const auto& m = j.at("implementation");
  auto& f = r.implementation;
  f.func_count = m.at("func_count").get<std::uint32_t>();
  f.public_func_count = m.at("public_func_count").get<std::uint32_t>();
  f.flashloan_callback_count = m.at("flashloan_callback_count").get<std::uint32_t>();
  f.flashloan_callback_ratio = m.at("flashloan_callback_ratio").get<double>();
  f.token_call_count = m.at("token_call_count").get<std::uint32_t>();
  f.token_call_ratio = m.at("token_call_ratio").get<double>();
  f.max_token_call_count = m.at("max_token_call_count").get<std::uint32_t>();
  f.avg_token_call_count = m.at("avg_token_call_count").get<double>();
  f.delegate_call_count = m.at("delegate_call_count").get<std::uint32_t>();
  f.selfdestruct_count = m.at("selfdestruct_count").get<std::uint32_t>();
  r.pscft = j.at("pscft").get<std::string>();
  return r;
}

std::string write_dataset(const std::vector<FeatureRecord>& records) {
  std::ostringstream os;
  Json header = {{"format", "sentinel-dataset"},
                 {"version", kDatasetVersion},
                 {"features", features::feature_names()},
                 {"records", records.size()}};
  os << header.dump() << "\n";
  for (const auto& r : records) os << record_to_json(r).dump() << "\n";
  return os.str();
}

std::vector<FeatureRecord> read_dataset(const std::string& text) {
  std::vector<FeatureRecord> out;
  std::size_t line_no = 0;
  bool header = false;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!header) {
      if (j.value("format", "") != "sentinel-dataset")
        throw std::runtime_error("dataset line 1: missing sentinel-dataset header");
      if (j.value("version", -1) != kDatasetVersion)
        throw std::runtime_error("dataset version " + std::to_string(j.value("version", -1)) + " is not supported");
      header = true;
      continue;
    }
    try {
      out.push_back(record_from_json(j));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header) throw std::runtime_error("dataset is empty");
  return out;
}

void save_dataset(const std::string& path, const std::vector<FeatureRecord>& records) {
  write_file(path, write_dataset(records));
}

std::vector<FeatureRecord> load_dataset(const std::string& path) { return read_dataset(read_file(path)); }

}  // namespace sentinel::pipeline
