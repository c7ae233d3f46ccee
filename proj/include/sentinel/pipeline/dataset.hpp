#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sentinel/features/features.hpp"

namespace sentinel::pipeline {

using Json = nlohmann::json;

inline constexpr int kDatasetVersion = 1;

/// First line: {"format": "sentinel-dataset", "version": 1, "features": [...]}.
/// Then one record object per line.
Json record_to_json(const features::FeatureRecord& r);
features::FeatureRecord record_from_json(const Json& j);

std::string write_dataset(const std::vector<features::FeatureRecord>& records);
/// Throws std::runtime_error naming the line on malformed input or a
/// header with another format or version.
std::vector<features::FeatureRecord> read_dataset(const std::string& text);

void save_dataset(const std::string& path, const std::vector<features::FeatureRecord>& records);
std::vector<features::FeatureRecord> load_dataset(const std::string& path);

}  // namespace sentinel::pipeline
