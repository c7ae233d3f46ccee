#pragma once

#include <cstdint>
#include <vector>

#include "sentinel/features/features.hpp"

namespace sentinel::pipeline {

struct SyntheticOptions {
  std::size_t contracts = 2000;
  double adversarial_fraction = 0.1;
  std::uint64_t seed = 1;
  std::int64_t start_timestamp = 1656633600;  ///< 2022-07-01
};

/// Labeled feature records with PSCFT documents, drawn from class
/// conditional distributions shaped after measured deployment statistics:
/// adversarial rows are mostly Anonymous-funded, almost never verified,
/// small, with few public functions, flashloan callbacks and many token
/// calls; benign rows are mostly Safe-funded, verified, larger and wider.
/// Every implementation feature is computed from the same generated
/// function structure that the PSCFT text renders. Timestamps increase
/// with the row index; labels are interleaved at random.
std::vector<features::FeatureRecord> generate_synthetic(const SyntheticOptions& options);

struct SyntheticStats {
  std::size_t adversarial = 0, benign = 0;
  double adv_anonymous = 0, adv_verified = 0, adv_flashloan = 0;
  double benign_verified = 0, benign_safe = 0, benign_flashloan = 0;
};

SyntheticStats synthetic_stats(const std::vector<features::FeatureRecord>& records);

}  // namespace sentinel::pipeline
