#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "sentinel/pipeline/analyzer.hpp"

namespace sentinel::pipeline {

struct MonitorSummary {
  std::size_t events = 0;
  std::size_t analyzed = 0;  ///< reports with status ok
  std::size_t alerts = 0;
  std::size_t failed = 0;  ///< reports with status error
  std::size_t gaps = 0;    ///< blocks or receipts that stayed unavailable
  bool snapshot_exhausted = false;
  std::optional<std::string> producer_error;
};

/// One producer walking blocks in order, config.effective_workers()
/// analysis threads, and the calling thread writing results in
/// (block, tx index) order: alerts are appended to config.alerts and
/// announced on `out`, full reports go to config.reports when set. Gaps
/// and failures are reported on `err`. A replay miss ends the stream.
/// Throws ConfigError without a model.
MonitorSummary run_monitor(Analyzer& analyzer, std::ostream& out, std::ostream& err);

}  // namespace sentinel::pipeline
