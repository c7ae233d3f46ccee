#pragma once

#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentinel/ml/ensemble.hpp"
#include "sentinel/pipeline/analyzer.hpp"

namespace sentinel::pipeline {

/// Ensemble settings from the configuration (seed, verified ablation,
/// transformer sizes).
ml::EnsembleConfig ensemble_config(const PipelineConfig& c);

// ---- analyze ----

/// `target` is a 0x-prefixed 20-byte address or a bytecode file path.
AnalysisReport analyze_target(Analyzer& analyzer, const std::string& target);

struct AnalyzeOutput {
  std::string report_path;  ///< JSON report file; empty = none
  bool json = false;        ///< print the JSON report instead of the summary
};

/// Returns the report's exit code (0 benign, 10 adversarial, 2 error).
int cmd_analyze(Analyzer& analyzer, const std::string& target, const AnalyzeOutput& output, std::ostream& out);

// ---- dataset-build ----

class DataIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One address per line; `#` comments and blank lines skipped.
std::set<Address> parse_address_list(std::string_view text);

/// Deployment events of config.from_block..config.to_block (to_block
/// defaults to the head). A replay miss ends the range; gaps are returned
/// in `gaps`.
std::vector<chain::DeploymentEvent> collect_events(Analyzer& analyzer, std::vector<std::string>* gaps = nullptr);

struct DatasetBuild {
  std::vector<features::FeatureRecord> records;  ///< event order
  std::size_t events = 0;
  std::size_t adversarial = 0;
  std::size_t below_threshold = 0;
  std::size_t standard = 0;
  std::size_t failed = 0;
  std::vector<std::string> notes;
};

/// Adversarial rows are the labeled events; benign rows are the other
/// events with enough distinct callers in the window that are not token
/// or proxy contracts. Throws DataIntegrityError when a labeled address is
/// not among the events.
DatasetBuild build_dataset(Analyzer& analyzer, const std::vector<chain::DeploymentEvent>& events,
                           chain::CallerHistoryProvider& history, const std::set<Address>& adversarial);

/// Events from the configured range, caller history and adversarial
/// labels from the configured files; writes the dataset to `output`.
DatasetBuild cmd_dataset_build(Analyzer& analyzer, const std::string& output, std::ostream& out);

// ---- train / eval / synthesize ----

struct TrainOutcome {
  ml::TrainReport report;
  Hash32 bundle_hash;
};

TrainOutcome cmd_train(const PipelineConfig& config, const std::string& dataset, const std::string& bundle_dir,
                       std::ostream& out);

enum class EvalMode { Table, CrossValidation, Importance };

/// Table: the 9 rows on the chronological test slice. CrossValidation:
/// retrains on every expanding-window fold and scores the selected meta.
/// Importance: permutation importance of the encoded features through the
/// selected candidate and meta on the test slice.
void cmd_eval(const PipelineConfig& config, const std::string& dataset, const std::string& bundle_dir, EvalMode mode,
              std::size_t cv_splits, std::ostream& out);

void cmd_synthesize(const PipelineConfig& config, std::size_t contracts, double adversarial_fraction,
                    const std::string& output, std::ostream& out);

}  // namespace sentinel::pipeline
