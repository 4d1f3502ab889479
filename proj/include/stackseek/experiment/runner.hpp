#ifndef STACKSEEK_EXPERIMENT_RUNNER_HPP
#define STACKSEEK_EXPERIMENT_RUNNER_HPP

#include "stackseek/experiment/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stackseek::experiment {

/// A scenario ready for Algorithm 1, with its selection oracle.
struct Instance {
  SeekProblem<double> problem;
  SelectionOracle<double> selection;
};

Instance make_instance(const ExperimentConfig& cfg);
SeekOptions<double> seek_options(const ExperimentConfig& cfg);
ScheduleParams<double> schedule_for(const ExperimentConfig& cfg, const Instance& inst);

/// One leader run with the given seed (no files written).
Trace<double> run_seek(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t seed);

/// One regime run of the illustrative game (no files written).
scenarios::RegimeTrace run_illustrative(const ExperimentConfig& cfg);

void write_trace_jsonl(std::ostream& out, const Trace<double>& trace);
void write_trace_jsonl(std::ostream& out, const scenarios::RegimeTrace& trace);

/// Running minimum of the J0 column.
std::vector<double> best_so_far(const std::vector<double>& values);

struct ReplicateResult {
  std::uint64_t seed = 0;
  std::string trace_path;
  long records = 0;
  std::optional<std::string> fault;
  std::vector<double> y_final;
  double final_J0 = 0;
  std::vector<double> best_J0;
  std::vector<double> residuals;  // max of the two inner residuals per iteration
  std::optional<double> stationarity;
  double wall_seconds = 0;
};

struct SummaryMetrics {
  std::vector<ReplicateResult> replicates;
  std::string summary_csv;
  std::string summary_json;
  double final_J0 = 0;             // mean over replicates
  std::optional<double> stationarity;  // mean over replicates
  double wall_seconds = 0;
  bool ok() const;
};

/// Runs every replicate (seeds seed, seed + 1, ...) and writes
/// <name>_seed<S>.jsonl per replicate, <name>.csv and <name>_summary.json.
/// Throws std::runtime_error when the output directory cannot be written.
SummaryMetrics run_experiment(const ExperimentConfig& cfg);

/// Reference values from the analytic or grid oracles; writes
/// <name>_oracle.json and returns its text.
std::string run_oracle(const ExperimentConfig& cfg);

struct CheckLine {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// Sampling audits of the declared assumptions.
std::vector<CheckLine> run_checks(const ExperimentConfig& cfg, int samples = 1000);

}  // namespace stackseek::experiment

#endif  // STACKSEEK_EXPERIMENT_RUNNER_HPP
