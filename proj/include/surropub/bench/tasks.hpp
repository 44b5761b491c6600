#pragma once

#include "surropub/bench/records.hpp"
#include "surropub/dp/classifier.hpp"
#include "surropub/dp/synthesizer.hpp"
#include "surropub/metrics.hpp"
#include "surropub/schema.hpp"

namespace surropub::bench {

// Task 1: classifier pretraining. Task 2: synthesizer hyperparameter tuning
// degradation. Task 3: privacy-utility curve estimation. Candidates are
// surrogate (or traditional) public datasets compared against the private
// reference.

struct ClassifierGrid {
  std::vector<dp::PretrainParams> pretrain;
  std::vector<dp::DpSgdParams> finetune;
  static ClassifierGrid paper_default();
  static ClassifierGrid smoke();  // single cell, for fast runs and tests
};

struct Task1Options {
  std::vector<double> epsilons = {1, 2, 4, 8, 16};
  int n_seeds = 10;
  std::uint64_t base_seed = 0;
  std::string target;
  double delta = 1e-5;
  ClassifierGrid grid = ClassifierGrid::paper_default();
  std::size_t workers = 1;
};

struct Task1Cell {
  double epsilon = 0.0;
  double mean_advantage_grid = 0.0;   // averaged over the whole grid
  double mean_advantage_best = 0.0;   // pretrain config picked on candidate validation
  double mean_auc_grid = 0.0;
  double mean_auc_best = 0.0;
  std::string best_pretrain_config;
  std::size_t failed_runs = 0;
};

struct Task1CandidateResult {
  std::string name;
  std::vector<Task1Cell> by_epsilon;
};

struct Task1Result {
  std::vector<double> control_auc_by_epsilon;  // no-pretraining mean AUC
  std::vector<Task1CandidateResult> candidates;
  std::vector<BenchmarkRecord> records;
  std::size_t failed_runs = 0;
};

Task1Result run_task1(const Dataset& private_data,
                      const std::vector<std::pair<std::string, Dataset>>& candidates,
                      const Task1Options& options, const RecordSink* sink = nullptr);

// Shared synthesizer sweep machinery for Tasks 2 and 3.

struct SynthConfig {
  std::string mechanism;  // "privbayes" | "noisy_marginals"
  dp::PrivBayesParams privbayes;
  std::string id() const;
};

std::vector<SynthConfig> synth_grid(const std::string& mechanism);

struct SynthSweepOptions {
  std::string mechanism = "privbayes";
  std::vector<double> epsilons = {1, 2, 4, 8, 16};
  int n_seeds = 10;
  std::uint64_t base_seed = 0;
  std::string target;  // empty = skip classification metrics
  std::size_t workers = 1;
  // Default: average seeds first, then pick the best config. The alternative
  // picks the best config per seed and averages the picked values.
  bool select_per_seed = false;
};

/// Mean (over seeds) metric values for fitting on `data` and evaluating the
/// synthetic output against `data` itself. values[config][epsilon] is NaN
/// when every seed failed. Seeds derive only from (base_seed, config,
/// epsilon, seed index), never from the dataset, so identical datasets give
/// identical sweeps.
struct SynthSweep {
  std::vector<SynthConfig> configs;
  std::vector<double> epsilons;
  // [config][epsilon][metric] mean over seeds; seed_values keeps the per-seed
  // numbers for standard errors.
  std::vector<std::vector<metrics::MetricVector>> values;
  std::vector<std::vector<std::vector<metrics::MetricVector>>> seed_values;
  std::size_t failed_runs = 0;
};

/// `label` names the dataset in emitted records ("private" or the candidate
/// name); a sink streams per-run records and resumes from completed ones.
SynthSweep evaluate_synth_sweep(const Dataset& data, const SynthSweepOptions& options,
                                const std::string& label = "private",
                                const RecordSink* sink = nullptr);

struct DegradationRow {
  std::string candidate;
  std::string mechanism;
  std::string metric;  // metric name, or "group:<name>" for aggregates
  double epsilon = 0.0;
  std::string opt_config;
  std::string chosen_config;
  double opt_value = 0.0;
  double chosen_value = 0.0;  // chosen config evaluated on the private reference
  double degradation = 0.0;
  bool relative = false;
  double std_error = 0.0;
};

struct Task2Options {
  SynthSweepOptions sweep;
  std::vector<std::string> relative_metrics;  // rendered as percent degradation
};

std::vector<DegradationRow> run_task2(
    const Dataset& private_data,
    const std::vector<std::pair<std::string, Dataset>>& candidates,
    const Task2Options& options, const RecordSink* sink = nullptr);

struct CurvePair {
  std::string candidate;
  std::string metric_group;
  std::vector<double> epsilons;
  std::vector<double> candidate_values;  // candidate-chosen configs on candidate
  std::vector<double> private_values;    // private-chosen configs on private
  double l1 = 0.0;
  double l2 = 0.0;
};

struct Task3CandidateResult {
  std::string name;
  std::vector<CurvePair> groups;
  double mean_l1 = 0.0;  // groups weighted equally
  double mean_l2 = 0.0;
};

std::vector<Task3CandidateResult> run_task3(
    const Dataset& private_data,
    const std::vector<std::pair<std::string, Dataset>>& candidates,
    const SynthSweepOptions& options, const RecordSink* sink = nullptr);

}  // namespace surropub::bench
