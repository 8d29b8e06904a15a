// Consolidation experiment harness: random workloads are placed by the
// available-capacity baseline, rebalanced by the load balancer, and measured
// against the oracle before and after, across many independent trials.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "latbal/balancer.hpp"
#include "latbal/domain.hpp"
#include "latbal/ground_truth.hpp"
#include "latbal/modeler.hpp"

namespace latbal {

struct ExperimentConfig {
  std::vector<HostProfile> hosts;
  int min_workloads = 0;  // inclusive range of the per-trial workload count
  int max_workloads = 0;
  std::vector<int> w_vector;  // write ratio, percent
  std::vector<int> s_vector;  // block size, KB
  std::vector<int> c_vector;  // volume size, GB
  int trials = 1;
  std::uint64_t rng_seed = 0;
  // Oracle configs by ground_truth_key; keys not listed here fall back to the
  // built-in profiles.
  std::map<std::string, OracleConfig> oracles;
  // Optional pre-fitted model files by model_set_key; keys not listed are
  // fitted in-run against the matching oracle.
  std::map<std::string, std::string> model_files;

  void validate() const;
};

struct TrialResult {
  std::vector<LatencySample> baseline;  // aligned with ExperimentConfig::hosts
  std::vector<LatencySample> balanced;
  int moves = 0;
  bool aborted = false;  // workload draw stayed infeasible after all retries
};

struct AggregateMetrics {
  double variance_reduction_avg = 0.0;  // 1 - var(after)/var(before), 0/0 -> 0
  double max_avg_before = 0.0;
  double max_avg_after = 0.0;
  double variance_reduction_p99_read = 0.0;
  double variance_reduction_p99_write = 0.0;
  double slo_avg_before = 0.0;
  double slo_avg_after = 0.0;
  double slo_read_before = 0.0;
  double slo_read_after = 0.0;
  double slo_write_before = 0.0;
  double slo_write_after = 0.0;
};

struct ExperimentReport {
  std::vector<TrialResult> per_trial;
  AggregateMetrics aggregate;
};

// Optional instrumentation captured by run_single_trial.
struct TrialArtifacts {
  std::vector<HostState> baseline_cluster;
  std::vector<HostState> balanced_cluster;
  MigrationPlan plan;
};

// Oracle config for one ground_truth_key: the experiment's own entry if
// present, otherwise the built-in profile of that name.
OracleConfig resolve_oracle(const ExperimentConfig& config, const std::string& key);

// Model sets for every model_set_key in the config: loaded from model_files
// entries when given, otherwise fitted in-run against the key's oracle with a
// seed derived from the experiment seed. Hosts sharing a model_set_key must
// agree on the ground_truth_key.
ModelSetIndex resolve_model_sets(const ExperimentConfig& config);

// One independent trial: draws the workload set (redrawn up to 10 times on
// infeasible placement, then marked aborted), places it with the baseline
// scheduler, measures, balances, and measures again.
TrialResult run_single_trial(const ExperimentConfig& config, const ModelSetIndex& models,
                             int trial_index, TrialArtifacts* artifacts = nullptr);

// Runs all trials (in parallel when jobs > 1; results are identical either
// way) and aggregates the pooled per-host samples of non-aborted trials.
ExperimentReport run_experiment(const ExperimentConfig& config, const ModelSetIndex& models,
                                int jobs = 1);

// Nearest-rank 99th percentile: the value at 1-based index ceil(0.99 * N) in
// ascending order.
double supported_slo(std::span<const double> samples);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& where);
ExperimentConfig load_experiment_config(const std::string& path);

nlohmann::json report_to_json(const ExperimentReport& report, const ExperimentConfig& config);
void write_report_json(const ExperimentReport& report, const ExperimentConfig& config,
                       const std::string& path);
// One row per non-aborted trial, host, and phase:
// trial,host,phase,avg_us,p99_read_us,p99_write_us
void write_report_csv(const ExperimentReport& report, const ExperimentConfig& config,
                      const std::string& path);

}  // namespace latbal
