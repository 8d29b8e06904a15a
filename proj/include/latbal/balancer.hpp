// Best-fit-decreasing I/O load balancer plus the available-capacity baseline
// scheduler it is compared against.
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "latbal/domain.hpp"
#include "latbal/modeler.hpp"

namespace latbal {

struct Move {
  std::string workload_id;
  std::string from_host;
  std::string to_host;

  bool operator==(const Move&) const = default;
};

struct MigrationPlan {
  std::vector<Move> moves;
  // Model-predicted average latency per host after all moves; 0 for an
  // empty host.
  std::map<std::string, double> predicted_host_latencies;
};

// Per-workload evaluation record, filled when BalanceOptions::trace is set.
// candidate_latencies holds every capacity-feasible host at that step.
struct BalanceStep {
  std::string workload_id;
  int block_size_kb = 0;
  std::map<std::string, double> candidate_latencies;
  std::string chosen_host;
};

struct BalanceOptions {
  // Evaluate the workload's current host with the workload logically removed
  // first, so it is counted once everywhere. Setting this false keeps the
  // literal add-on-top evaluation on the current host as well.
  bool exclude_from_current_host = true;
  std::vector<BalanceStep>* trace = nullptr;
};

// Model sets keyed by HostProfile::model_set_key.
using ModelSetIndex = std::map<std::string, ModelSet>;

// Plans migrations that equalize predicted average latency: processes all
// workloads in nonincreasing block-size order (ties by id) and assigns each
// to the capacity-feasible host with the lowest predicted latency after
// placement. Latency ties go to the host with more free capacity, then the
// lexicographically smaller name. The input cluster is not modified.
MigrationPlan load_balance(std::span<const HostState> cluster, const ModelSetIndex& models,
                           const BalanceOptions& options = {});

// Predicted average latency of `host` after `candidate` is added: the model
// for count n+1 applied to the parameter sums including the candidate.
double predict_perf(const HostState& host, const Workload& candidate, const ModelSet& models);

// Baseline scheduler: among hosts whose free capacity fits the workload,
// picks the one with the most free capacity (ties by name). Returns the index
// into `cluster`; throws InfeasibleError when no host qualifies.
std::size_t available_capacity_schedule(std::span<const HostState> cluster,
                                        const Workload& workload);

// Replays plan.moves in order against the cluster, enforcing capacity at
// every step.
void apply_plan(std::vector<HostState>& cluster, const MigrationPlan& plan);

}  // namespace latbal
