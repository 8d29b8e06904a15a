// Fits workload-consolidation latency models against the oracle: one basic
// model per workload count 1..5 plus an extended model for larger counts,
// trained on deduplicated combination test sets and persisted as JSON.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latbal/domain.hpp"
#include "latbal/ground_truth.hpp"

namespace latbal {

// workload_count value marking the extended model (any count above five).
inline constexpr int kExtendedModelCount = 0;

inline const std::vector<int> kDefaultWVector{25, 50, 75};
inline const std::vector<int> kDefaultSVector{4, 8, 32, 128};

struct ConsolidationModel {
  int workload_count = 0;  // 1..5, or kExtendedModelCount
  double intercept = 0.0;
  double w_coef = 0.0;  // 0 when eliminated as insignificant
  double s_coef = 0.0;
  double adjusted_r_squared = 0.0;
  int n_observations = 0;

  // Predicted average latency in µs for the given parameter sums, clamped
  // at zero.
  double predict(int sum_w, int sum_s) const;

  bool operator==(const ConsolidationModel&) const = default;
};

// "1".."5" for basic models, "5plus" for the extended model.
std::string model_label(const ConsolidationModel& model);

struct ModelProvenance {
  std::vector<int> w_vector;
  std::vector<int> s_vector;
  std::uint64_t oracle_seed = 0;

  bool operator==(const ModelProvenance&) const = default;
};

struct ModelSet {
  std::string profile_name;
  std::array<ConsolidationModel, 5> basic;  // index i holds the model for i+1 workloads
  ConsolidationModel extended;
  ModelProvenance created_from;

  // Routing rule: basic model for counts 1..5, extended model above.
  const ConsolidationModel& model_for(std::size_t count) const;

  bool operator==(const ModelSet&) const = default;
};

// One consolidation test case: a multiset of access patterns (kept in sorted
// canonical order) and, once run, its measured sample.
struct TestCase {
  std::vector<AccessPattern> patterns;
  LatencySample measured;
};

// All multisets of size n over the write-ratio × block-size pattern grid,
// with randomness fixed at 100. Count is C(g+n-1, n) for grid size g.
std::vector<TestCase> generate_test_set(int n, const std::vector<int>& w_vector,
                                        const std::vector<int>& s_vector);

// Runs the five test sets against a fresh oracle built from `oracle`, fits
// the five basic models and the extended model (trained on the union of all
// five measurement sets), and returns the complete set.
ModelSet run_modeler(const HostProfile& profile, const OracleConfig& oracle,
                     const std::vector<int>& w_vector = kDefaultWVector,
                     const std::vector<int>& s_vector = kDefaultSVector);

// Predicted average latency for the workloads consolidated on one host.
double predict(const ModelSet& models, std::span<const Workload> workloads);

void save_model_set(const ModelSet& models, const std::string& path);
ModelSet load_model_set(const std::string& path);

}  // namespace latbal
