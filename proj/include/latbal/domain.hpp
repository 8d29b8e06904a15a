// domain.hpp - Workload and host value types shared by every other module.
#pragma once

#include <compare>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latbal {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or domain value (bad percentages, unknown profile, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or schema-violating input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Regression failure (rank-deficient design, too few observations).
class FitError : public Error {
 public:
  using Error::Error;
};

// No feasible placement exists for a workload.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// I/O signature of one workload. Percentages and block sizes are stored as
// integers; the test vectors only ever use whole-number values and integer
// storage keeps multiset dedup and sorting exact.
struct AccessPattern {
  int write_ratio = 0;    // percent of requests that are writes, 0..100
  int randomness = 100;   // percent of requests that are random, 1..100
  int block_size_kb = 4;  // KB per request, >= 1

  // Throws ConfigError when a field is out of range. A randomness of 0
  // (pure sequential) is rejected outright.
  void validate() const;

  friend auto operator<=>(const AccessPattern&, const AccessPattern&) = default;
};

struct Workload {
  std::string id;
  AccessPattern pattern;
  double volume_gb = 0.0;  // provisioned volume size, > 0

  void validate() const;

  friend bool operator==(const Workload&, const Workload&) = default;
};

// Static description of a storage host. Hardware details are abstracted into
// two lookup keys: one selecting a ground-truth oracle configuration and one
// selecting a fitted model set.
struct HostProfile {
  std::string name;
  double total_capacity_gb = 0.0;
  std::string ground_truth_key;
  std::string model_set_key;

  void validate() const;

  friend bool operator==(const HostProfile&, const HostProfile&) = default;
};

// One latency measurement of a host, in microseconds.
struct LatencySample {
  double average_us = 0.0;
  double p99_read_us = 0.0;
  double p99_write_us = 0.0;

  friend bool operator==(const LatencySample&, const LatencySample&) = default;
};

// A host plus its resident workloads. Mutations preserve the capacity
// invariant: the sum of resident volume sizes never exceeds total capacity.
class HostState {
 public:
  HostState() = default;
  explicit HostState(HostProfile profile, std::vector<Workload> workloads = {});

  const HostProfile& profile() const { return profile_; }
  const std::vector<Workload>& workloads() const { return workloads_; }

  double used_gb() const;
  double free_gb() const { return profile_.total_capacity_gb - used_gb(); }

  bool has(const std::string& workload_id) const;

  // Throws InfeasibleError when the workload does not fit.
  void add(Workload workload);
  // Removes and returns the workload with the given id; throws Error if absent.
  Workload remove(const std::string& workload_id);

 private:
  HostProfile profile_;
  std::vector<Workload> workloads_;
};

// Sum of write ratios over a non-empty workload collection (percent-sum).
int write_ratio_sum(std::span<const Workload> workloads);

// Sum of block sizes over a non-empty workload collection (KB-sum).
int block_size_sum(std::span<const Workload> workloads);

}  // namespace latbal
