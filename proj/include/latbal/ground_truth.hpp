// Synthetic latency oracle: produces LatencySamples for a set of co-located
// workloads from per-count linear generators plus Gaussian noise, standing in
// for measurements against a physical storage host.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "latbal/domain.hpp"
#include "latbal/rng.hpp"

namespace latbal {

// One generating model: average latency in microseconds as a linear function
// of the write-ratio sum (percentage points) and block-size sum (KB).
struct CountModel {
  double intercept = 0.0;
  double w_coef = 0.0;
  double s_coef = 0.0;
};

// Optional stress-test nonlinearity: once the block-size sum exceeds the
// threshold, the noiseless mean is scaled by `multiplier`. Off by default;
// never part of the standard experiment path.
struct SaturationHook {
  double threshold_kb = 0.0;
  double multiplier = 1.0;
};

struct OracleConfig {
  std::map<int, CountModel> per_count;  // keyed by workload count 1..5
  std::optional<CountModel> five_plus;  // used for counts above 5
  double noise_sigma_us = 50.0;
  double tail_read_factor = 2.5;
  double tail_write_factor = 4.0;
  std::uint64_t rng_seed = 0;
  std::optional<SaturationHook> saturation;

  void validate() const;

  // Generator used for `count` workloads: the exact per-count entry when one
  // exists, the five-plus entry otherwise. Throws ConfigError when neither
  // is configured.
  const CountModel& model_for(std::size_t count) const;
};

// Owns its RNG stream: one instance is not safe for concurrent measure()
// calls, but distinct instances run independently.
class Oracle {
 public:
  explicit Oracle(OracleConfig config);

  const OracleConfig& config() const { return config_; }

  // Measures the given co-located workloads. With noise_sigma_us == 0 the
  // result is a pure function of the parameter sums and workload count, and
  // the RNG stream does not advance.
  LatencySample measure(std::span<const Workload> workloads);

 private:
  OracleConfig config_;
  SeededRng rng_;
};

// Built-in generator profiles: "ssd1" (consumer-class device, larger
// capacity) and "ssd2" (datacenter-class device).
std::map<std::string, OracleConfig> builtin_profiles();

OracleConfig oracle_config_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json oracle_config_to_json(const OracleConfig& config);

OracleConfig load_oracle_config(const std::string& path);
void save_oracle_config(const OracleConfig& config, const std::string& path);

}  // namespace latbal
