#include "latbal/domain.hpp"

#include <algorithm>
#include <numeric>

namespace latbal {

void AccessPattern::validate() const {
  if (write_ratio < 0 || write_ratio > 100) {
    throw ConfigError("access pattern: write_ratio " + std::to_string(write_ratio) +
                      " outside [0, 100]");
  }
  if (randomness <= 0 || randomness > 100) {
    throw ConfigError("access pattern: randomness " + std::to_string(randomness) +
                      " outside (0, 100]; pure sequential workloads are not modeled");
  }
  if (block_size_kb < 1) {
    throw ConfigError("access pattern: block_size_kb " + std::to_string(block_size_kb) +
                      " must be >= 1");
  }
}

void Workload::validate() const {
  pattern.validate();
  if (id.empty()) {
    throw ConfigError("workload: empty id");
  }
  if (volume_gb <= 0.0) {
    throw ConfigError("workload " + id + ": volume_gb must be positive");
  }
}

void HostProfile::validate() const {
  if (name.empty()) {
    throw ConfigError("host profile: empty name");
  }
  if (total_capacity_gb <= 0.0) {
    throw ConfigError("host profile " + name + ": total_capacity_gb must be positive");
  }
}

HostState::HostState(HostProfile profile, std::vector<Workload> workloads)
    : profile_(std::move(profile)) {
  profile_.validate();
  for (auto& w : workloads) {
    add(std::move(w));
  }
}

double HostState::used_gb() const {
  return std::accumulate(workloads_.begin(), workloads_.end(), 0.0,
                         [](double acc, const Workload& w) { return acc + w.volume_gb; });
}

bool HostState::has(const std::string& workload_id) const {
  return std::any_of(workloads_.begin(), workloads_.end(),
                     [&](const Workload& w) { return w.id == workload_id; });
}

void HostState::add(Workload workload) {
  workload.validate();
  if (has(workload.id)) {
    throw Error("host " + profile_.name + ": duplicate workload id " + workload.id);
  }
  if (workload.volume_gb > free_gb()) {
    throw InfeasibleError("host " + profile_.name + ": workload " + workload.id + " (" +
                          std::to_string(workload.volume_gb) + " GB) exceeds free capacity");
  }
  workloads_.push_back(std::move(workload));
}

Workload HostState::remove(const std::string& workload_id) {
  auto it = std::find_if(workloads_.begin(), workloads_.end(),
                         [&](const Workload& w) { return w.id == workload_id; });
  if (it == workloads_.end()) {
    throw Error("host " + profile_.name + ": no workload " + workload_id);
  }
  Workload out = std::move(*it);
  workloads_.erase(it);
  return out;
}

int write_ratio_sum(std::span<const Workload> workloads) {
  if (workloads.empty()) {
    throw Error("write_ratio_sum: undefined for an empty workload collection");
  }
  int sum = 0;
  for (const auto& w : workloads) sum += w.pattern.write_ratio;
  return sum;
}

int block_size_sum(std::span<const Workload> workloads) {
  if (workloads.empty()) {
    throw Error("block_size_sum: undefined for an empty workload collection");
  }
  int sum = 0;
  for (const auto& w : workloads) sum += w.pattern.block_size_kb;
  return sum;
}

}  // namespace latbal
