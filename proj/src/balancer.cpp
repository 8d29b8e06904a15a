#include "latbal/balancer.hpp"

#include <algorithm>

namespace latbal {
namespace {

const ModelSet& models_for(const HostState& host, const ModelSetIndex& models) {
  const auto it = models.find(host.profile().model_set_key);
  if (it == models.end()) {
    throw ConfigError("balancer: no model set \"" + host.profile().model_set_key +
                      "\" for host \"" + host.profile().name + "\"");
  }
  return it->second;
}

double host_latency(const HostState& host, const ModelSetIndex& models) {
  if (host.workloads().empty()) return 0.0;
  return predict(models_for(host, models), host.workloads());
}

}  // namespace

double predict_perf(const HostState& host, const Workload& candidate, const ModelSet& models) {
  std::vector<Workload> combined(host.workloads().begin(), host.workloads().end());
  combined.push_back(candidate);
  return predict(models, combined);
}

MigrationPlan load_balance(std::span<const HostState> cluster, const ModelSetIndex& models,
                           const BalanceOptions& options) {
  std::vector<HostState> work(cluster.begin(), cluster.end());
  for (std::size_t i = 0; i < work.size(); ++i) {
    models_for(work[i], models);  // fail fast on a missing model set
    for (std::size_t j = i + 1; j < work.size(); ++j) {
      if (work[i].profile().name == work[j].profile().name) {
        throw ConfigError("balancer: duplicate host name \"" + work[i].profile().name + "\"");
      }
    }
  }

  struct Item {
    Workload workload;
    std::size_t host;
  };
  std::vector<Item> items;
  for (std::size_t h = 0; h < work.size(); ++h) {
    for (const Workload& w : work[h].workloads()) {
      for (const Item& other : items) {
        if (other.workload.id == w.id) {
          throw ConfigError("balancer: duplicate workload id \"" + w.id + "\"");
        }
      }
      items.push_back({w, h});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.workload.pattern.block_size_kb != b.workload.pattern.block_size_kb) {
      return a.workload.pattern.block_size_kb > b.workload.pattern.block_size_kb;
    }
    return a.workload.id < b.workload.id;
  });

  MigrationPlan plan;
  for (Item& item : items) {
    const std::size_t current = item.host;
    if (options.exclude_from_current_host) {
      item.workload = work[current].remove(item.workload.id);
    }

    BalanceStep step;
    step.workload_id = item.workload.id;
    step.block_size_kb = item.workload.pattern.block_size_kb;
    std::size_t best = work.size();
    double best_latency = 0.0;
    for (std::size_t h = 0; h < work.size(); ++h) {
      const bool resident = !options.exclude_from_current_host && h == current;
      if (!resident && work[h].free_gb() < item.workload.volume_gb) continue;
      const double predicted = predict_perf(work[h], item.workload, models_for(work[h], models));
      step.candidate_latencies[work[h].profile().name] = predicted;
      const bool better =
          best == work.size() || predicted < best_latency ||
          (predicted == best_latency &&
           (work[h].free_gb() > work[best].free_gb() ||
            (work[h].free_gb() == work[best].free_gb() &&
             work[h].profile().name < work[best].profile().name)));
      if (better) {
        best = h;
        best_latency = predicted;
      }
    }
    if (best == work.size()) {
      throw InfeasibleError("balancer: workload \"" + item.workload.id +
                            "\" fits no host's free capacity");
    }

    if (options.exclude_from_current_host) {
      work[best].add(item.workload);
    } else if (best != current) {
      work[best].add(work[current].remove(item.workload.id));
    }
    if (best != current) {
      plan.moves.push_back(
          {item.workload.id, work[current].profile().name, work[best].profile().name});
    }
    item.host = best;
    if (options.trace) {
      step.chosen_host = work[best].profile().name;
      options.trace->push_back(std::move(step));
    }
  }

  for (const HostState& host : work) {
    plan.predicted_host_latencies[host.profile().name] = host_latency(host, models);
  }
  return plan;
}

std::size_t available_capacity_schedule(std::span<const HostState> cluster,
                                        const Workload& workload) {
  std::size_t best = cluster.size();
  for (std::size_t h = 0; h < cluster.size(); ++h) {
    if (cluster[h].free_gb() < workload.volume_gb) continue;
    const bool better = best == cluster.size() || cluster[h].free_gb() > cluster[best].free_gb() ||
                        (cluster[h].free_gb() == cluster[best].free_gb() &&
                         cluster[h].profile().name < cluster[best].profile().name);
    if (better) best = h;
  }
  if (best == cluster.size()) {
    throw InfeasibleError("scheduler: workload \"" + workload.id +
                          "\" fits no host's free capacity");
  }
  return best;
}

void apply_plan(std::vector<HostState>& cluster, const MigrationPlan& plan) {
  for (const Move& move : plan.moves) {
    HostState* from = nullptr;
    HostState* to = nullptr;
    for (HostState& host : cluster) {
      if (host.profile().name == move.from_host) from = &host;
      if (host.profile().name == move.to_host) to = &host;
    }
    if (!from || !to) {
      throw ConfigError("apply_plan: unknown host in move for workload \"" + move.workload_id +
                        "\"");
    }
    to->add(from->remove(move.workload_id));
  }
}

}  // namespace latbal
