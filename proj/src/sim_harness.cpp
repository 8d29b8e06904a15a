#include "latbal/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "json_util.hpp"

namespace latbal {
namespace {

// Substream tags keeping trial draws, oracle noise, and in-run modeling on
// disjoint RNG streams.
constexpr std::uint64_t kTrialTag = 1;
constexpr std::uint64_t kOracleTag = 2;
constexpr std::uint64_t kModelerTag = 3;

constexpr int kMaxDrawAttempts = 11;  // one initial draw plus ten redraws

double population_variance(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  return var / static_cast<double>(samples.size());
}

double variance_reduction(std::span<const double> before, std::span<const double> after) {
  const double var_before = population_variance(before);
  if (var_before == 0.0) return 0.0;
  return 1.0 - population_variance(after) / var_before;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    throw Error(path + ": cannot open file for writing");
  }
  const std::size_t wrote = std::fwrite(text.data(), 1, text.size(), f);
  const int rc = std::fclose(f);
  if (wrote != text.size() || rc != 0) {
    throw Error(path + ": write failed");
  }
}

nlohmann::json samples_to_json(const std::vector<LatencySample>& samples,
                               const std::vector<HostProfile>& hosts) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t h = 0; h < samples.size(); ++h) {
    out.push_back({{"host", hosts[h].name},
                   {"avg_us", samples[h].average_us},
                   {"p99_read_us", samples[h].p99_read_us},
                   {"p99_write_us", samples[h].p99_write_us}});
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (hosts.empty()) {
    throw ConfigError("experiment config: no hosts");
  }
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    hosts[i].validate();
    for (std::size_t j = i + 1; j < hosts.size(); ++j) {
      if (hosts[i].name == hosts[j].name) {
        throw ConfigError("experiment config: duplicate host name \"" + hosts[i].name + "\"");
      }
    }
  }
  if (min_workloads < 0 || max_workloads < min_workloads) {
    throw ConfigError("experiment config: workload count range must satisfy 0 <= min <= max");
  }
  if (trials < 1) {
    throw ConfigError("experiment config: trials must be at least 1");
  }
  if (w_vector.empty() || s_vector.empty() || c_vector.empty()) {
    throw ConfigError("experiment config: empty test vector");
  }
  for (int w : w_vector) {
    if (w < 0 || w > 100) {
      throw ConfigError("experiment config: write ratio " + std::to_string(w) +
                        " outside 0..100");
    }
  }
  for (int s : s_vector) {
    if (s < 1) {
      throw ConfigError("experiment config: block size " + std::to_string(s) + " below 1 KB");
    }
  }
  for (int c : c_vector) {
    if (c < 1) {
      throw ConfigError("experiment config: volume size " + std::to_string(c) + " below 1 GB");
    }
  }
}

OracleConfig resolve_oracle(const ExperimentConfig& config, const std::string& key) {
  const auto it = config.oracles.find(key);
  if (it != config.oracles.end()) return it->second;
  const auto builtins = builtin_profiles();
  const auto builtin = builtins.find(key);
  if (builtin != builtins.end()) return builtin->second;
  throw ConfigError("experiment config: no oracle for ground_truth_key \"" + key + "\"");
}

ModelSetIndex resolve_model_sets(const ExperimentConfig& config) {
  config.validate();
  std::map<std::string, const HostProfile*> key_owner;
  for (const HostProfile& host : config.hosts) {
    const auto [it, inserted] = key_owner.try_emplace(host.model_set_key, &host);
    if (!inserted && it->second->ground_truth_key != host.ground_truth_key) {
      throw ConfigError("experiment config: model_set_key \"" + host.model_set_key +
                        "\" spans different ground_truth_keys");
    }
  }
  for (const auto& [key, path] : config.model_files) {
    if (!key_owner.contains(key)) {
      throw ConfigError("experiment config: model file for unused model_set_key \"" + key +
                        "\"");
    }
  }

  ModelSetIndex out;
  std::uint64_t index = 0;
  for (const auto& [key, owner] : key_owner) {
    const auto file = config.model_files.find(key);
    if (file != config.model_files.end()) {
      out[key] = load_model_set(file->second);
    } else {
      OracleConfig oracle = resolve_oracle(config, owner->ground_truth_key);
      oracle.rng_seed = mix_seed({config.rng_seed, kModelerTag, index});
      out[key] = run_modeler(*owner, oracle);
    }
    ++index;
  }
  return out;
}

TrialResult run_single_trial(const ExperimentConfig& config, const ModelSetIndex& models,
                             int trial_index, TrialArtifacts* artifacts) {
  config.validate();
  SeededRng draw_rng(
      mix_seed({config.rng_seed, kTrialTag, static_cast<std::uint64_t>(trial_index)}));
  const std::size_t host_count = config.hosts.size();

  TrialResult result;
  std::vector<HostState> cluster;
  bool placed = false;
  for (int attempt = 0; attempt < kMaxDrawAttempts && !placed; ++attempt) {
    cluster.clear();
    for (const HostProfile& profile : config.hosts) {
      cluster.emplace_back(profile);
    }
    const int count = static_cast<int>(draw_rng.uniform_int(
        static_cast<std::uint64_t>(config.min_workloads),
        static_cast<std::uint64_t>(config.max_workloads)));
    std::vector<Workload> drawn;
    drawn.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "w%03d", i + 1);
      const AccessPattern pattern{config.w_vector[draw_rng.index(config.w_vector.size())], 100,
                                  config.s_vector[draw_rng.index(config.s_vector.size())]};
      drawn.push_back(
          {id, pattern,
           static_cast<double>(config.c_vector[draw_rng.index(config.c_vector.size())])});
    }
    try {
      for (const Workload& w : drawn) {
        cluster[available_capacity_schedule(cluster, w)].add(w);
      }
      placed = true;
    } catch (const InfeasibleError&) {
      // Redraw the whole trial; give up after kMaxDrawAttempts.
    }
  }
  if (!placed) {
    result.aborted = true;
    result.baseline.assign(host_count, {});
    result.balanced.assign(host_count, {});
    return result;
  }

  std::vector<Oracle> oracles;
  oracles.reserve(host_count);
  for (std::size_t h = 0; h < host_count; ++h) {
    OracleConfig oracle = resolve_oracle(config, config.hosts[h].ground_truth_key);
    oracle.rng_seed = mix_seed({config.rng_seed, kOracleTag,
                                static_cast<std::uint64_t>(trial_index), h});
    oracles.emplace_back(std::move(oracle));
  }
  const auto measure_all = [&](std::vector<LatencySample>& out) {
    out.assign(host_count, {});
    for (std::size_t h = 0; h < host_count; ++h) {
      if (!cluster[h].workloads().empty()) {
        out[h] = oracles[h].measure(cluster[h].workloads());
      }
    }
  };

  measure_all(result.baseline);
  if (artifacts) artifacts->baseline_cluster = cluster;

  MigrationPlan plan = load_balance(cluster, models);
  result.moves = static_cast<int>(plan.moves.size());
  apply_plan(cluster, plan);
  measure_all(result.balanced);
  if (artifacts) {
    artifacts->balanced_cluster = std::move(cluster);
    artifacts->plan = std::move(plan);
  }
  return result;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ModelSetIndex& models,
                                int jobs) {
  config.validate();
  for (const HostProfile& host : config.hosts) {
    if (!models.contains(host.model_set_key)) {
      throw ConfigError("experiment: no model set \"" + host.model_set_key + "\" for host \"" +
                        host.name + "\"");
    }
  }

  ExperimentReport report;
  report.per_trial.resize(static_cast<std::size_t>(config.trials));
  const int workers = std::clamp(jobs, 1, config.trials);
  if (workers == 1) {
    for (int t = 0; t < config.trials; ++t) {
      report.per_trial[static_cast<std::size_t>(t)] = run_single_trial(config, models, t);
    }
  } else {
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    const auto worker = [&] {
      for (int t = next.fetch_add(1); t < config.trials; t = next.fetch_add(1)) {
        try {
          report.per_trial[static_cast<std::size_t>(t)] = run_single_trial(config, models, t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<double> avg_before, avg_after, read_before, read_after, write_before, write_after;
  for (const TrialResult& trial : report.per_trial) {
    if (trial.aborted) continue;
    for (std::size_t h = 0; h < config.hosts.size(); ++h) {
      avg_before.push_back(trial.baseline[h].average_us);
      avg_after.push_back(trial.balanced[h].average_us);
      read_before.push_back(trial.baseline[h].p99_read_us);
      read_after.push_back(trial.balanced[h].p99_read_us);
      write_before.push_back(trial.baseline[h].p99_write_us);
      write_after.push_back(trial.balanced[h].p99_write_us);
    }
  }
  if (!avg_before.empty()) {
    AggregateMetrics& agg = report.aggregate;
    agg.variance_reduction_avg = variance_reduction(avg_before, avg_after);
    agg.variance_reduction_p99_read = variance_reduction(read_before, read_after);
    agg.variance_reduction_p99_write = variance_reduction(write_before, write_after);
    agg.max_avg_before = *std::max_element(avg_before.begin(), avg_before.end());
    agg.max_avg_after = *std::max_element(avg_after.begin(), avg_after.end());
    agg.slo_avg_before = supported_slo(avg_before);
    agg.slo_avg_after = supported_slo(avg_after);
    agg.slo_read_before = supported_slo(read_before);
    agg.slo_read_after = supported_slo(read_after);
    agg.slo_write_before = supported_slo(write_before);
    agg.slo_write_after = supported_slo(write_after);
  }
  return report;
}

double supported_slo(std::span<const double> samples) {
  if (samples.empty()) {
    throw ConfigError("supported_slo: empty sample set");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  // 1-based nearest rank ceil(0.99 * N), kept in integer arithmetic.
  const std::size_t rank = (99 * sorted.size() + 99) / 100;
  return sorted[rank - 1];
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& where) {
  jsonutil::check_object(j,
                         {"hosts", "workload_count_range", "w_vector", "s_vector", "c_vector",
                          "trials", "rng_seed", "oracles", "model_files"},
                         where);
  ExperimentConfig cfg;

  const nlohmann::json& hosts = jsonutil::require_field(j, "hosts", where);
  if (!hosts.is_array()) {
    throw ConfigError(where + ": \"hosts\" must be an array");
  }
  for (const nlohmann::json& h : hosts) {
    const std::string host_where = where + " hosts[" + std::to_string(cfg.hosts.size()) + "]";
    jsonutil::check_object(h, {"name", "total_capacity_gb", "ground_truth_key", "model_set_key"},
                           host_where);
    HostProfile profile;
    profile.name = jsonutil::string_field(h, "name", host_where);
    profile.total_capacity_gb = jsonutil::number_field(h, "total_capacity_gb", host_where);
    profile.ground_truth_key = jsonutil::string_field(h, "ground_truth_key", host_where);
    profile.model_set_key = jsonutil::string_field(h, "model_set_key", host_where);
    cfg.hosts.push_back(std::move(profile));
  }

  const nlohmann::json& range = jsonutil::require_field(j, "workload_count_range", where);
  if (!range.is_array() || range.size() != 2 || !range[0].is_number_integer() ||
      !range[1].is_number_integer()) {
    throw ConfigError(where + ": \"workload_count_range\" must be [min, max]");
  }
  cfg.min_workloads = range[0].get<int>();
  cfg.max_workloads = range[1].get<int>();

  cfg.w_vector = jsonutil::int_vector_field(j, "w_vector", where);
  cfg.s_vector = jsonutil::int_vector_field(j, "s_vector", where);
  cfg.c_vector = jsonutil::int_vector_field(j, "c_vector", where);
  cfg.trials = static_cast<int>(jsonutil::int_field(j, "trials", where));
  cfg.rng_seed = jsonutil::seed_field(j, "rng_seed", where);

  if (j.contains("oracles")) {
    const nlohmann::json& oracles = j["oracles"];
    if (!oracles.is_object()) {
      throw ConfigError(where + ": \"oracles\" must be an object");
    }
    for (const auto& item : oracles.items()) {
      cfg.oracles[item.key()] =
          oracle_config_from_json(item.value(), where + " oracles[\"" + item.key() + "\"]");
    }
  }
  if (j.contains("model_files")) {
    const nlohmann::json& files = j["model_files"];
    if (!files.is_object()) {
      throw ConfigError(where + ": \"model_files\" must be an object");
    }
    for (const auto& item : files.items()) {
      if (!item.value().is_string()) {
        throw ConfigError(where + ": model file path for \"" + item.key() +
                          "\" must be a string");
      }
      cfg.model_files[item.key()] = item.value().get<std::string>();
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(jsonutil::parse_file(path), path);
}

nlohmann::json report_to_json(const ExperimentReport& report, const ExperimentConfig& config) {
  nlohmann::json trials = nlohmann::json::array();
  for (const TrialResult& trial : report.per_trial) {
    trials.push_back({{"aborted", trial.aborted},
                      {"moves", trial.moves},
                      {"baseline", samples_to_json(trial.baseline, config.hosts)},
                      {"balanced", samples_to_json(trial.balanced, config.hosts)}});
  }
  const AggregateMetrics& agg = report.aggregate;
  const nlohmann::json aggregate{{"variance_reduction_avg", agg.variance_reduction_avg},
                                 {"max_avg_before", agg.max_avg_before},
                                 {"max_avg_after", agg.max_avg_after},
                                 {"variance_reduction_p99_read", agg.variance_reduction_p99_read},
                                 {"variance_reduction_p99_write", agg.variance_reduction_p99_write},
                                 {"slo_avg_before", agg.slo_avg_before},
                                 {"slo_avg_after", agg.slo_avg_after},
                                 {"slo_read_before", agg.slo_read_before},
                                 {"slo_read_after", agg.slo_read_after},
                                 {"slo_write_before", agg.slo_write_before},
                                 {"slo_write_after", agg.slo_write_after}};
  return {{"aggregate", aggregate}, {"per_trial", trials}};
}

void write_report_json(const ExperimentReport& report, const ExperimentConfig& config,
                       const std::string& path) {
  jsonutil::write_file(path, report_to_json(report, config));
}

void write_report_csv(const ExperimentReport& report, const ExperimentConfig& config,
                      const std::string& path) {
  std::string text = "trial,host,phase,avg_us,p99_read_us,p99_write_us\n";
  char row[192];
  for (std::size_t t = 0; t < report.per_trial.size(); ++t) {
    const TrialResult& trial = report.per_trial[t];
    if (trial.aborted) continue;
    for (const char* phase : {"baseline", "balanced"}) {
      const std::vector<LatencySample>& samples =
          phase == std::string("baseline") ? trial.baseline : trial.balanced;
      for (std::size_t h = 0; h < config.hosts.size(); ++h) {
        std::snprintf(row, sizeof row, "%zu,%s,%s,%.3f,%.3f,%.3f\n", t,
                      config.hosts[h].name.c_str(), phase, samples[h].average_us,
                      samples[h].p99_read_us, samples[h].p99_write_us);
        text += row;
      }
    }
  }
  write_text_file(path, text);
}

}  // namespace latbal
