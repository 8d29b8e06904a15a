#include "latbal/ground_truth.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace latbal {
namespace {

void validate_count_model(const CountModel& m, const std::string& label) {
  if (!(m.s_coef > 0.0) || !std::isfinite(m.s_coef) || !std::isfinite(m.w_coef) ||
      !std::isfinite(m.intercept)) {
    throw ConfigError("oracle config: model " + label + " needs a positive finite s_coef" +
                      " and finite intercept/w_coef");
  }
}

CountModel count_model_from_json(const nlohmann::json& j, const std::string& where) {
  jsonutil::check_object(j, {"intercept", "w_coef", "s_coef"}, where);
  CountModel m;
  m.intercept = jsonutil::number_field(j, "intercept", where);
  m.w_coef = jsonutil::number_field(j, "w_coef", where);
  m.s_coef = jsonutil::number_field(j, "s_coef", where);
  return m;
}

nlohmann::json count_model_to_json(const CountModel& m) {
  return {{"intercept", m.intercept}, {"w_coef", m.w_coef}, {"s_coef", m.s_coef}};
}

}  // namespace

void OracleConfig::validate() const {
  if (per_count.empty() && !five_plus) {
    throw ConfigError("oracle config: no generating models at all");
  }
  for (const auto& [count, model] : per_count) {
    if (count < 1 || count > 5) {
      throw ConfigError("oracle config: per-count key " + std::to_string(count) +
                        " outside 1..5");
    }
    validate_count_model(model, std::to_string(count));
  }
  if (five_plus) {
    validate_count_model(*five_plus, "5plus");
  }
  if (!(noise_sigma_us >= 0.0) || !std::isfinite(noise_sigma_us)) {
    throw ConfigError("oracle config: noise_sigma_us must be >= 0");
  }
  if (!(tail_read_factor >= 1.0) || !(tail_write_factor >= 1.0) ||
      !std::isfinite(tail_read_factor) || !std::isfinite(tail_write_factor)) {
    throw ConfigError("oracle config: tail factors must be >= 1");
  }
  if (saturation) {
    if (!(saturation->threshold_kb > 0.0) || !(saturation->multiplier >= 1.0)) {
      throw ConfigError("oracle config: saturation needs threshold_kb > 0 and multiplier >= 1");
    }
  }
}

const CountModel& OracleConfig::model_for(std::size_t count) const {
  if (count == 0) {
    throw ConfigError("oracle config: no model for an empty workload set");
  }
  if (count <= 5) {
    const auto it = per_count.find(static_cast<int>(count));
    if (it != per_count.end()) return it->second;
  }
  if (five_plus) return *five_plus;
  throw ConfigError("oracle config: no model for " + std::to_string(count) +
                    " workloads and no 5plus fallback");
}

Oracle::Oracle(OracleConfig config) : config_(std::move(config)), rng_(config_.rng_seed) {
  config_.validate();
}

LatencySample Oracle::measure(std::span<const Workload> workloads) {
  if (workloads.empty()) {
    throw ConfigError("oracle: cannot measure an empty workload set");
  }
  for (const Workload& w : workloads) {
    w.pattern.validate();
  }
  const int sum_w = write_ratio_sum(workloads);
  const int sum_s = block_size_sum(workloads);
  const CountModel& m = config_.model_for(workloads.size());

  double mean = m.intercept + m.w_coef * sum_w + m.s_coef * sum_s;
  if (config_.saturation && sum_s > config_.saturation->threshold_kb) {
    mean *= config_.saturation->multiplier;
  }

  double read_jitter = 0.0;
  double write_jitter = 0.0;
  if (config_.noise_sigma_us > 0.0) {
    mean += rng_.normal(config_.noise_sigma_us);
    read_jitter = rng_.uniform(-0.05, 0.05);
    write_jitter = rng_.uniform(-0.05, 0.05);
  }

  LatencySample sample;
  sample.average_us = std::max(0.0, mean);
  sample.p99_read_us = sample.average_us * config_.tail_read_factor * (1.0 + read_jitter);
  sample.p99_write_us = sample.average_us * config_.tail_write_factor * (1.0 + write_jitter);
  return sample;
}

std::map<std::string, OracleConfig> builtin_profiles() {
  OracleConfig ssd1;
  ssd1.per_count[1] = {113.44, 0.0, 22.135};
  ssd1.per_count[2] = {0.0, 0.0, 24.497};
  ssd1.per_count[3] = {0.0, 0.0, 24.714};
  ssd1.per_count[4] = {81.969, 0.0, 23.587};
  ssd1.per_count[5] = {0.0, 0.578, 23.919};
  ssd1.five_plus = CountModel{0.0, 0.646, 23.913};

  OracleConfig ssd2;
  ssd2.per_count[1] = {216.51, -1.19, 19.628};
  ssd2.per_count[2] = {42.669, 0.0, 20.691};
  ssd2.per_count[3] = {-86.634, 0.533, 21.339};
  ssd2.per_count[4] = {-188.26, 0.907, 21.729};
  ssd2.per_count[5] = {-133.83, 0.519, 21.906};
  ssd2.five_plus = CountModel{-137.81, 0.597, 21.821};

  return {{"ssd1", std::move(ssd1)}, {"ssd2", std::move(ssd2)}};
}

OracleConfig oracle_config_from_json(const nlohmann::json& j, const std::string& where) {
  jsonutil::check_object(j,
                         {"models", "noise_sigma_us", "tail_read_factor", "tail_write_factor",
                          "rng_seed", "saturation"},
                         where);
  OracleConfig cfg;
  const nlohmann::json& models = jsonutil::require_field(j, "models", where);
  if (!models.is_object()) {
    throw ConfigError(where + ": \"models\" must be an object");
  }
  for (const auto& item : models.items()) {
    const std::string& key = item.key();
    const std::string entry_where = where + " models[\"" + key + "\"]";
    if (key == "5plus") {
      cfg.five_plus = count_model_from_json(item.value(), entry_where);
    } else if (key.size() == 1 && key[0] >= '1' && key[0] <= '5') {
      cfg.per_count[key[0] - '0'] = count_model_from_json(item.value(), entry_where);
    } else {
      throw ConfigError(where + ": model key \"" + key + "\" is not \"1\"..\"5\" or \"5plus\"");
    }
  }
  if (j.contains("noise_sigma_us")) {
    cfg.noise_sigma_us = jsonutil::number_field(j, "noise_sigma_us", where);
  }
  if (j.contains("tail_read_factor")) {
    cfg.tail_read_factor = jsonutil::number_field(j, "tail_read_factor", where);
  }
  if (j.contains("tail_write_factor")) {
    cfg.tail_write_factor = jsonutil::number_field(j, "tail_write_factor", where);
  }
  if (j.contains("rng_seed")) {
    cfg.rng_seed = jsonutil::seed_field(j, "rng_seed", where);
  }
  if (j.contains("saturation")) {
    const nlohmann::json& sat = j["saturation"];
    const std::string sat_where = where + " saturation";
    jsonutil::check_object(sat, {"threshold_kb", "multiplier"}, sat_where);
    SaturationHook hook;
    hook.threshold_kb = jsonutil::number_field(sat, "threshold_kb", sat_where);
    hook.multiplier = jsonutil::number_field(sat, "multiplier", sat_where);
    cfg.saturation = hook;
  }
  cfg.validate();
  return cfg;
}

nlohmann::json oracle_config_to_json(const OracleConfig& config) {
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [count, model] : config.per_count) {
    models[std::to_string(count)] = count_model_to_json(model);
  }
  if (config.five_plus) {
    models["5plus"] = count_model_to_json(*config.five_plus);
  }
  nlohmann::json j{{"models", std::move(models)},
                   {"noise_sigma_us", config.noise_sigma_us},
                   {"tail_read_factor", config.tail_read_factor},
                   {"tail_write_factor", config.tail_write_factor},
                   {"rng_seed", config.rng_seed}};
  if (config.saturation) {
    j["saturation"] = {{"threshold_kb", config.saturation->threshold_kb},
                       {"multiplier", config.saturation->multiplier}};
  }
  return j;
}

OracleConfig load_oracle_config(const std::string& path) {
  return oracle_config_from_json(jsonutil::parse_file(path), path);
}

void save_oracle_config(const OracleConfig& config, const std::string& path) {
  jsonutil::write_file(path, oracle_config_to_json(config));
}

}  // namespace latbal
