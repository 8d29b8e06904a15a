#include "latbal/cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string_view>

#include "CLI11.hpp"
#include "json_util.hpp"
#include "latbal/balancer.hpp"
#include "latbal/ground_truth.hpp"
#include "latbal/modeler.hpp"
#include "latbal/sim_harness.hpp"

namespace latbal {
namespace {

std::string fixed(double value, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, value);
  return buf;
}

int parse_int(std::string_view token, const std::string& what) {
  int value = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
    throw ParseError(what + ": \"" + std::string(token) + "\" is not an integer");
  }
  return value;
}

OracleConfig resolve_oracle_ref(const std::string& ref) {
  constexpr std::string_view kBuiltinPrefix = "builtin:";
  if (ref.starts_with(kBuiltinPrefix)) {
    const std::string name = ref.substr(kBuiltinPrefix.size());
    const auto builtins = builtin_profiles();
    const auto it = builtins.find(name);
    if (it == builtins.end()) {
      throw ConfigError("unknown builtin oracle \"" + name + "\"");
    }
    return it->second;
  }
  return load_oracle_config(ref);
}

// Inline workload list "W:S,W:S,...", e.g. "50:4,50:4".
std::vector<Workload> parse_workload_spec(const std::string& spec) {
  std::vector<Workload> workloads;
  std::string_view rest = spec;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view token = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("workload spec \"" + std::string(token) + "\" is not W:S");
    }
    AccessPattern pattern;
    pattern.write_ratio = parse_int(token.substr(0, colon), "write ratio");
    pattern.block_size_kb = parse_int(token.substr(colon + 1), "block size");
    pattern.validate();
    workloads.push_back(
        {"w" + std::to_string(workloads.size() + 1), pattern, 1.0});
  }
  if (workloads.empty()) {
    throw ParseError("empty workload list");
  }
  return workloads;
}

std::vector<HostState> load_cluster(const std::string& path) {
  const nlohmann::json j = jsonutil::parse_file(path);
  jsonutil::check_object(j, {"hosts"}, path);
  const nlohmann::json& hosts = jsonutil::require_field(j, "hosts", path);
  if (!hosts.is_array()) {
    throw ConfigError(path + ": \"hosts\" must be an array");
  }
  std::vector<HostState> cluster;
  for (const nlohmann::json& h : hosts) {
    const std::string where = path + " hosts[" + std::to_string(cluster.size()) + "]";
    jsonutil::check_object(
        h, {"name", "total_capacity_gb", "ground_truth_key", "model_set_key", "workloads"},
        where);
    HostProfile profile;
    profile.name = jsonutil::string_field(h, "name", where);
    profile.total_capacity_gb = jsonutil::number_field(h, "total_capacity_gb", where);
    if (h.contains("ground_truth_key")) {
      profile.ground_truth_key = jsonutil::string_field(h, "ground_truth_key", where);
    }
    profile.model_set_key = jsonutil::string_field(h, "model_set_key", where);

    std::vector<Workload> workloads;
    if (h.contains("workloads")) {
      const nlohmann::json& list = h["workloads"];
      if (!list.is_array()) {
        throw ConfigError(where + ": \"workloads\" must be an array");
      }
      for (const nlohmann::json& w : list) {
        const std::string w_where =
            where + " workloads[" + std::to_string(workloads.size()) + "]";
        jsonutil::check_object(
            w, {"id", "write_ratio", "randomness", "block_size_kb", "volume_gb"}, w_where);
        Workload workload;
        workload.id = jsonutil::string_field(w, "id", w_where);
        workload.pattern.write_ratio =
            static_cast<int>(jsonutil::int_field(w, "write_ratio", w_where));
        if (w.contains("randomness")) {
          workload.pattern.randomness =
              static_cast<int>(jsonutil::int_field(w, "randomness", w_where));
        }
        workload.pattern.block_size_kb =
            static_cast<int>(jsonutil::int_field(w, "block_size_kb", w_where));
        workload.volume_gb = jsonutil::number_field(w, "volume_gb", w_where);
        workloads.push_back(std::move(workload));
      }
    }
    cluster.emplace_back(std::move(profile), std::move(workloads));
  }
  return cluster;
}

CommandOutcome cmd_model(const std::string& profile_name, const std::string& oracle_ref,
                         const std::string& out_path, std::uint64_t seed, std::ostream& out) {
  OracleConfig oracle = resolve_oracle_ref(oracle_ref);
  oracle.rng_seed = seed;
  const HostProfile profile{profile_name, 1.0, oracle_ref, profile_name};
  const ModelSet set = run_modeler(profile, oracle);

  out << "model       intercept         w_coef         s_coef   adj_r2  n_obs\n";
  const auto row = [&](const ConsolidationModel& m) {
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %14.6f %14.6f %14.6f %8.4f %6d\n",
                  model_label(m).c_str(), m.intercept, m.w_coef, m.s_coef,
                  m.adjusted_r_squared, m.n_observations);
    out << line;
  };
  for (const ConsolidationModel& m : set.basic) row(m);
  row(set.extended);

  save_model_set(set, out_path);
  out << "wrote " << out_path << "\n";
  return {0, {out_path}};
}

CommandOutcome cmd_predict(const std::string& model_path, const std::string& spec,
                           std::ostream& out) {
  const ModelSet set = load_model_set(model_path);
  const std::vector<Workload> workloads = parse_workload_spec(spec);
  const double predicted = predict(set, workloads);
  out << "model: " << model_label(set.model_for(workloads.size())) << "\n";
  out << "predicted_avg_us: " << fixed(predicted, 3) << "\n";
  return {0, {}};
}

CommandOutcome cmd_balance(const std::string& cluster_path,
                           const std::vector<std::string>& model_paths,
                           const std::string& out_path, std::ostream& out) {
  const std::vector<HostState> cluster = load_cluster(cluster_path);
  ModelSetIndex models;
  for (const std::string& path : model_paths) {
    ModelSet set = load_model_set(path);
    const std::string key = set.profile_name;
    if (!models.emplace(key, std::move(set)).second) {
      throw ConfigError("duplicate model set for profile \"" + key + "\"");
    }
  }

  const MigrationPlan plan = load_balance(cluster, models);
  nlohmann::json moves = nlohmann::json::array();
  for (const Move& m : plan.moves) {
    moves.push_back(
        {{"workload_id", m.workload_id}, {"from_host", m.from_host}, {"to_host", m.to_host}});
  }
  jsonutil::write_file(out_path, {{"moves", std::move(moves)},
                                  {"predicted_host_latencies", plan.predicted_host_latencies}});

  out << "moves: " << plan.moves.size() << "\n";
  for (const auto& [host, latency] : plan.predicted_host_latencies) {
    out << "host " << host << " predicted_avg_us " << fixed(latency, 3) << "\n";
  }
  out << "wrote " << out_path << "\n";
  return {0, {out_path}};
}

CommandOutcome cmd_experiment(const std::string& config_path, const std::string& out_dir,
                              int jobs, std::ostream& out) {
  const ExperimentConfig config = load_experiment_config(config_path);
  const ModelSetIndex models = resolve_model_sets(config);
  const ExperimentReport report = run_experiment(config, models, jobs);

  std::filesystem::create_directories(out_dir);
  const std::string json_path = out_dir + "/report.json";
  const std::string csv_path = out_dir + "/report.csv";
  write_report_json(report, config, json_path);
  write_report_csv(report, config, csv_path);

  const AggregateMetrics& agg = report.aggregate;
  const auto line = [&](const char* label, double value, int places) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-29s %14.*f\n", label, places, value);
    out << buf;
  };
  line("variance_reduction_avg", agg.variance_reduction_avg, 4);
  line("variance_reduction_p99_read", agg.variance_reduction_p99_read, 4);
  line("variance_reduction_p99_write", agg.variance_reduction_p99_write, 4);
  line("max_avg_before", agg.max_avg_before, 3);
  line("max_avg_after", agg.max_avg_after, 3);
  line("slo_avg_before", agg.slo_avg_before, 3);
  line("slo_avg_after", agg.slo_avg_after, 3);
  line("slo_read_before", agg.slo_read_before, 3);
  line("slo_read_after", agg.slo_read_after, 3);
  line("slo_write_before", agg.slo_write_before, 3);
  line("slo_write_after", agg.slo_write_after, 3);
  out << "wrote " << json_path << "\n";
  out << "wrote " << csv_path << "\n";
  return {0, {json_path, csv_path}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SSD workload-consolidation lab"};
  app.require_subcommand(1);

  std::string model_profile, model_oracle, model_out;
  std::uint64_t model_seed = 0;
  CLI::App* model = app.add_subcommand("model", "Fit the six consolidation models");
  model->add_option("--profile", model_profile, "Profile name for the model file")->required();
  model->add_option("--oracle", model_oracle, "Oracle config path or builtin:<name>")
      ->required();
  model->add_option("--out", model_out, "Output model file")->required();
  model->add_option("--seed", model_seed, "Oracle RNG seed")->required();

  std::string predict_models, predict_workloads;
  CLI::App* predict = app.add_subcommand("predict", "Predict consolidated average latency");
  predict->add_option("--models", predict_models, "Model file")->required();
  predict->add_option("--workloads", predict_workloads, "Comma-separated W:S list")->required();

  std::string balance_cluster, balance_out;
  std::vector<std::string> balance_models;
  CLI::App* balance = app.add_subcommand("balance", "Plan latency-equalizing migrations");
  balance->add_option("--cluster", balance_cluster, "Cluster state file")->required();
  balance->add_option("--models", balance_models, "Model files, one per profile")->required();
  balance->add_option("--out", balance_out, "Output plan file")->required();

  std::string experiment_config, experiment_dir;
  int experiment_jobs = 1;
  CLI::App* experiment = app.add_subcommand("experiment", "Run the consolidation experiment");
  experiment->add_option("--config", experiment_config, "Experiment config file")->required();
  experiment->add_option("--out-dir", experiment_dir, "Directory for report.json/report.csv")
      ->required();
  experiment->add_option("--jobs", experiment_jobs, "Parallel trial workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    CommandOutcome outcome;
    if (app.got_subcommand(model)) {
      outcome = cmd_model(model_profile, model_oracle, model_out, model_seed, out);
    } else if (app.got_subcommand(predict)) {
      outcome = cmd_predict(predict_models, predict_workloads, out);
    } else if (app.got_subcommand(balance)) {
      outcome = cmd_balance(balance_cluster, balance_models, balance_out, out);
    } else {
      outcome = cmd_experiment(experiment_config, experiment_dir, experiment_jobs, out);
    }
    return outcome.exit_code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace latbal
