#include "doctest.h"
#include "latbal/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "latbal/ground_truth.hpp"
#include "latbal/modeler.hpp"

using namespace latbal;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"latbal"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun result;
  result.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

// Builtin profile with the noise disabled, saved as an oracle file.
std::string write_quiet_oracle(const std::string& name, const std::string& path) {
  OracleConfig cfg = builtin_profiles().at(name);
  cfg.noise_sigma_us = 0.0;
  save_oracle_config(cfg, path);
  return path;
}

ConsolidationModel cm(int count, double intercept, double w_coef, double s_coef) {
  ConsolidationModel m;
  m.workload_count = count;
  m.intercept = intercept;
  m.w_coef = w_coef;
  m.s_coef = s_coef;
  return m;
}

ModelSet uniform_set(const std::string& name, double intercept, double w_coef, double s_coef) {
  ModelSet set;
  set.profile_name = name;
  for (int n = 1; n <= 5; ++n) set.basic[n - 1] = cm(n, intercept, w_coef, s_coef);
  set.extended = cm(kExtendedModelCount, intercept, w_coef, s_coef);
  return set;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

}  // namespace

TEST_CASE("model subcommand fits and writes a model file") {
  const std::string oracle_path = write_quiet_oracle("ssd1", "/tmp/latbal_cli_oracle.json");
  const std::string model_path = "/tmp/latbal_cli_models.json";
  const CliRun r = run({"model", "--profile", "ssd1", "--oracle", oracle_path, "--out",
                        model_path, "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("model       intercept") == 0);
  CHECK(r.out.find("wrote " + model_path) != std::string::npos);
  CHECK(count_lines(r.out) == 8);  // header, six model rows, wrote line

  // Zero noise reproduces the generator; the known row shows up in the table.
  CHECK(r.out.find("24.497000") != std::string::npos);
  const ModelSet set = load_model_set(model_path);
  CHECK(set.profile_name == "ssd1");
  CHECK(set.basic[1].s_coef == doctest::Approx(24.497).epsilon(1e-9));

  SUBCASE("predict pins the two-workload example") {
    const CliRun p = run({"predict", "--models", model_path, "--workloads", "50:4,50:4"});
    CHECK(p.code == 0);
    CHECK(p.out == "model: 2\npredicted_avg_us: 195.976\n");
  }
  SUBCASE("predict routes six workloads to the extended model") {
    const CliRun p =
        run({"predict", "--models", model_path, "--workloads", "10:4,10:4,10:4,10:4,10:4,10:4"});
    CHECK(p.code == 0);
    CHECK(p.out.find("model: 5plus\n") == 0);
  }
  std::remove(oracle_path.c_str());
  std::remove(model_path.c_str());
}

TEST_CASE("model subcommand accepts builtin oracle references") {
  const std::string model_path = "/tmp/latbal_cli_builtin_models.json";
  const CliRun r = run({"model", "--profile", "ssd2", "--oracle", "builtin:ssd2", "--out",
                        model_path, "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(model_path));
  std::remove(model_path.c_str());

  const CliRun bad = run({"model", "--profile", "x", "--oracle", "builtin:nvme", "--out",
                          "/tmp/latbal_cli_none.json", "--seed", "1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("unknown builtin oracle") != std::string::npos);
}

TEST_CASE("argument errors exit with the config code") {
  SUBCASE("missing required flag") {
    const CliRun r = run({"model", "--profile", "p"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }
  SUBCASE("no subcommand") {
    const CliRun r = run({});
    CHECK(r.code == 2);
  }
  SUBCASE("unknown subcommand") {
    const CliRun r = run({"frobnicate"});
    CHECK(r.code == 2);
  }
  SUBCASE("help exits cleanly") {
    const CliRun r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("model") != std::string::npos);
    CHECK(r.out.find("experiment") != std::string::npos);
  }
}

TEST_CASE("predict input validation") {
  const std::string model_path = "/tmp/latbal_cli_predict_models.json";
  save_model_set(uniform_set("m", 0.0, 0.0, 1.0), model_path);

  SUBCASE("empty workload list") {
    const CliRun r = run({"predict", "--models", model_path, "--workloads", ""});
    CHECK(r.code == 2);
  }
  SUBCASE("malformed pair") {
    const CliRun r = run({"predict", "--models", model_path, "--workloads", "50-4"});
    CHECK(r.code == 2);
    CHECK(r.err.find("not W:S") != std::string::npos);
  }
  SUBCASE("non-integer field") {
    const CliRun r = run({"predict", "--models", model_path, "--workloads", "50:4,abc:8"});
    CHECK(r.code == 2);
  }
  SUBCASE("out-of-range write ratio") {
    const CliRun r = run({"predict", "--models", model_path, "--workloads", "120:4"});
    CHECK(r.code == 2);
  }
  SUBCASE("missing model file") {
    const CliRun r = run({"predict", "--models", "/tmp/latbal_cli_absent.json", "--workloads",
                          "50:4"});
    CHECK(r.code == 2);
  }
  std::remove(model_path.c_str());
}

TEST_CASE("balance subcommand plans and writes moves") {
  const std::string model_path = "/tmp/latbal_cli_balance_models.json";
  save_model_set(uniform_set("m", 0.0, 0.0, 10.0), model_path);

  const std::string cluster_path = "/tmp/latbal_cli_cluster.json";
  const nlohmann::json cluster{
      {"hosts",
       nlohmann::json::array(
           {{{"name", "A"},
             {"total_capacity_gb", 100.0},
             {"model_set_key", "m"},
             {"workloads",
              nlohmann::json::array(
                  {{{"id", "w256"}, {"write_ratio", 50}, {"block_size_kb", 256}, {"volume_gb", 10.0}},
                   {{"id", "w4"}, {"write_ratio", 50}, {"block_size_kb", 4}, {"volume_gb", 10.0}}})}},
            {{"name", "B"}, {"total_capacity_gb", 100.0}, {"model_set_key", "m"}}})}};
  write_text(cluster_path, cluster.dump(2));

  const std::string plan_path = "/tmp/latbal_cli_plan.json";
  const CliRun r = run({"balance", "--cluster", cluster_path, "--models", model_path, "--out",
                        plan_path});
  CHECK(r.code == 0);
  CHECK(r.out.find("moves: 1\n") == 0);
  CHECK(r.out.find("host A predicted_avg_us 40.000") != std::string::npos);
  CHECK(r.out.find("host B predicted_avg_us 2560.000") != std::string::npos);

  std::ifstream in(plan_path);
  REQUIRE(in.good());
  const nlohmann::json plan = nlohmann::json::parse(in);
  REQUIRE(plan["moves"].size() == 1);
  CHECK(plan["moves"][0]["workload_id"] == "w256");
  CHECK(plan["moves"][0]["from_host"] == "A");
  CHECK(plan["moves"][0]["to_host"] == "B");
  CHECK(plan["predicted_host_latencies"]["A"] == doctest::Approx(40.0));
  CHECK(plan["predicted_host_latencies"]["B"] == doctest::Approx(2560.0));

  SUBCASE("a balanced cluster reports zero moves") {
    nlohmann::json even = cluster;
    even["hosts"][1]["workloads"] = nlohmann::json::array(
        {{{"id", "b1"}, {"write_ratio", 50}, {"block_size_kb", 256}, {"volume_gb", 10.0}}});
    even["hosts"][0]["workloads"].erase(0);
    write_text(cluster_path, even.dump(2));
    const CliRun balanced = run({"balance", "--cluster", cluster_path, "--models", model_path,
                                 "--out", plan_path});
    CHECK(balanced.code == 0);
    CHECK(balanced.out.find("moves: 0\n") == 0);
  }
  SUBCASE("duplicate model profiles are rejected") {
    const CliRun dup = run({"balance", "--cluster", cluster_path, "--models", model_path,
                            "--models", model_path, "--out", plan_path});
    CHECK(dup.code == 2);
  }
  SUBCASE("a missing model set key is a config error") {
    nlohmann::json other = cluster;
    other["hosts"][1]["model_set_key"] = "other";
    write_text(cluster_path, other.dump(2));
    const CliRun missing = run({"balance", "--cluster", cluster_path, "--models", model_path,
                                "--out", plan_path});
    CHECK(missing.code == 2);
  }
  SUBCASE("an overfull host is infeasible") {
    nlohmann::json overfull = cluster;
    overfull["hosts"][0]["workloads"][0]["volume_gb"] = 500.0;
    write_text(cluster_path, overfull.dump(2));
    const CliRun infeasible = run({"balance", "--cluster", cluster_path, "--models", model_path,
                                   "--out", plan_path});
    CHECK(infeasible.code == 4);
  }
  std::remove(model_path.c_str());
  std::remove(cluster_path.c_str());
  std::remove(plan_path.c_str());
}

TEST_CASE("experiment subcommand writes both reports") {
  const nlohmann::json config{
      {"hosts",
       nlohmann::json::array({{{"name", "h1"},
                               {"total_capacity_gb", 480.0},
                               {"ground_truth_key", "ssd1"},
                               {"model_set_key", "ssd1"}},
                              {{"name", "h2"},
                               {"total_capacity_gb", 400.0},
                               {"ground_truth_key", "ssd2"},
                               {"model_set_key", "ssd2"}}})},
      {"workload_count_range", {3, 6}},
      {"w_vector", {25, 50, 75}},
      {"s_vector", {4, 8, 32}},
      {"c_vector", {30, 60}},
      {"trials", 3},
      {"rng_seed", 11}};
  const std::string config_path = "/tmp/latbal_cli_experiment.json";
  write_text(config_path, config.dump(2));

  const std::string out_dir = "/tmp/latbal_cli_experiment_out";
  std::filesystem::remove_all(out_dir);
  const CliRun r = run({"experiment", "--config", config_path, "--out-dir", out_dir});
  CHECK(r.code == 0);
  CHECK(r.out.find("variance_reduction_avg") != std::string::npos);
  CHECK(r.out.find("slo_write_after") != std::string::npos);
  CHECK(r.out.find("wrote " + out_dir + "/report.json") != std::string::npos);
  CHECK(r.out.find("wrote " + out_dir + "/report.csv") != std::string::npos);

  std::ifstream json_in(out_dir + "/report.json");
  REQUIRE(json_in.good());
  const nlohmann::json report = nlohmann::json::parse(json_in);
  CHECK(report["per_trial"].size() == 3);

  std::ifstream csv_in(out_dir + "/report.csv");
  REQUIRE(csv_in.good());
  std::string header;
  std::getline(csv_in, header);
  CHECK(header == "trial,host,phase,avg_us,p99_read_us,p99_write_us");

  SUBCASE("missing hosts key is a config error") {
    nlohmann::json broken = config;
    broken.erase("hosts");
    write_text(config_path, broken.dump(2));
    const CliRun bad = run({"experiment", "--config", config_path, "--out-dir", out_dir});
    CHECK(bad.code == 2);
  }
  std::remove(config_path.c_str());
  std::filesystem::remove_all(out_dir);
}
