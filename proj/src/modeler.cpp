#include "latbal/modeler.hpp"

#include <algorithm>
#include <utility>

#include "json_util.hpp"
#include "latbal/regression.hpp"

namespace latbal {
namespace {

// Hard cap on generated cases; the realistic grids stay far below it.
constexpr std::size_t kMaxTestCases = 10'000'000;

std::size_t multiset_count(std::size_t grid, int n) {
  // C(grid + n - 1, n), small enough here to stay exact in 64 bits.
  std::size_t count = 1;
  for (int i = 1; i <= n; ++i) {
    count = count * (grid + static_cast<std::size_t>(i) - 1) / static_cast<std::size_t>(i);
    if (count > kMaxTestCases) {
      throw ConfigError("test set for n=" + std::to_string(n) + " would exceed " +
                        std::to_string(kMaxTestCases) + " cases");
    }
  }
  return count;
}

ConsolidationModel fit_consolidation(int count_marker, const Eigen::MatrixXd& rows,
                                     const Eigen::VectorXd& response) {
  const DesignSpec design{{Term::intercept(), Term::linear(0), Term::linear(1)}};
  ConsolidationModel model;
  model.workload_count = count_marker;
  try {
    const FitDiagnostics fit = fit_ols(design, rows, response);
    const EliminationResult result = eliminate_insignificant(
        fit, design, rows, response, 0.05, /*allow_intercept_removal=*/true);
    const Eigen::VectorXd coefs = result.coefficients_in(design);
    model.intercept = coefs[0];
    model.w_coef = coefs[1];
    model.s_coef = coefs[2];
    model.adjusted_r_squared = result.fit.adjusted_r_squared;
    model.n_observations = result.fit.n_observations;
  } catch (const FitError& e) {
    throw FitError("modeler: fitting model \"" + model_label(model) + "\" failed: " + e.what());
  }
  return model;
}

nlohmann::json model_to_json(const ConsolidationModel& m) {
  return {{"intercept", m.intercept},
          {"w_coef", m.w_coef},
          {"s_coef", m.s_coef},
          {"adj_r2", m.adjusted_r_squared},
          {"n_obs", m.n_observations}};
}

ConsolidationModel model_from_json(const nlohmann::json& j, int count_marker,
                                   const std::string& where) {
  jsonutil::check_object(j, {"intercept", "w_coef", "s_coef", "adj_r2", "n_obs"}, where);
  ConsolidationModel m;
  m.workload_count = count_marker;
  m.intercept = jsonutil::number_field(j, "intercept", where);
  m.w_coef = jsonutil::number_field(j, "w_coef", where);
  m.s_coef = jsonutil::number_field(j, "s_coef", where);
  m.adjusted_r_squared = jsonutil::number_field(j, "adj_r2", where);
  m.n_observations = static_cast<int>(jsonutil::int_field(j, "n_obs", where));
  return m;
}

}  // namespace

double ConsolidationModel::predict(int sum_w, int sum_s) const {
  return std::max(0.0, intercept + w_coef * sum_w + s_coef * sum_s);
}

std::string model_label(const ConsolidationModel& model) {
  return model.workload_count == kExtendedModelCount ? "5plus"
                                                     : std::to_string(model.workload_count);
}

const ConsolidationModel& ModelSet::model_for(std::size_t count) const {
  if (count == 0) {
    throw ConfigError("model set: no model for an empty workload set");
  }
  return count <= 5 ? basic[count - 1] : extended;
}

std::vector<TestCase> generate_test_set(int n, const std::vector<int>& w_vector,
                                        const std::vector<int>& s_vector) {
  if (n < 1) {
    throw ConfigError("test set: workload count must be at least 1");
  }
  if (w_vector.empty() || s_vector.empty()) {
    throw ConfigError("test set: empty test vector");
  }
  std::vector<AccessPattern> grid;
  grid.reserve(w_vector.size() * s_vector.size());
  for (int w : w_vector) {
    for (int s : s_vector) {
      AccessPattern p{w, 100, s};
      p.validate();
      grid.push_back(p);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<TestCase> cases;
  cases.reserve(multiset_count(grid.size(), n));
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    TestCase tc;
    tc.patterns.reserve(idx.size());
    for (std::size_t i : idx) {
      tc.patterns.push_back(grid[i]);
    }
    cases.push_back(std::move(tc));
    // Advance to the next nondecreasing index tuple.
    std::size_t j = idx.size();
    while (j > 0 && idx[j - 1] == grid.size() - 1) --j;
    if (j == 0) break;
    const std::size_t next = idx[j - 1] + 1;
    for (std::size_t k = j - 1; k < idx.size(); ++k) idx[k] = next;
  }
  return cases;
}

ModelSet run_modeler(const HostProfile& profile, const OracleConfig& oracle,
                     const std::vector<int>& w_vector, const std::vector<int>& s_vector) {
  Oracle instance(oracle);
  ModelSet set;
  set.profile_name = profile.name;
  set.created_from = {w_vector, s_vector, oracle.rng_seed};

  std::vector<double> pooled_w;
  std::vector<double> pooled_s;
  std::vector<double> pooled_y;

  for (int n = 1; n <= 5; ++n) {
    std::vector<TestCase> cases = generate_test_set(n, w_vector, s_vector);
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(cases.size()), 2);
    Eigen::VectorXd response(static_cast<Eigen::Index>(cases.size()));
    std::vector<Workload> workloads;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      workloads.clear();
      for (std::size_t j = 0; j < cases[i].patterns.size(); ++j) {
        workloads.push_back({"t" + std::to_string(j), cases[i].patterns[j], 1.0});
      }
      cases[i].measured = instance.measure(workloads);
      const int sum_w = write_ratio_sum(workloads);
      const int sum_s = block_size_sum(workloads);
      rows(static_cast<Eigen::Index>(i), 0) = sum_w;
      rows(static_cast<Eigen::Index>(i), 1) = sum_s;
      response(static_cast<Eigen::Index>(i)) = cases[i].measured.average_us;
      pooled_w.push_back(sum_w);
      pooled_s.push_back(sum_s);
      pooled_y.push_back(cases[i].measured.average_us);
    }
    set.basic[static_cast<std::size_t>(n - 1)] = fit_consolidation(n, rows, response);
  }

  Eigen::MatrixXd pooled_rows(static_cast<Eigen::Index>(pooled_y.size()), 2);
  Eigen::VectorXd pooled_response(static_cast<Eigen::Index>(pooled_y.size()));
  for (std::size_t i = 0; i < pooled_y.size(); ++i) {
    pooled_rows(static_cast<Eigen::Index>(i), 0) = pooled_w[i];
    pooled_rows(static_cast<Eigen::Index>(i), 1) = pooled_s[i];
    pooled_response(static_cast<Eigen::Index>(i)) = pooled_y[i];
  }
  set.extended = fit_consolidation(kExtendedModelCount, pooled_rows, pooled_response);
  return set;
}

double predict(const ModelSet& models, std::span<const Workload> workloads) {
  if (workloads.empty()) {
    throw ConfigError("predict: empty workload set");
  }
  const ConsolidationModel& model = models.model_for(workloads.size());
  return model.predict(write_ratio_sum(workloads), block_size_sum(workloads));
}

void save_model_set(const ModelSet& models, const std::string& path) {
  nlohmann::json entries = nlohmann::json::object();
  for (const ConsolidationModel& m : models.basic) {
    entries[model_label(m)] = model_to_json(m);
  }
  entries[model_label(models.extended)] = model_to_json(models.extended);
  const nlohmann::json j{
      {"profile", models.profile_name},
      {"models", std::move(entries)},
      {"provenance",
       {{"w_vector", models.created_from.w_vector},
        {"s_vector", models.created_from.s_vector},
        {"oracle_seed", models.created_from.oracle_seed}}}};
  jsonutil::write_file(path, j);
}

ModelSet load_model_set(const std::string& path) {
  const nlohmann::json j = jsonutil::parse_file(path);
  jsonutil::check_object(j, {"profile", "models", "provenance"}, path);
  ModelSet set;
  set.profile_name = jsonutil::string_field(j, "profile", path);

  const nlohmann::json& models = jsonutil::require_field(j, "models", path);
  const std::string models_where = path + ": models";
  jsonutil::check_object(models, {"1", "2", "3", "4", "5", "5plus"}, models_where);
  for (int n = 1; n <= 5; ++n) {
    const std::string key = std::to_string(n);
    const nlohmann::json& entry = jsonutil::require_field(models, key.c_str(), models_where);
    set.basic[static_cast<std::size_t>(n - 1)] =
        model_from_json(entry, n, models_where + "[\"" + key + "\"]");
  }
  const nlohmann::json& extended = jsonutil::require_field(models, "5plus", models_where);
  set.extended = model_from_json(extended, kExtendedModelCount, models_where + "[\"5plus\"]");

  if (j.contains("provenance")) {
    const nlohmann::json& prov = j["provenance"];
    const std::string prov_where = path + ": provenance";
    jsonutil::check_object(prov, {"w_vector", "s_vector", "oracle_seed"}, prov_where);
    set.created_from.w_vector = jsonutil::int_vector_field(prov, "w_vector", prov_where);
    set.created_from.s_vector = jsonutil::int_vector_field(prov, "s_vector", prov_where);
    set.created_from.oracle_seed = jsonutil::seed_field(prov, "oracle_seed", prov_where);
  }
  return set;
}

}  // namespace latbal
