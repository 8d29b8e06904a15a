#include "doctest.h"
#include "latbal/regression.hpp"
#include "latbal/rng.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

using namespace latbal;

namespace {

// Student's t density, evaluated directly from its closed form.
double t_density(double x, int dof) {
  const double v = dof;
  const double c = std::exp(std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0)) /
                   std::sqrt(v * std::numbers::pi);
  return c * std::pow(1.0 + x * x / v, -(v + 1.0) / 2.0);
}

// CDF by composite Simpson integration of the density over [0, |t|]; the
// step is small enough to be exact to well below 1e-10 on the tested range.
double t_cdf_by_integration(double t, int dof) {
  const double b = std::fabs(t);
  const int n = 20000;
  const double h = b / n;
  double sum = t_density(0.0, dof) + t_density(b, dof);
  for (int i = 1; i < n; ++i) {
    sum += t_density(i * h, dof) * (i % 2 != 0 ? 4.0 : 2.0);
  }
  const double integral = sum * h / 3.0;
  return t >= 0.0 ? 0.5 + integral : 0.5 - integral;
}

struct Dataset {
  Eigen::MatrixXd rows;
  Eigen::VectorXd y;
};

// Two raw features: x0 ~ U(0, 100), x1 ~ U(4, 256).
Dataset noisy_plane(int n, double b0, double b1, double b2, double sigma, std::uint64_t seed) {
  SeededRng rng{seed};
  Dataset d;
  d.rows.resize(n, 2);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.rows(i, 0) = rng.uniform(0.0, 100.0);
    d.rows(i, 1) = rng.uniform(4.0, 256.0);
    d.y(i) = b0 + b1 * d.rows(i, 0) + b2 * d.rows(i, 1) + (sigma > 0.0 ? rng.normal(sigma) : 0.0);
  }
  return d;
}

const DesignSpec kPlaneDesign{{Term::intercept(), Term::linear(0), Term::linear(1)}};

}  // namespace

TEST_CASE("term descriptors") {
  CHECK(Term::interaction(2, 0) == Term::interaction(0, 2));
  CHECK(Term::interaction(2, 0).a == 0);
  CHECK(Term::interaction(2, 0).b == 2);
  CHECK_THROWS_AS(Term::interaction(1, 1), ConfigError);
  CHECK(to_string(Term::intercept()) == "intercept");
  CHECK(to_string(Term::linear(0)) == "x0");
  CHECK(to_string(Term::squared(1)) == "x1^2");
  CHECK(to_string(Term::interaction(0, 1)) == "x0:x1");
}

TEST_CASE("design validation") {
  CHECK_NOTHROW(kPlaneDesign.validate());
  CHECK(kPlaneDesign.has_intercept());
  CHECK_FALSE(DesignSpec{{Term::linear(0)}}.has_intercept());

  CHECK_THROWS_AS((DesignSpec{}.validate()), ConfigError);
  CHECK_THROWS_AS((DesignSpec{{Term::linear(0), Term::linear(0)}}.validate()), ConfigError);
  CHECK_THROWS_AS((DesignSpec{{Term::intercept(), Term::intercept()}}.validate()), ConfigError);
  CHECK_THROWS_AS((DesignSpec{{Term::linear(-1)}}.validate()), ConfigError);
}

TEST_CASE("build_matrix evaluates every term kind") {
  Eigen::MatrixXd rows(2, 2);
  rows << 3.0, 5.0,
          7.0, 2.0;
  const DesignSpec design{
      {Term::intercept(), Term::linear(1), Term::squared(0), Term::interaction(0, 1)}};
  const Eigen::MatrixXd X = design.build_matrix(rows);
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 4);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(0, 1) == 5.0);
  CHECK(X(0, 2) == 9.0);
  CHECK(X(0, 3) == 15.0);
  CHECK(X(1, 0) == 1.0);
  CHECK(X(1, 1) == 2.0);
  CHECK(X(1, 2) == 49.0);
  CHECK(X(1, 3) == 14.0);

  CHECK_THROWS_AS((DesignSpec{{Term::linear(2)}}.build_matrix(rows)), ConfigError);
}

TEST_CASE("exact line through three points") {
  Eigen::MatrixXd rows(3, 1);
  rows << 0.0, 1.0, 2.0;
  Eigen::VectorXd y(3);
  y << 0.0, 2.0, 4.0;
  const DesignSpec design{{Term::intercept(), Term::linear(0)}};
  const FitDiagnostics fit = fit_ols(design, rows, y);
  CHECK(std::fabs(fit.coefficients(0)) < 1e-12);
  CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.n_observations == 3);
  CHECK(fit.n_terms == 2);
}

TEST_CASE("constant response makes the slope insignificant") {
  Eigen::MatrixXd rows(4, 1);
  rows << 0.0, 1.0, 2.0, 3.0;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 1.0);
  const DesignSpec design{{Term::intercept(), Term::linear(0)}};
  const FitDiagnostics fit = fit_ols(design, rows, y);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(fit.coefficients(1)) < 1e-12);
  // Perfect fit: dropping the slope still reproduces y, so its p-value is 1;
  // dropping the intercept does not, so the intercept stays significant.
  CHECK(fit.p_values(1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.p_values(0) < 1e-9);
}

TEST_CASE("noise-free plane is recovered to relative 1e-6") {
  const Dataset d = noisy_plane(200, -583.36, -4.02, 23.21, 0.0, 99);
  const FitDiagnostics fit = fit_ols(kPlaneDesign, d.rows, d.y);
  CHECK(fit.coefficients(0) == doctest::Approx(-583.36).epsilon(1e-6));
  CHECK(fit.coefficients(1) == doctest::Approx(-4.02).epsilon(1e-6));
  CHECK(fit.coefficients(2) == doctest::Approx(23.21).epsilon(1e-6));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("diagnostics match a normal-equations reference") {
  const Dataset d = noisy_plane(40, 5.0, 2.0, -3.0, 2.0, 4242);
  const FitDiagnostics fit = fit_ols(kPlaneDesign, d.rows, d.y);

  // Reference computation by explicitly inverting X'X.
  const Eigen::MatrixXd X = kPlaneDesign.build_matrix(d.rows);
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  const Eigen::VectorXd beta = xtx_inv * X.transpose() * d.y;
  const Eigen::VectorXd resid = d.y - X * beta;
  const double sse = resid.squaredNorm();
  const int n = 40, k = 3;
  const double sigma2 = sse / (n - k);
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, d.y.mean());
  const double sst = (d.y - mean).squaredNorm();

  CHECK(fit.r_squared == doctest::Approx(1.0 - sse / sst).epsilon(1e-9));
  CHECK(fit.adjusted_r_squared ==
        doctest::Approx(1.0 - (1.0 - fit.r_squared) * (n - 1.0) / (n - k)).epsilon(1e-9));
  CHECK(fit.residual_sigma == doctest::Approx(std::sqrt(sigma2)).epsilon(1e-9));
  for (int j = 0; j < k; ++j) {
    const double se = std::sqrt(sigma2 * xtx_inv(j, j));
    const double t = beta(j) / se;
    const double p = 2.0 * (1.0 - t_cdf_by_integration(std::fabs(t), n - k));
    CHECK(fit.coefficients(j) == doctest::Approx(beta(j)).epsilon(1e-9));
    CHECK(fit.std_errors(j) == doctest::Approx(se).epsilon(1e-8));
    CHECK(fit.t_stats(j) == doctest::Approx(t).epsilon(1e-8));
    CHECK(std::fabs(fit.p_values(j) - p) < 1e-8);
    CHECK(fit.p_values(j) >= 0.0);
    CHECK(fit.p_values(j) <= 1.0);
  }
  CHECK(fit.adjusted_r_squared <= fit.r_squared);
}

TEST_CASE("r-squared never decreases when a design is extended") {
  const Dataset d = noisy_plane(60, 1.0, 0.5, 0.0, 3.0, 11);
  const DesignSpec small{{Term::intercept(), Term::linear(0)}};
  const FitDiagnostics fs = fit_ols(small, d.rows, d.y);
  const FitDiagnostics fb = fit_ols(kPlaneDesign, d.rows, d.y);
  CHECK(fb.r_squared >= fs.r_squared - 1e-12);
}

TEST_CASE("fit error conditions") {
  Eigen::MatrixXd rows(3, 2);
  rows << 1.0, 2.0,
          2.0, 4.0,
          3.0, 6.0;
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 3.0;

  SUBCASE("too few observations") {
    const DesignSpec d{{Term::intercept(), Term::linear(0), Term::linear(1)}};
    CHECK_THROWS_AS(fit_ols(d, rows, y), FitError);
  }
  SUBCASE("rank-deficient design: x1 is a multiple of x0") {
    Eigen::MatrixXd wide(6, 2);
    wide << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
    Eigen::VectorXd yy(6);
    yy << 1, 2, 3, 4, 5, 6;
    const DesignSpec d{{Term::intercept(), Term::linear(0), Term::linear(1)}};
    CHECK_THROWS_AS(fit_ols(d, wide, yy), FitError);
  }
  SUBCASE("response length mismatch") {
    Eigen::VectorXd bad(2);
    bad << 1.0, 2.0;
    const DesignSpec d{{Term::intercept(), Term::linear(0)}};
    CHECK_THROWS_AS(fit_ols(d, rows, bad), FitError);
  }
  SUBCASE("invalid design is rejected") {
    const DesignSpec d{{Term::linear(0), Term::linear(0)}};
    CHECK_THROWS_AS(fit_ols(d, rows, y), ConfigError);
  }
}

TEST_CASE("t_cdf basics") {
  CHECK(t_cdf(0.0, 5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t_cdf(1e8, 5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t_cdf(-1e8, 5) < 1e-12);
  for (const double t : {0.3, 1.0, 2.5, 6.0}) {
    for (const int dof : {1, 4, 27}) {
      CHECK(std::fabs(t_cdf(t, dof) + t_cdf(-t, dof) - 1.0) < 1e-10);
    }
  }
  CHECK_THROWS_AS(t_cdf(1.0, 0), ConfigError);
  CHECK_THROWS_AS(t_cdf(1.0, -3), ConfigError);
  CHECK_THROWS_AS(t_cdf(std::nan(""), 5), ConfigError);
  CHECK_THROWS_AS(t_cdf(std::numeric_limits<double>::infinity(), 5), ConfigError);
}

TEST_CASE("t_cdf agrees with numeric integration of the density") {
  for (const int dof : {1, 3, 10, 50}) {
    for (const double t : {-6.5, -2.0, -0.4, 0.5, 1.3, 2.0, 3.7, 6.5}) {
      CHECK(std::fabs(t_cdf(t, dof) - t_cdf_by_integration(t, dof)) < 1e-8);
    }
  }
  // The documented reference point.
  CHECK(std::fabs(t_cdf(2.0, 10) - t_cdf_by_integration(2.0, 10)) < 1e-8);
}

TEST_CASE("backward elimination drops the inert feature") {
  // y depends on x1 only; x0 is noise-irrelevant.
  SeededRng rng{314};
  const int n = 120;
  Eigen::MatrixXd rows(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    rows(i, 0) = rng.uniform(0.0, 100.0);
    rows(i, 1) = rng.uniform(4.0, 256.0);
    y(i) = 20.0 * rows(i, 1) + rng.normal(5.0);
  }
  const FitDiagnostics fit = fit_ols(kPlaneDesign, rows, y);
  const EliminationResult out = eliminate_insignificant(fit, kPlaneDesign, rows, y);

  REQUIRE(out.removed.size() >= 1);
  bool removed_x0 = false;
  for (const Term& t : out.removed) removed_x0 |= (t == Term::linear(0));
  CHECK(removed_x0);
  bool kept_x1 = false;
  for (const Term& t : out.design.terms) kept_x1 |= (t == Term::linear(1));
  CHECK(kept_x1);

  const Eigen::VectorXd mapped = out.coefficients_in(kPlaneDesign);
  REQUIRE(mapped.size() == 3);
  CHECK(mapped(1) == 0.0);
  CHECK(mapped(2) == doctest::Approx(20.0).epsilon(1e-2));
}

TEST_CASE("all-significant designs survive untouched") {
  const Dataset d = noisy_plane(150, 40.0, -4.0, 23.0, 1.0, 5150);
  const FitDiagnostics fit = fit_ols(kPlaneDesign, d.rows, d.y);
  const EliminationResult out = eliminate_insignificant(fit, kPlaneDesign, d.rows, d.y);
  CHECK(out.removed.empty());
  CHECK(out.design.terms == kPlaneDesign.terms);
  CHECK(out.fit.coefficients.isApprox(fit.coefficients));
}

TEST_CASE("pure-noise features are retained at roughly the alpha rate") {
  // Each feature should survive in about 5% of trials; 100 seeded trials per
  // feature keeps the bound loose but meaningful.
  int kept0 = 0, kept1 = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SeededRng rng{mix_seed({seed, 77})};
    const int n = 50;
    Eigen::MatrixXd rows(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      rows(i, 0) = rng.uniform(-1.0, 1.0);
      rows(i, 1) = rng.uniform(-1.0, 1.0);
      y(i) = rng.normal(1.0);
    }
    const FitDiagnostics fit = fit_ols(kPlaneDesign, rows, y);
    const EliminationResult out = eliminate_insignificant(fit, kPlaneDesign, rows, y);
    for (const Term& t : out.design.terms) {
      if (t == Term::linear(0)) ++kept0;
      if (t == Term::linear(1)) ++kept1;
    }
  }
  CHECK(kept0 <= 12);
  CHECK(kept1 <= 12);
}

TEST_CASE("zero-noise elimination leaves only the true generator term") {
  SeededRng rng{21};
  const int n = 40;
  Eigen::MatrixXd rows(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    rows(i, 0) = rng.uniform(0.0, 100.0);
    rows(i, 1) = rng.uniform(4.0, 256.0);
    y(i) = 24.497 * rows(i, 1);
  }
  const FitDiagnostics fit = fit_ols(kPlaneDesign, rows, y);

  SUBCASE("with intercept removal allowed") {
    const EliminationResult out =
        eliminate_insignificant(fit, kPlaneDesign, rows, y, 0.05, true);
    REQUIRE(out.design.terms.size() == 1);
    CHECK(out.design.terms[0] == Term::linear(1));
    const Eigen::VectorXd mapped = out.coefficients_in(kPlaneDesign);
    CHECK(mapped(0) == 0.0);
    CHECK(mapped(1) == 0.0);
    CHECK(mapped(2) == doctest::Approx(24.497).epsilon(1e-9));
  }
  SUBCASE("without the flag the intercept is pinned") {
    const EliminationResult out = eliminate_insignificant(fit, kPlaneDesign, rows, y);
    REQUIRE(out.design.terms.size() == 2);
    CHECK(out.design.terms[0] == Term::intercept());
    CHECK(out.design.terms[1] == Term::linear(1));
    CHECK(std::fabs(out.fit.coefficients(0)) < 1e-9);
  }
}

TEST_CASE("the last term is never dropped") {
  SeededRng rng{8};
  const int n = 30;
  Eigen::MatrixXd rows(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    rows(i, 0) = rng.uniform(0.0, 1.0);
    y(i) = rng.normal(1.0);  // no relationship at all
  }
  const DesignSpec single{{Term::linear(0)}};
  const FitDiagnostics fit = fit_ols(single, rows, y);
  const EliminationResult out = eliminate_insignificant(fit, single, rows, y, 0.05, true);
  CHECK(out.design.terms.size() == 1);
  CHECK(out.removed.empty());
}

TEST_CASE("elimination rejects a bad alpha") {
  Eigen::MatrixXd rows(5, 1);
  rows << 1, 2, 3, 4, 5;
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  const DesignSpec d{{Term::intercept(), Term::linear(0)}};
  const FitDiagnostics fit = fit_ols(d, rows, y);
  CHECK_THROWS_AS(eliminate_insignificant(fit, d, rows, y, 0.0), ConfigError);
  CHECK_THROWS_AS(eliminate_insignificant(fit, d, rows, y, 1.0), ConfigError);
}
