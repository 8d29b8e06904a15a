// regression.hpp - Ordinary least squares with the diagnostics the modeler
// relies on: R-squared, adjusted R-squared, per-term t-tests, and backward
// elimination of insignificant terms.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "latbal/domain.hpp"

namespace latbal {

enum class TermKind { kIntercept, kLinear, kInteraction, kSquared };

// One column of a design matrix, described symbolically. Feature indices
// refer to columns of the raw feature matrix handed to fit_ols.
struct Term {
  TermKind kind = TermKind::kIntercept;
  int a = -1;
  int b = -1;

  static Term intercept() { return {TermKind::kIntercept, -1, -1}; }
  static Term linear(int feature) { return {TermKind::kLinear, feature, -1}; }
  static Term squared(int feature) { return {TermKind::kSquared, feature, -1}; }
  // Product of two distinct features; stored with a < b so that the
  // descriptor is order-independent. interaction(i, i) is rejected: that
  // column is squared(i).
  static Term interaction(int first, int second);

  friend bool operator==(const Term&, const Term&) = default;
};

std::string to_string(const Term& term);

struct DesignSpec {
  std::vector<Term> terms;

  // Throws ConfigError on duplicate descriptors, more than one intercept, or
  // negative feature indices.
  void validate() const;

  bool has_intercept() const;

  // Evaluates every term against a raw feature matrix (one row per
  // observation, one column per feature).
  Eigen::MatrixXd build_matrix(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;
};

struct FitDiagnostics {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  double r_squared = 0.0;
  double adjusted_r_squared = 0.0;
  double residual_sigma = 0.0;
  int n_observations = 0;
  int n_terms = 0;
};

// Least-squares fit of the design against the response, solved by
// column-pivoted QR. Throws FitError on a rank-deficient design or when the
// observation count does not exceed the term count.
//
// When the residual is numerically zero (a noise-free generator), the usual
// t-test is meaningless: sigma-hat underflows and t becomes a ratio of
// rounding errors. In that regime each term's p-value is decided
// algebraically instead: 1 when refitting without the term still reproduces
// the response exactly, 0 otherwise.
FitDiagnostics fit_ols(const DesignSpec& design,
                       const Eigen::Ref<const Eigen::MatrixXd>& rows,
                       const Eigen::Ref<const Eigen::VectorXd>& response);

// Student's t cumulative distribution, via the regularized incomplete beta
// function. Throws ConfigError on non-finite t or dof < 1.
double t_cdf(double t, int dof);

struct EliminationResult {
  DesignSpec design;    // surviving terms, in original order
  FitDiagnostics fit;   // fit of the surviving design
  std::vector<Term> removed;

  // Coefficients mapped back onto an original design, with removed terms
  // reported as exact zeros.
  Eigen::VectorXd coefficients_in(const DesignSpec& original) const;
};

// Backward elimination: repeatedly drops the single highest-p-value removable
// term with p > alpha and refits, until every remaining term is significant.
// The intercept is only removable when allow_intercept_removal is set, and
// the last remaining term is never dropped.
EliminationResult eliminate_insignificant(const FitDiagnostics& fit,
                                          const DesignSpec& design,
                                          const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                          const Eigen::Ref<const Eigen::VectorXd>& response,
                                          double alpha = 0.05,
                                          bool allow_intercept_removal = false);

}  // namespace latbal
