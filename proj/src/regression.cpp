#include "latbal/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace latbal {
namespace {

// A fit whose residual sum of squares falls below this fraction of the raw
// response energy is treated as numerically exact. QR rounding on the data
// scales seen here sits many orders below this line, and any genuine noise
// sits many orders above it.
constexpr double kPerfectFitRatio = 1e-16;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kFloor = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIterations = 400;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFloor) d = kFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

// Regularized incomplete beta I_x(a, b).
double incomplete_beta_reg(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) {
    throw Error("incomplete beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - bt * beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a t statistic, computed without cancellation against 1.
double two_sided_p(double t, int dof) {
  if (!std::isfinite(t)) return 0.0;  // infinite t only arises from an exact fit
  const double nu = static_cast<double>(dof);
  const double x = nu / (nu + t * t);
  return incomplete_beta_reg(0.5 * nu, 0.5, x);
}

// Residual sum of squares of the least-squares fit of X (minus one column)
// against y. Used to judge term relevance when the full fit is exact.
double sse_without_column(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          Eigen::Index dropped) {
  const Eigen::Index k = x.cols();
  if (k == 1) return y.squaredNorm();  // empty model predicts zero
  Eigen::MatrixXd reduced(x.rows(), k - 1);
  Eigen::Index out = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (j == dropped) continue;
    reduced.col(out++) = x.col(j);
  }
  const Eigen::VectorXd beta = reduced.colPivHouseholderQr().solve(y);
  return (y - reduced * beta).squaredNorm();
}

}  // namespace

Term Term::interaction(int first, int second) {
  if (first == second) {
    throw ConfigError("design term: interaction of a feature with itself is squared(" +
                      std::to_string(first) + ")");
  }
  return {TermKind::kInteraction, std::min(first, second), std::max(first, second)};
}

std::string to_string(const Term& term) {
  switch (term.kind) {
    case TermKind::kIntercept:
      return "intercept";
    case TermKind::kLinear:
      return "x" + std::to_string(term.a);
    case TermKind::kInteraction:
      return "x" + std::to_string(term.a) + ":x" + std::to_string(term.b);
    case TermKind::kSquared:
      return "x" + std::to_string(term.a) + "^2";
  }
  return "?";
}

void DesignSpec::validate() const {
  if (terms.empty()) {
    throw ConfigError("design: no terms");
  }
  int intercepts = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (t.kind == TermKind::kIntercept) {
      ++intercepts;
    } else if (t.a < 0 || (t.kind == TermKind::kInteraction && t.b < 0)) {
      throw ConfigError("design: term " + to_string(t) + " has a negative feature index");
    }
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (t == terms[j]) {
        throw ConfigError("design: duplicate term " + to_string(t));
      }
    }
  }
  if (intercepts > 1) {
    throw ConfigError("design: more than one intercept");
  }
}

bool DesignSpec::has_intercept() const {
  return std::any_of(terms.begin(), terms.end(),
                     [](const Term& t) { return t.kind == TermKind::kIntercept; });
}

Eigen::MatrixXd DesignSpec::build_matrix(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  const auto n = rows.rows();
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const Term& t = terms[j];
    const int max_feature = std::max(t.a, t.b);
    if (t.kind != TermKind::kIntercept && max_feature >= rows.cols()) {
      throw ConfigError("design: term " + to_string(t) + " references feature " +
                        std::to_string(max_feature) + " but the data has " +
                        std::to_string(rows.cols()) + " columns");
    }
    auto col = x.col(static_cast<Eigen::Index>(j));
    switch (t.kind) {
      case TermKind::kIntercept:
        col.setOnes();
        break;
      case TermKind::kLinear:
        col = rows.col(t.a);
        break;
      case TermKind::kInteraction:
        col = rows.col(t.a).cwiseProduct(rows.col(t.b));
        break;
      case TermKind::kSquared:
        col = rows.col(t.a).array().square();
        break;
    }
  }
  return x;
}

FitDiagnostics fit_ols(const DesignSpec& design,
                       const Eigen::Ref<const Eigen::MatrixXd>& rows,
                       const Eigen::Ref<const Eigen::VectorXd>& response) {
  design.validate();
  const Eigen::Index n = rows.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(design.terms.size());
  if (response.size() != n) {
    throw FitError("fit_ols: " + std::to_string(n) + " rows but " +
                   std::to_string(response.size()) + " response values");
  }
  if (n <= k) {
    throw FitError("fit_ols: " + std::to_string(n) + " observations cannot support " +
                   std::to_string(k) + " terms");
  }

  const Eigen::MatrixXd x = design.build_matrix(rows);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k) {
    throw FitError("fit_ols: design matrix is rank-deficient (rank " +
                   std::to_string(qr.rank()) + " of " + std::to_string(k) + ")");
  }

  FitDiagnostics d;
  d.n_observations = static_cast<int>(n);
  d.n_terms = static_cast<int>(k);
  d.coefficients = qr.solve(response);

  const Eigen::VectorXd residuals = response - x * d.coefficients;
  const double sse = residuals.squaredNorm();
  const double ssy = response.squaredNorm();
  const bool with_intercept = design.has_intercept();
  const double mean = response.mean();
  const double sst_centered = (response.array() - mean).square().sum();
  const double sst = with_intercept ? sst_centered : ssy;

  const bool perfect = sse <= kPerfectFitRatio * ssy;
  if (sst <= kPerfectFitRatio * ssy) {
    d.r_squared = perfect ? 1.0 : 0.0;
  } else {
    d.r_squared = std::clamp(1.0 - sse / sst, 0.0, 1.0);
  }

  const double dof = static_cast<double>(n - k);
  const double r2_scale = with_intercept ? static_cast<double>(n - 1) : static_cast<double>(n);
  d.adjusted_r_squared = 1.0 - (1.0 - d.r_squared) * r2_scale / dof;

  const double sigma2 = sse / dof;
  d.residual_sigma = std::sqrt(sigma2);

  // Covariance of the coefficients from the pivoted QR factorization:
  // X P = Q R, so (X'X)^-1 = P (R'R)^-1 P'.
  const Eigen::MatrixXd r_factor =
      qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r_factor.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv_permuted = r_inv * r_inv.transpose();
  const Eigen::MatrixXd xtx_inv =
      qr.colsPermutation() * xtx_inv_permuted * qr.colsPermutation().transpose();

  d.std_errors = (sigma2 * xtx_inv.diagonal().array()).cwiseMax(0.0).sqrt();
  d.t_stats.resize(k);
  d.p_values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (perfect) {
      // No noise left to test against; a term matters exactly when dropping
      // it breaks the exact reproduction of the response.
      const double reduced_sse = sse_without_column(x, response, j);
      const bool redundant = reduced_sse <= kPerfectFitRatio * ssy;
      d.p_values[j] = redundant ? 1.0 : 0.0;
      d.t_stats[j] = redundant ? 0.0
                               : std::copysign(std::numeric_limits<double>::infinity(),
                                               d.coefficients[j]);
    } else {
      d.t_stats[j] = d.coefficients[j] / d.std_errors[j];
      d.p_values[j] = two_sided_p(d.t_stats[j], static_cast<int>(n - k));
    }
  }
  return d;
}

double t_cdf(double t, int dof) {
  if (!std::isfinite(t)) {
    throw ConfigError("t_cdf: non-finite t");
  }
  if (dof < 1) {
    throw ConfigError("t_cdf: dof must be >= 1");
  }
  if (t == 0.0) return 0.5;
  const double half_tail = 0.5 * two_sided_p(t, dof);  // P(T > |t|)
  return t > 0.0 ? 1.0 - half_tail : half_tail;
}

Eigen::VectorXd EliminationResult::coefficients_in(const DesignSpec& original) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(original.terms.size()));
  for (std::size_t j = 0; j < design.terms.size(); ++j) {
    const auto it = std::find(original.terms.begin(), original.terms.end(), design.terms[j]);
    if (it == original.terms.end()) {
      throw Error("elimination result does not match the given design");
    }
    out[static_cast<Eigen::Index>(it - original.terms.begin())] =
        fit.coefficients[static_cast<Eigen::Index>(j)];
  }
  return out;
}

EliminationResult eliminate_insignificant(const FitDiagnostics& fit,
                                          const DesignSpec& design,
                                          const Eigen::Ref<const Eigen::MatrixXd>& rows,
                                          const Eigen::Ref<const Eigen::VectorXd>& response,
                                          double alpha,
                                          bool allow_intercept_removal) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("eliminate_insignificant: alpha must lie in (0, 1)");
  }
  EliminationResult result{design, fit, {}};
  while (result.design.terms.size() > 1) {
    // Highest p-value first; on ties a non-intercept term goes before the
    // intercept, then the later term in the design.
    int worst = -1;
    for (int j = 0; j < static_cast<int>(result.design.terms.size()); ++j) {
      const bool is_intercept = result.design.terms[j].kind == TermKind::kIntercept;
      if (is_intercept && !allow_intercept_removal) continue;
      if (result.fit.p_values[j] <= alpha) continue;
      if (worst < 0) {
        worst = j;
        continue;
      }
      const double p = result.fit.p_values[j];
      const double p_worst = result.fit.p_values[worst];
      const bool worst_is_intercept =
          result.design.terms[worst].kind == TermKind::kIntercept;
      if (p > p_worst || (p == p_worst && worst_is_intercept && !is_intercept) ||
          (p == p_worst && worst_is_intercept == is_intercept && j > worst)) {
        worst = j;
      }
    }
    if (worst < 0) break;
    result.removed.push_back(result.design.terms[worst]);
    result.design.terms.erase(result.design.terms.begin() + worst);
    result.fit = fit_ols(result.design, rows, response);
  }
  return result;
}

}  // namespace latbal
