#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/rng.hpp"

namespace auxmi {

enum class ModelKind { Linear, Logistic, Ordinal };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

inline constexpr double kRankTolerance = 1e-10;
inline constexpr int kMaxNewtonIterations = 50;
inline constexpr double kCoefTolerance = 1e-10;
inline constexpr double kSeparationProbability = 1e-10;
inline constexpr double kDivergenceBound = 1e3;
inline constexpr int kMaxThresholdRedraws = 100;

/// Ordinary least squares with an intercept.
struct LinearFit {
  std::vector<std::string> terms;  // "(Intercept)", predictors...
  Eigen::VectorXd coef;
  double sigma2_hat = 0.0;
  Eigen::MatrixXd xtx_inverse;  // (X'X)^-1
  Eigen::MatrixXd r_inverse;    // R^-1 from X = QR, so xtx_inverse = R^-1 R^-T
  double r2 = 0.0;
  int n = 0;
  int dof_resid = 0;
};

/// Logistic regression (with intercept) fitted by Newton/IRLS.
struct GlmFit {
  std::vector<std::string> terms;
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;  // inverse observed information
  double loglik = 0.0;
  double loglik_null = 0.0;
  double pseudo_r2 = 0.0;
  bool converged = false;
  bool separation_detected = false;
  int iterations = 0;
  int n = 0;
  std::vector<double> loglik_trace;  // after each accepted step, starting value first
};

/// Proportional-odds cumulative-logit model, P(Y <= level k | x) = F(threshold_k - x'coef).
/// There is no intercept; for K = 2 the logistic intercept equals -threshold_1.
struct OrdinalFit {
  std::vector<std::string> terms;  // slope names
  std::vector<double> levels;      // response codes in order
  Eigen::VectorXd coef;
  Eigen::VectorXd thresholds;      // K-1, strictly increasing
  Eigen::MatrixXd cov;             // over (thresholds, coef), in that order
  double loglik = 0.0;
  double loglik_null = 0.0;
  double pseudo_r2 = 0.0;
  bool converged = false;
  bool separation_detected = false;
  int iterations = 0;
  int n = 0;
  std::vector<double> loglik_trace;
};

/// One draw from the approximate posterior of a fitted model.
struct ParameterDraw {
  ModelKind model_kind = ModelKind::Linear;
  Eigen::VectorXd coef;        // linear/logistic: intercept first; ordinal: slopes
  Eigen::VectorXd thresholds;  // ordinal only
  double dispersion = 0.0;     // linear only
  std::vector<double> levels;  // ordinal only
};

// Matrix-level engines. `x` holds predictor columns without an intercept.

LinearFit fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names);
GlmFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names);
/// `ranks` are zero-based category positions in [0, levels.size()).
OrdinalFit fit_ordinal(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks, const std::vector<double>& levels,
                       const std::vector<std::string>& names);

// Dataset-level wrappers: every row must be observed on the formula variables.

LinearFit fit_linear(const Dataset& d, const ModelFormula& f);
GlmFit fit_logistic(const Dataset& d, const ModelFormula& f);
OrdinalFit fit_ordinal(const Dataset& d, const ModelFormula& f);

/// Predictor columns of `f` as a matrix (no intercept). Throws on masked cells.
Eigen::MatrixXd predictor_matrix(const Dataset& d, const std::vector<std::string>& predictors);

ParameterDraw draw_parameters(const LinearFit& fit, Rng& rng);
ParameterDraw draw_parameters(const GlmFit& fit, Rng& rng);
ParameterDraw draw_parameters(const OrdinalFit& fit, Rng& rng);

/// Draws imputations for the rows of `x` (predictor values, no intercept).
Eigen::VectorXd impute_draw(const ParameterDraw& params, const Eigen::MatrixXd& x, Rng& rng);

double mcfadden_pseudo_r2(const GlmFit& fit);
double mcfadden_pseudo_r2(const OrdinalFit& fit);

// Log-likelihood helpers, exposed for oracles and tests. `x` excludes the
// intercept; logistic `coef` includes it.

double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef);
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef);
double ordinal_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks, const Eigen::VectorXd& thresholds,
                      const Eigen::VectorXd& coef);
/// Gradient over (thresholds, coef).
Eigen::VectorXd ordinal_score(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks,
                              const Eigen::VectorXd& thresholds, const Eigen::VectorXd& coef);
/// Category probabilities at linear predictor `eta`.
Eigen::VectorXd ordinal_cell_probabilities(const Eigen::VectorXd& thresholds, double eta);

inline double inv_logit(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace auxmi
