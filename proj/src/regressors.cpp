#include "auxmi/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "auxmi/error.hpp"

namespace auxmi {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

std::vector<std::string> intercept_terms(const std::vector<std::string>& names) {
  std::vector<std::string> terms{"(Intercept)"};
  terms.insert(terms.end(), names.begin(), names.end());
  return terms;
}

// Non-pivoted Householder QR: |R_jj| measures the part of column j not
// explained by columns 0..j-1, so the first small diagonal names the culprit.
void check_full_rank(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, const Eigen::MatrixXd& design,
                     const std::vector<std::string>& terms) {
  double max_norm = design.colwise().norm().maxCoeff();
  double tol = kRankTolerance * max_norm;
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    if (!(std::abs(r(j, j)) > tol)) {
      throw FitError("rank deficient design: column '" + terms[static_cast<std::size_t>(j)] +
                         "' is linearly dependent on the preceding columns",
                     "rank_deficient");
    }
  }
}

void check_full_rank(const Eigen::MatrixXd& design, const std::vector<std::string>& terms) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  check_full_rank(qr, design, terms);
}

double log_inv_logit(double t) { return t >= 0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t)); }

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& info) {
  Eigen::MatrixXd inv = info.ldlt().solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  return 0.5 * (inv + inv.transpose());
}

// Lower factor L with L L' = cov. Falls back to a clipped eigen-decomposition
// when cov is only semi-definite.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

// ---- ordinal internals

struct OrdinalDerivatives {
  double loglik = 0.0;
  Eigen::VectorXd grad;  // over (thresholds, coef)
  Eigen::MatrixXd hess;
  bool extreme = false;  // some cumulative probability within kSeparationProbability of 0/1
};

// Per-boundary quantities F, f = F(1-F), f' = f(1-2F) with the conventions
// F(-inf) = 0 and F(+inf) = 1.
struct Boundary {
  double cdf = 0.0;
  double pdf = 0.0;
  double dpdf = 0.0;
};

Boundary boundary_at(double t) {
  double cdf = inv_logit(t);
  double pdf = cdf * (1.0 - cdf);
  return {cdf, pdf, pdf * (1.0 - 2.0 * cdf)};
}

double cell_probability(const Eigen::VectorXd& thresholds, int rank, double eta) {
  const int k_minus_1 = static_cast<int>(thresholds.size());
  if (rank == 0) return inv_logit(thresholds(0) - eta);
  if (rank == k_minus_1) return inv_logit(eta - thresholds(k_minus_1 - 1));
  double a = thresholds(rank) - eta;
  double b = thresholds(rank - 1) - eta;
  // Subtract on the tail with more precision.
  if (b > 0) return inv_logit(-b) - inv_logit(-a);
  return inv_logit(a) - inv_logit(b);
}

OrdinalDerivatives ordinal_derivatives(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks,
                                       const Eigen::VectorXd& thresholds, const Eigen::VectorXd& coef,
                                       bool want_hessian) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index kt = thresholds.size();
  const Eigen::Index q = kt + p;
  OrdinalDerivatives out;
  out.grad = Eigen::VectorXd::Zero(q);
  if (want_hessian) out.hess = Eigen::MatrixXd::Zero(q, q);

  Eigen::VectorXd eta = p ? Eigen::VectorXd(x * coef) : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd d_eta(n);
  Eigen::VectorXd h_eta(n);
  Eigen::MatrixXd h_theta_eta = want_hessian ? Eigen::MatrixXd::Zero(kt, n) : Eigen::MatrixXd();

  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = ranks(i);
    const bool has_upper = k < kt;
    const bool has_lower = k > 0;
    Boundary up = has_upper ? boundary_at(thresholds(k) - eta(i)) : Boundary{1.0, 0.0, 0.0};
    Boundary lo = has_lower ? boundary_at(thresholds(k - 1) - eta(i)) : Boundary{0.0, 0.0, 0.0};
    for (Eigen::Index j = 0; j < kt; ++j) {
      double c = inv_logit(thresholds(j) - eta(i));
      if (c < kSeparationProbability || c > 1.0 - kSeparationProbability) out.extreme = true;
    }
    double prob = std::max(cell_probability(thresholds, k, eta(i)), std::numeric_limits<double>::min());
    out.loglik += std::log(prob);

    double inv_p = 1.0 / prob;
    double df = up.pdf - lo.pdf;
    if (has_upper) out.grad(k) += up.pdf * inv_p;
    if (has_lower) out.grad(k - 1) -= lo.pdf * inv_p;
    d_eta(i) = -df * inv_p;

    if (!want_hessian) continue;
    double inv_p2 = inv_p * inv_p;
    if (has_upper) {
      out.hess(k, k) += up.dpdf * inv_p - up.pdf * up.pdf * inv_p2;
      h_theta_eta(k, i) = -up.dpdf * inv_p + up.pdf * df * inv_p2;
    }
    if (has_lower) {
      out.hess(k - 1, k - 1) += -lo.dpdf * inv_p - lo.pdf * lo.pdf * inv_p2;
      h_theta_eta(k - 1, i) = lo.dpdf * inv_p - lo.pdf * df * inv_p2;
    }
    if (has_upper && has_lower) {
      double cross = up.pdf * lo.pdf * inv_p2;
      out.hess(k, k - 1) += cross;
      out.hess(k - 1, k) += cross;
    }
    h_eta(i) = (up.dpdf - lo.dpdf) * inv_p - df * df * inv_p2;
  }

  if (p) {
    out.grad.tail(p) = x.transpose() * d_eta;
    if (want_hessian) {
      Eigen::MatrixXd tb = h_theta_eta * x;  // kt x p
      out.hess.topRightCorner(kt, p) = tb;
      out.hess.bottomLeftCorner(p, kt) = tb.transpose();
      out.hess.bottomRightCorner(p, p) = x.transpose() * (x.array().colwise() * h_eta.array()).matrix();
    }
  }
  return out;
}

bool strictly_increasing(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (!(v(i) > v(i - 1))) return false;
  return true;
}

void require_complete(const Dataset& d, const ModelFormula& f) {
  for (const auto& name : f.variables()) {
    if (d.missing_count(d.index_of(name)) > 0)
      throw DataError("fit: variable '" + name + "' has missing cells; apply listwise_complete first");
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear:
      return "linear";
    case ModelKind::Logistic:
      return "logistic";
    case ModelKind::Ordinal:
      return "ordinal";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "linear") return ModelKind::Linear;
  if (s == "logistic") return ModelKind::Logistic;
  if (s == "ordinal") return ModelKind::Ordinal;
  throw ConfigError("unknown model kind '" + s + "' (expected linear, logistic or ordinal)");
}

// ------------------------------------------------------------------- linear

LinearFit fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  if (n <= p)
    throw FitError("linear fit needs more rows than coefficients (n = " + std::to_string(n) +
                       ", p = " + std::to_string(p) + ")",
                   "too_few_rows");
  LinearFit fit;
  fit.terms = intercept_terms(names);
  Eigen::MatrixXd design = with_intercept(x);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  check_full_rank(qr, design, fit.terms);

  fit.coef = qr.solve(y);
  Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  fit.r_inverse = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  fit.xtx_inverse = fit.r_inverse * fit.r_inverse.transpose();

  double sse = (y - design * fit.coef).squaredNorm();
  double sst = (y.array() - y.mean()).square().sum();
  fit.n = static_cast<int>(n);
  fit.dof_resid = static_cast<int>(n - p);
  fit.sigma2_hat = sse / fit.dof_resid;
  fit.r2 = sst > 0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 0.0;
  return fit;
}

LinearFit fit_linear(const Dataset& d, const ModelFormula& f) {
  f.validate(d);
  require_complete(d, f);
  auto y = d.column(f.response);
  return fit_linear(predictor_matrix(d, f.predictors), Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()),
                    f.predictors);
}

// ----------------------------------------------------------------- logistic

double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef) {
  Eigen::VectorXd eta = with_intercept(x) * coef;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += y(i) > 0.5 ? log_inv_logit(eta(i)) : log_inv_logit(-eta(i));
  return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& coef) {
  Eigen::MatrixXd design = with_intercept(x);
  Eigen::VectorXd eta = design * coef;
  Eigen::VectorXd resid = y - eta.unaryExpr([](double t) { return inv_logit(t); });
  return design.transpose() * resid;
}

GlmFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  for (Eigen::Index i = 0; i < n; ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw DataError("logistic fit: response must be coded 0/1");
  if (n <= p)
    throw FitError("logistic fit needs more rows than coefficients (n = " + std::to_string(n) +
                       ", p = " + std::to_string(p) + ")",
                   "too_few_rows");

  GlmFit fit;
  fit.terms = intercept_terms(names);
  fit.n = static_cast<int>(n);
  Eigen::MatrixXd design = with_intercept(x);
  check_full_rank(design, fit.terms);

  double ybar = y.mean();
  fit.loglik_null = 0.0;
  if (ybar > 0.0 && ybar < 1.0) fit.loglik_null = n * (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = logistic_loglik(x, y, beta);
  fit.loglik_trace.push_back(ll);
  Eigen::MatrixXd info(p, p);

  auto information_at = [&](const Eigen::VectorXd& b, Eigen::VectorXd& grad, bool& extreme) {
    Eigen::VectorXd eta = design * b;
    Eigen::VectorXd prob = eta.unaryExpr([](double t) { return inv_logit(t); });
    extreme = ((prob.array() < kSeparationProbability) || (prob.array() > 1.0 - kSeparationProbability)).any();
    Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    grad = design.transpose() * (y - prob);
    info = design.transpose() * (design.array().colwise() * w.array()).matrix();
  };

  Eigen::VectorXd grad;
  bool extreme = false;
  information_at(beta, grad, extreme);
  for (int it = 1; it <= kMaxNewtonIterations; ++it) {
    fit.iterations = it;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      fit.separation_detected = true;
      break;
    }
    Eigen::VectorXd step = ldlt.solve(grad);
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double ll_new = logistic_loglik(x, y, candidate);
    while (!(ll_new >= ll - 1e-12 * std::abs(ll)) && scale > 1e-10) {
      scale *= 0.5;
      candidate = beta + scale * step;
      ll_new = logistic_loglik(x, y, candidate);
    }
    double change = max_abs(scale * step);
    beta = candidate;
    ll = ll_new;
    fit.loglik_trace.push_back(ll);
    information_at(beta, grad, extreme);
    if (extreme || max_abs(beta) > kDivergenceBound) {
      fit.separation_detected = true;
      break;
    }
    if (change < kCoefTolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.coef = beta;
  fit.loglik = ll;
  if (!fit.converged && !fit.separation_detected)
    throw FitError("logistic fit did not converge after " + std::to_string(fit.iterations) + " iterations",
                   "not_converged");
  fit.cov = symmetric_inverse(info);
  fit.pseudo_r2 = fit.loglik_null != 0.0 ? 1.0 - fit.loglik / fit.loglik_null : 0.0;
  return fit;
}

GlmFit fit_logistic(const Dataset& d, const ModelFormula& f) {
  f.validate(d);
  if (d.variable(d.index_of(f.response)).kind.tag() != KindTag::Binary)
    throw ConfigError("logistic fit: response '" + f.response + "' is not binary");
  require_complete(d, f);
  auto y = d.column(f.response);
  return fit_logistic(predictor_matrix(d, f.predictors), Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()),
                      f.predictors);
}

// ------------------------------------------------------------------ ordinal

Eigen::VectorXd ordinal_cell_probabilities(const Eigen::VectorXd& thresholds, double eta) {
  const Eigen::Index k = thresholds.size() + 1;
  Eigen::VectorXd probs(k);
  for (Eigen::Index r = 0; r < k; ++r) probs(r) = cell_probability(thresholds, static_cast<int>(r), eta);
  return probs;
}

double ordinal_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks, const Eigen::VectorXd& thresholds,
                      const Eigen::VectorXd& coef) {
  Eigen::VectorXd eta = x.cols() ? Eigen::VectorXd(x * coef) : Eigen::VectorXd::Zero(x.rows());
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += std::log(std::max(cell_probability(thresholds, ranks(i), eta(i)), std::numeric_limits<double>::min()));
  return ll;
}

Eigen::VectorXd ordinal_score(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks,
                              const Eigen::VectorXd& thresholds, const Eigen::VectorXd& coef) {
  return ordinal_derivatives(x, ranks, thresholds, coef, false).grad;
}

OrdinalFit fit_ordinal(const Eigen::MatrixXd& x, const Eigen::VectorXi& ranks, const std::vector<double>& levels,
                       const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index k = static_cast<Eigen::Index>(levels.size());
  if (k < 2) throw ConfigError("ordinal fit needs at least 2 levels");
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ranks(i) < 0 || ranks(i) >= k) throw DataError("ordinal fit: category rank out of range");
    ++counts[static_cast<std::size_t>(ranks(i))];
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    if (counts[static_cast<std::size_t>(r)] == 0)
      throw DataError("ordinal fit: level " + format_double(levels[static_cast<std::size_t>(r)]) +
                      " is not observed; collapse levels before fitting");
  }
  if (n <= p + k - 1)
    throw FitError("ordinal fit needs n > p + K - 1 (n = " + std::to_string(n) + ")", "too_few_rows");

  OrdinalFit fit;
  fit.terms = names;
  fit.levels = levels;
  fit.n = static_cast<int>(n);
  check_full_rank(with_intercept(x), intercept_terms(names));

  // Start at the intercept-only MLE: empirical cumulative logits.
  Eigen::VectorXd theta(k - 1);
  double cum = 0.0;
  fit.loglik_null = 0.0;
  for (Eigen::Index r = 0; r < k; ++r) {
    double share = static_cast<double>(counts[static_cast<std::size_t>(r)]) / static_cast<double>(n);
    fit.loglik_null += static_cast<double>(counts[static_cast<std::size_t>(r)]) * std::log(share);
    if (r < k - 1) {
      cum += share;
      theta(r) = std::log(cum / (1.0 - cum));
    }
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const Eigen::Index q = k - 1 + p;

  OrdinalDerivatives der = ordinal_derivatives(x, ranks, theta, beta, true);
  double ll = der.loglik;
  fit.loglik_trace.push_back(ll);
  for (int it = 1; it <= kMaxNewtonIterations; ++it) {
    fit.iterations = it;
    Eigen::MatrixXd info = -der.hess;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      fit.separation_detected = true;
      break;
    }
    Eigen::VectorXd step = ldlt.solve(der.grad);
    double scale = 1.0;
    Eigen::VectorXd cand_theta, cand_beta;
    double ll_new = -std::numeric_limits<double>::infinity();
    while (scale > 1e-10) {
      cand_theta = theta + scale * step.head(k - 1);
      cand_beta = beta + scale * step.tail(p);
      if (strictly_increasing(cand_theta)) {
        ll_new = ordinal_loglik(x, ranks, cand_theta, cand_beta);
        if (ll_new >= ll - 1e-12 * std::abs(ll)) break;
      }
      scale *= 0.5;
    }
    if (!(scale > 1e-10)) {
      // No acceptable step: the likelihood is flat along the Newton direction.
      fit.separation_detected = der.extreme;
      if (!fit.separation_detected && max_abs(step) < 1e-6) fit.converged = true;
      break;
    }
    double change = max_abs(scale * step);
    theta = cand_theta;
    beta = cand_beta;
    ll = ll_new;
    fit.loglik_trace.push_back(ll);
    der = ordinal_derivatives(x, ranks, theta, beta, true);
    if (der.extreme || max_abs(theta) > kDivergenceBound || max_abs(beta) > kDivergenceBound) {
      fit.separation_detected = true;
      break;
    }
    if (change < kCoefTolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.thresholds = theta;
  fit.coef = beta;
  fit.loglik = ll;
  if (!fit.converged && !fit.separation_detected)
    throw FitError("ordinal fit did not converge after " + std::to_string(fit.iterations) + " iterations",
                   "not_converged");
  fit.cov = q ? symmetric_inverse(-der.hess) : Eigen::MatrixXd();
  fit.pseudo_r2 = fit.loglik_null != 0.0 ? 1.0 - fit.loglik / fit.loglik_null : 0.0;
  return fit;
}

OrdinalFit fit_ordinal(const Dataset& d, const ModelFormula& f) {
  f.validate(d);
  const auto& kind = d.variable(d.index_of(f.response)).kind;
  if (kind.tag() != KindTag::Ordinal) throw ConfigError("ordinal fit: response '" + f.response + "' is not ordinal");
  require_complete(d, f);
  auto y = d.column(f.response);
  Eigen::VectorXi ranks(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) ranks(static_cast<Eigen::Index>(i)) = kind.rank_of(y[i]);
  return fit_ordinal(predictor_matrix(d, f.predictors), ranks, kind.levels(), f.predictors);
}

// ------------------------------------------------------------------ shared

Eigen::MatrixXd predictor_matrix(const Dataset& d, const std::vector<std::string>& predictors) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.n_rows()), static_cast<Eigen::Index>(predictors.size()));
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    std::size_t col = d.index_of(predictors[j]);
    if (d.missing_count(col) > 0) throw DataError("predictor '" + predictors[j] + "' has missing cells");
    auto values = d.column(col);
    for (std::size_t i = 0; i < values.size(); ++i)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i];
  }
  return x;
}

ParameterDraw draw_parameters(const LinearFit& fit, Rng& rng) {
  if (fit.dof_resid < 1) throw FitError("linear draw: residual degrees of freedom must be positive");
  ParameterDraw draw;
  draw.model_kind = ModelKind::Linear;
  std::chi_squared_distribution<double> chi2(static_cast<double>(fit.dof_resid));
  draw.dispersion = fit.sigma2_hat * fit.dof_resid / chi2(rng);
  Eigen::VectorXd z = standard_normal(fit.coef.size(), rng);
  draw.coef = fit.coef;
  if (draw.dispersion > 0.0) draw.coef += std::sqrt(draw.dispersion) * (fit.r_inverse * z);
  return draw;
}

ParameterDraw draw_parameters(const GlmFit& fit, Rng& rng) {
  if (!fit.converged || fit.separation_detected)
    throw FitError("logistic draw: fit did not converge cleanly (separation or non-convergence)");
  ParameterDraw draw;
  draw.model_kind = ModelKind::Logistic;
  draw.coef = fit.coef + covariance_factor(fit.cov) * standard_normal(fit.coef.size(), rng);
  return draw;
}

ParameterDraw draw_parameters(const OrdinalFit& fit, Rng& rng) {
  if (!fit.converged || fit.separation_detected)
    throw FitError("ordinal draw: fit did not converge cleanly (separation or non-convergence)");
  const Eigen::Index kt = fit.thresholds.size();
  const Eigen::Index p = fit.coef.size();
  Eigen::VectorXd center(kt + p);
  center << fit.thresholds, fit.coef;
  Eigen::MatrixXd factor = covariance_factor(fit.cov);
  for (int attempt = 0; attempt < kMaxThresholdRedraws; ++attempt) {
    Eigen::VectorXd v = center + factor * standard_normal(kt + p, rng);
    Eigen::VectorXd theta = v.head(kt);
    if (!strictly_increasing(theta)) continue;
    ParameterDraw draw;
    draw.model_kind = ModelKind::Ordinal;
    draw.thresholds = theta;
    draw.coef = v.tail(p);
    draw.levels = fit.levels;
    return draw;
  }
  throw FitError("ordinal draw: thresholds not increasing after " + std::to_string(kMaxThresholdRedraws) +
                     " redraws",
                 "threshold_redraw_exhausted");
}

Eigen::VectorXd impute_draw(const ParameterDraw& params, const Eigen::MatrixXd& x, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd out(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (params.model_kind) {
    case ModelKind::Linear: {
      if (params.coef.size() != x.cols() + 1) throw ConfigError("impute_draw: coefficient/predictor mismatch");
      Eigen::VectorXd mean = with_intercept(x) * params.coef;
      std::normal_distribution<double> normal(0.0, 1.0);
      double sd = std::sqrt(std::max(params.dispersion, 0.0));
      for (Eigen::Index i = 0; i < n; ++i) out(i) = sd > 0.0 ? mean(i) + sd * normal(rng) : mean(i);
      return out;
    }
    case ModelKind::Logistic: {
      if (params.coef.size() != x.cols() + 1) throw ConfigError("impute_draw: coefficient/predictor mismatch");
      Eigen::VectorXd eta = with_intercept(x) * params.coef;
      for (Eigen::Index i = 0; i < n; ++i) out(i) = unif(rng) < inv_logit(eta(i)) ? 1.0 : 0.0;
      return out;
    }
    case ModelKind::Ordinal: {
      if (params.coef.size() != x.cols()) throw ConfigError("impute_draw: coefficient/predictor mismatch");
      Eigen::VectorXd eta = x.cols() ? Eigen::VectorXd(x * params.coef) : Eigen::VectorXd::Zero(n);
      const Eigen::Index kt = params.thresholds.size();
      for (Eigen::Index i = 0; i < n; ++i) {
        double u = unif(rng);
        Eigen::Index rank = kt;
        for (Eigen::Index j = 0; j < kt; ++j) {
          if (u < inv_logit(params.thresholds(j) - eta(i))) {
            rank = j;
            break;
          }
        }
        out(i) = params.levels.at(static_cast<std::size_t>(rank));
      }
      return out;
    }
  }
  return out;
}

double mcfadden_pseudo_r2(const GlmFit& fit) {
  if (!fit.converged) throw FitError("pseudo-R2: fit did not converge");
  if (fit.loglik_null == 0.0) throw FitError("pseudo-R2: null log-likelihood is 0 (constant response)");
  return 1.0 - fit.loglik / fit.loglik_null;
}

double mcfadden_pseudo_r2(const OrdinalFit& fit) {
  if (!fit.converged) throw FitError("pseudo-R2: fit did not converge");
  if (fit.loglik_null == 0.0) throw FitError("pseudo-R2: null log-likelihood is 0 (constant response)");
  return 1.0 - fit.loglik / fit.loglik_null;
}

}  // namespace auxmi
