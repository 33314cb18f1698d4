#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "auxmi/error.hpp"
#include "auxmi/regressors.hpp"
#include "auxmi/simgen.hpp"
#include "support.hpp"

using namespace auxmi;
using testing::names;

namespace {

double logistic_cdf(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Eigen::VectorXd bernoulli_response(Rng& rng, const Eigen::MatrixXd& x, const Eigen::VectorXd& coef) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double eta = coef(0) + x.row(i).dot(coef.tail(x.cols()));
    y(i) = unif(rng) < logistic_cdf(eta) ? 1.0 : 0.0;
  }
  return y;
}

// Cumulative-logit response with K levels coded 0..K-1.
Eigen::VectorXi ordinal_response(Rng& rng, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                 const std::vector<double>& cuts) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXi y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double eta = x.row(i).dot(beta);
    double u = unif(rng);
    int k = 0;
    while (k < static_cast<int>(cuts.size()) && u > logistic_cdf(cuts[k] - eta)) ++k;
    y(i) = k;
  }
  return y;
}

}  // namespace

TEST_SUITE("linear") {
  TEST_CASE("noiseless y = 2x") {
    Eigen::MatrixXd x(10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) x(i, 0) = i + 1, y(i) = 2.0 * (i + 1);
    LinearFit fit = fit_linear(x, y, {"x"});
    CHECK(fit.coef(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(fit.coef(0)) < 1e-10);
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK(fit.sigma2_hat == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(fit.dof_resid == 8);
  }

  TEST_CASE("matches the normal-equations solution on 100 random designs") {
    Rng rng = make_substream(11, {});
    std::uniform_int_distribution<int> pick_p(1, 6);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      int p = pick_p(rng);
      int n = 40 + 3 * trial % 60;
      Eigen::MatrixXd x = testing::random_matrix(rng, n, p);
      Eigen::VectorXd y = testing::random_matrix(rng, n, 1).col(0) + x * Eigen::VectorXd::LinSpaced(p, -1.0, 1.0);
      LinearFit fit = fit_linear(x, y, names(p));
      Eigen::VectorXd oracle = testing::normal_equations(x, y);
      worst = std::max(worst, (fit.coef - oracle).cwiseAbs().maxCoeff());
      CHECK(fit.r2 >= 0.0);
      CHECK(fit.r2 <= 1.0);
      CHECK(fit.dof_resid == n - p - 1);
      Eigen::MatrixXd a = testing::with_intercept(x);
      Eigen::MatrixXd xtx_inv = (a.transpose() * a).inverse();
      CHECK((fit.xtx_inverse - xtx_inv).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((fit.xtx_inverse - fit.xtx_inverse.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      double sse = (y - a * oracle).squaredNorm();
      CHECK(fit.sigma2_hat == doctest::Approx(sse / (n - p - 1)).epsilon(1e-9));
    }
    CHECK(worst < 1e-8);
  }

  TEST_CASE("rank deficiency names the dependent column") {
    Rng rng = make_substream(3, {});
    Eigen::MatrixXd x = testing::random_matrix(rng, 20, 3);
    x.col(2) = 2.0 * x.col(0) - x.col(1);
    Eigen::VectorXd y = x.col(0);
    try {
      fit_linear(x, y, {"a", "b", "c"});
      FAIL("expected rank_deficient");
    } catch (const FitError& e) {
      CHECK(e.kind() == "rank_deficient");
      CHECK(std::string(e.what()).find("'c'") != std::string::npos);
    }
  }

  TEST_CASE("too few rows") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    Eigen::VectorXd y(2);
    y << 1, 2;
    try {
      fit_linear(x, y, {"x"});
      FAIL("expected too_few_rows");
    } catch (const FitError& e) {
      CHECK(e.kind() == "too_few_rows");
    }
  }

  TEST_CASE("imputation model for X1 with strong auxiliaries has R^2 near .62 at n = 100,000") {
    PopulationConfig cfg;
    cfg.n = 100000;
    Rng rng = make_substream(21, {});
    Population pop = generate_population(cfg, rng);
    LinearFit fit = fit_linear(pop.data, ModelFormula{"X1", {"X2", "X3", "X4", "X5", "X6", "X7", "Y", "Z_strong"}});
    CHECK(std::abs(fit.r2 - 0.62) <= 0.02);
  }
}

TEST_SUITE("logistic") {
  TEST_CASE("balanced symmetric data gives zero coefficients") {
    Eigen::MatrixXd x(4, 1);
    x << -1, -1, 1, 1;
    Eigen::VectorXd y(4);
    y << 0, 1, 0, 1;
    GlmFit fit = fit_logistic(x, y, {"x"});
    CHECK(fit.converged);
    CHECK(std::abs(fit.coef(0)) < 1e-12);
    CHECK(std::abs(fit.coef(1)) < 1e-12);
  }

  TEST_CASE("six points match a derivative-free grid-refinement MLE") {
    Eigen::MatrixXd x(6, 1);
    x << -2.0, -1.0, -0.5, 0.3, 1.2, 2.5;
    Eigen::VectorXd y(6);
    y << 0, 1, 0, 1, 0, 1;
    GlmFit fit = fit_logistic(x, y, {"x"});
    Eigen::Vector2d oracle = testing::grid_logistic_mle(x.col(0), y);
    CHECK(std::abs(fit.coef(0) - oracle(0)) < 1e-4);
    CHECK(std::abs(fit.coef(1) - oracle(1)) < 1e-4);
    CHECK(logistic_score(x, y, fit.coef).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("score vanishes and the likelihood never decreases along the iterations") {
    Rng rng = make_substream(12, {});
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::MatrixXd x = testing::random_matrix(rng, 300, 4);
      Eigen::VectorXd truth(5);
      truth << 0.3, 1.0, -0.5, 0.25, 0.0;
      Eigen::VectorXd y = bernoulli_response(rng, x, truth);
      GlmFit fit = fit_logistic(x, y, names(4));
      REQUIRE(fit.converged);
      CHECK_FALSE(fit.separation_detected);
      CHECK(logistic_score(x, y, fit.coef).cwiseAbs().maxCoeff() < 1e-6);
      for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
        CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-12);
      CHECK(fit.loglik >= fit.loglik_null);
      CHECK(fit.pseudo_r2 >= 0.0);
      CHECK(fit.pseudo_r2 < 1.0);
      CHECK((fit.cov - fit.cov.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(fit.cov.ldlt().isPositive());
    }
  }

  TEST_CASE("complete separation is flagged") {
    Eigen::MatrixXd x(8, 1);
    x << -4, -3, -2, -1, 1, 2, 3, 4;
    Eigen::VectorXd y(8);
    y << 0, 0, 0, 0, 1, 1, 1, 1;
    GlmFit fit = fit_logistic(x, y, {"x"});
    CHECK(fit.separation_detected);
  }

  TEST_CASE("non-binary response is rejected by the dataset wrapper") {
    Dataset d = testing::continuous_dataset({"y", "x"}, {{0, 1, 2, 1}, {1, 2, 3, 4}});
    CHECK_THROWS_AS(fit_logistic(d, ModelFormula{"y", {"x"}}), Error);
  }

  TEST_CASE("McFadden pseudo-R^2 by hand on eight observations") {
    Eigen::MatrixXd x(8, 1);
    x << 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0;
    Eigen::VectorXd y(8);
    y << 0, 0, 1, 0, 1, 0, 1, 1;
    GlmFit fit = fit_logistic(x, y, {"x"});
    double ll = 0.0;
    for (int i = 0; i < 8; ++i) {
      double p = logistic_cdf(fit.coef(0) + fit.coef(1) * x(i, 0));
      ll += y(i) * std::log(p) + (1 - y(i)) * std::log(1 - p);
    }
    const double ll_null = 8 * std::log(0.5);
    CHECK(fit.loglik == doctest::Approx(ll).epsilon(1e-12));
    CHECK(fit.loglik_null == doctest::Approx(ll_null).epsilon(1e-12));
    CHECK(mcfadden_pseudo_r2(fit) == doctest::Approx(1.0 - ll / ll_null).epsilon(1e-12));
  }

  TEST_CASE("intercept-only refit has pseudo-R^2 zero") {
    Eigen::MatrixXd none(6, 0);
    Eigen::VectorXd y(6);
    y << 0, 1, 1, 0, 1, 1;
    GlmFit fit = fit_logistic(none, y, {});
    CHECK(fit.coef(0) == doctest::Approx(std::log(2.0)));
    CHECK(std::abs(mcfadden_pseudo_r2(fit)) < 1e-12);
  }

  TEST_CASE("a near-perfect predictor pushes pseudo-R^2 above .9") {
    Eigen::MatrixXd x(42, 1);
    Eigen::VectorXd y(42);
    for (int i = 0; i < 20; ++i) {
      x(i, 0) = -0.5 - 0.025 * i;
      y(i) = 0;
      x(20 + i, 0) = 0.5 + 0.025 * i;
      y(20 + i) = 1;
    }
    x(40, 0) = -0.05, y(40) = 1;
    x(41, 0) = 0.05, y(41) = 0;
    GlmFit fit = fit_logistic(x, y, {"x"});
    REQUIRE(fit.converged);
    REQUIRE_FALSE(fit.separation_detected);
    CHECK(mcfadden_pseudo_r2(fit) > 0.9);
  }

  TEST_CASE("pseudo-R^2 refuses a degenerate null likelihood") {
    GlmFit fit;
    fit.converged = true;
    fit.loglik = 0.0;
    fit.loglik_null = 0.0;
    CHECK_THROWS_AS(mcfadden_pseudo_r2(fit), FitError);
  }
}

TEST_SUITE("ordinal") {
  TEST_CASE("three equal levels and a null predictor give empirical cumulative logits") {
    Eigen::MatrixXd x(12, 1);
    Eigen::VectorXi r(12);
    for (int i = 0; i < 12; ++i) {
      r(i) = i % 3;
      x(i, 0) = (i / 3) % 2 == 0 ? -1.0 : 1.0;
    }
    OrdinalFit fit = fit_ordinal(x, r, {1, 2, 3}, {"x"});
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.coef(0)) < 1e-9);
    CHECK(fit.thresholds(0) == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK(fit.thresholds(1) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  TEST_CASE("two levels reduce to logistic regression") {
    Rng rng = make_substream(13, {});
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd x = testing::random_matrix(rng, 250, 3);
      Eigen::VectorXd truth(4);
      truth << -0.2, 0.8, -0.6, 0.1;
      Eigen::VectorXd y = bernoulli_response(rng, x, truth);
      GlmFit lg = fit_logistic(x, y, names(3));
      Eigen::VectorXi r = y.cast<int>();
      OrdinalFit od = fit_ordinal(x, r, {0, 1}, names(3));
      REQUIRE(od.converged);
      // P(Y = 1) = F(x'b - theta_1): slopes agree and the intercept is -theta_1.
      CHECK(std::abs(lg.coef(0) + od.thresholds(0)) < 1e-6);
      for (int j = 0; j < 3; ++j) CHECK(std::abs(lg.coef(j + 1) - od.coef(j)) < 1e-6);
      CHECK(od.loglik == doctest::Approx(lg.loglik).epsilon(1e-9));
    }
  }

  TEST_CASE("score vanishes at the MLE with four levels and arbitrary codes") {
    Rng rng = make_substream(14, {});
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd x = testing::random_matrix(rng, 400, 2);
      Eigen::VectorXd beta(2);
      beta << 0.7, -0.4;
      Eigen::VectorXi r = ordinal_response(rng, x, beta, {-1.0, 0.2, 1.5});
      OrdinalFit fit = fit_ordinal(x, r, {-3, 0, 2.5, 10}, {"a", "b"});
      REQUIRE(fit.converged);
      CHECK(ordinal_score(x, r, fit.thresholds, fit.coef).cwiseAbs().maxCoeff() < 1e-6);
      for (Eigen::Index k = 1; k < fit.thresholds.size(); ++k) CHECK(fit.thresholds(k) > fit.thresholds(k - 1));
      for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
        CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-12);
      CHECK(fit.loglik >= fit.loglik_null);
      CHECK(mcfadden_pseudo_r2(fit) == doctest::Approx(fit.pseudo_r2));
    }
  }

  TEST_CASE("a predictor that orders the response perfectly is flagged") {
    Eigen::MatrixXd x(9, 1);
    Eigen::VectorXi r(9);
    for (int i = 0; i < 9; ++i) x(i, 0) = i, r(i) = i / 3;
    OrdinalFit fit = fit_ordinal(x, r, {1, 2, 3}, {"x"});
    CHECK(fit.separation_detected);
  }

  TEST_CASE("an unobserved declared level is reported") {
    Eigen::MatrixXd x(6, 1);
    x << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXi r(6);
    r << 0, 0, 1, 0, 1, 1;
    try {
      fit_ordinal(x, r, {1, 2, 3}, {"x"});
      FAIL("expected the unobserved level to be reported");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("level 3") != std::string::npos);
    }
  }
}

TEST_SUITE("posterior draws") {
  TEST_CASE("perfect linear fit draws the coefficients exactly") {
    Eigen::MatrixXd x(10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) x(i, 0) = i, y(i) = 1.0 + 3.0 * i;
    LinearFit fit = fit_linear(x, y, {"x"});
    fit.sigma2_hat = 0.0;
    Rng rng = make_substream(1, {});
    ParameterDraw d = draw_parameters(fit, rng);
    CHECK(d.coef == fit.coef);
    CHECK(d.dispersion == 0.0);
    Eigen::VectorXd imputed = impute_draw(d, x, rng);
    for (int i = 0; i < 10; ++i) CHECK(imputed(i) == doctest::Approx(1.0 + 3.0 * i));
  }

  TEST_CASE("linear draws: mean within 4 Monte Carlo SEs, covariance within 10%") {
    Rng rng = make_substream(15, {});
    Eigen::MatrixXd z = testing::random_matrix(rng, 30, 2);
    Eigen::MatrixXd x(30, 2);
    x.col(0) = z.col(0);
    x.col(1) = 0.7 * z.col(0) + 0.7 * z.col(1);
    Eigen::VectorXd y = 1.0 + x.col(0).array() - 0.5 * x.col(1).array() + testing::random_matrix(rng, 30, 1).col(0).array();
    LinearFit fit = fit_linear(x, y, {"a", "b"});
    const int draws = 10000;
    Eigen::MatrixXd sample(draws, 3);
    double disp_sum = 0.0;
    for (int i = 0; i < draws; ++i) {
      ParameterDraw d = draw_parameters(fit, rng);
      CHECK(d.dispersion > 0.0);
      disp_sum += d.dispersion;
      sample.row(i) = d.coef.transpose();
    }
    Eigen::RowVectorXd mean = sample.colwise().mean();
    Eigen::MatrixXd centered = sample.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / (draws - 1);
    const double nu = fit.dof_resid;
    Eigen::MatrixXd expected = fit.sigma2_hat * nu / (nu - 2.0) * fit.xtx_inverse;
    for (int j = 0; j < 3; ++j) {
      double mc_se = std::sqrt(cov(j, j) / draws);
      CHECK(std::abs(mean(j) - fit.coef(j)) < 4.0 * mc_se);
      // Entries are compared on the scale of their diagonal, so near-zero covariances are not held to a
      // relative tolerance they cannot meet.
      for (int k = 0; k < 3; ++k)
        CHECK(std::abs(cov(j, k) - expected(j, k)) <= 0.10 * std::sqrt(expected(j, j) * expected(k, k)));
      CHECK(cov(j, j) == doctest::Approx(expected(j, j)).epsilon(0.10));
    }
    CHECK(disp_sum / draws == doctest::Approx(fit.sigma2_hat * nu / (nu - 2.0)).epsilon(0.03));
  }

  TEST_CASE("logistic draws centre on the MLE") {
    Rng rng = make_substream(16, {});
    Eigen::MatrixXd x = testing::random_matrix(rng, 200, 2);
    Eigen::VectorXd truth(3);
    truth << 0.1, 0.9, -0.3;
    GlmFit fit = fit_logistic(x, bernoulli_response(rng, x, truth), {"a", "b"});
    const int draws = 10000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < draws; ++i) sum += draw_parameters(fit, rng).coef;
    Eigen::VectorXd mean = sum / draws;
    for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(j) - fit.coef(j)) < 4.0 * std::sqrt(fit.cov(j, j) / draws));
  }

  TEST_CASE("ordinal threshold draws are always increasing") {
    Rng rng = make_substream(17, {});
    Eigen::MatrixXd x = testing::random_matrix(rng, 60, 1);
    Eigen::VectorXd beta(1);
    beta << 0.5;
    Eigen::VectorXi r = ordinal_response(rng, x, beta, {-0.6, -0.4, 0.9});
    OrdinalFit fit = fit_ordinal(x, r, {1, 2, 3, 4}, {"x"});
    REQUIRE(fit.converged);
    for (int i = 0; i < 2000; ++i) {
      ParameterDraw d = draw_parameters(fit, rng);
      for (Eigen::Index k = 1; k < d.thresholds.size(); ++k) REQUIRE(d.thresholds(k) > d.thresholds(k - 1));
    }
  }

  TEST_CASE("threshold redraws give up after the attempt limit") {
    OrdinalFit fit;
    fit.converged = true;
    fit.levels = {1, 2, 3};
    fit.terms = {"x"};
    fit.coef = Eigen::VectorXd::Zero(1);
    fit.thresholds = Eigen::Vector2d(1.0, 0.0);
    fit.cov = 1e-8 * Eigen::MatrixXd::Identity(3, 3);
    Rng rng = make_substream(18, {});
    try {
      draw_parameters(fit, rng);
      FAIL("expected threshold_redraw_exhausted");
    } catch (const FitError& e) {
      CHECK(e.kind() == "threshold_redraw_exhausted");
    }
  }

  TEST_CASE("null logistic model imputes Bernoulli(.5)") {
    ParameterDraw d;
    d.model_kind = ModelKind::Logistic;
    d.coef = Eigen::VectorXd::Zero(2);
    Rng rng = make_substream(19, {});
    Eigen::MatrixXd x = testing::random_matrix(rng, 10000, 1);
    Eigen::VectorXd v = impute_draw(d, x, rng);
    for (Eigen::Index i = 0; i < v.size(); ++i) REQUIRE((v(i) == 0.0 || v(i) == 1.0));
    CHECK(std::abs(v.mean() - 0.5) <= 0.02);
  }

  TEST_CASE("ordinal imputation recovers the cumulative-logit cell probabilities") {
    ParameterDraw d;
    d.model_kind = ModelKind::Ordinal;
    d.coef = Eigen::VectorXd::Constant(1, 0.8);
    d.thresholds = Eigen::Vector3d(-1.0, 0.3, 1.1);
    d.levels = {-1, 0.5, 7, 9};
    const double xval = 0.4, eta = 0.8 * xval;
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(100000, 1, xval);
    Rng rng = make_substream(20, {});
    Eigen::VectorXd v = impute_draw(d, x, rng);
    std::vector<double> cum{0.0};
    for (int k = 0; k < 3; ++k) cum.push_back(logistic_cdf(d.thresholds(k) - eta));
    cum.push_back(1.0);
    Eigen::VectorXd closed = ordinal_cell_probabilities(d.thresholds, eta);
    for (int k = 0; k < 4; ++k) {
      double expected = cum[k + 1] - cum[k];
      CHECK(closed(k) == doctest::Approx(expected).epsilon(1e-12));
      double freq = static_cast<double>(std::count(v.data(), v.data() + v.size(), d.levels[k])) / v.size();
      CHECK(std::abs(freq - expected) < 0.01);
    }
  }
}
