#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "auxmi/error.hpp"
#include "auxmi/missingness.hpp"
#include "auxmi/pooling.hpp"
#include "auxmi/simgen.hpp"
#include "support.hpp"

using namespace auxmi;

namespace {

std::vector<Estimate> single_term(const std::vector<double>& points, const std::vector<double>& variances) {
  std::vector<Estimate> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Estimate e;
    e.terms = {{"x", points[i], variances[i]}};
    e.n_used = 100;
    out.push_back(e);
  }
  return out;
}

// Hand-rolled Rubin combination used as the oracle.
struct Rubin {
  double q, u, b, t, df;
};

Rubin rubin_oracle(const std::vector<double>& q, const std::vector<double>& u) {
  const double m = static_cast<double>(q.size());
  Rubin r{};
  for (double v : q) r.q += v / m;
  for (double v : u) r.u += v / m;
  for (double v : q) r.b += (v - r.q) * (v - r.q) / (m - 1);
  r.t = r.u + (1 + 1 / m) * r.b;
  r.df = r.b == 0 ? INFINITY : (m - 1) * std::pow(1 + r.u / ((1 + 1 / m) * r.b), 2);
  return r;
}

}  // namespace

TEST_SUITE("rubin") {
  TEST_CASE("three imputations worked by hand") {
    auto est = single_term({0.10, 0.12, 0.14}, {0.0004, 0.0004, 0.0004});
    PooledTerm p = pool_rubin(est).term("x");
    CHECK(p.q_bar == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(p.u_bar == doctest::Approx(0.0004).epsilon(1e-12));
    CHECK(p.b == doctest::Approx(0.0004).epsilon(1e-9));
    CHECK(p.t == doctest::Approx(0.0004 + (4.0 / 3.0) * 0.0004).epsilon(1e-9));
    CHECK(p.df == doctest::Approx(6.125).epsilon(1e-9));
    CHECK(p.se() == doctest::Approx(std::sqrt(p.t)));
  }

  TEST_CASE("identical estimates have no between variance and infinite df") {
    auto est = single_term({0.3, 0.3, 0.3, 0.3}, {0.01, 0.01, 0.01, 0.01});
    PooledTerm p = pool_rubin(est).term("x");
    CHECK(p.q_bar == 0.3);
    CHECK(p.b == 0.0);
    CHECK(p.t == doctest::Approx(0.01));
    CHECK(std::isinf(p.df));
  }

  TEST_CASE("random inputs agree with the oracle and satisfy the invariants") {
    Rng rng = make_substream(31, {});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.001, 0.1);
    std::uniform_int_distribution<int> pick_m(2, 30);
    for (int trial = 0; trial < 200; ++trial) {
      int m = pick_m(rng);
      std::vector<double> q(m), u(m);
      for (int i = 0; i < m; ++i) q[i] = 0.5 + 0.1 * normal(rng), u[i] = unif(rng);
      auto est = single_term(q, u);
      PooledTerm p = pool_rubin(est).term("x");
      Rubin o = rubin_oracle(q, u);
      CHECK(p.q_bar == doctest::Approx(o.q).epsilon(1e-12));
      CHECK(p.u_bar == doctest::Approx(o.u).epsilon(1e-12));
      CHECK(p.b == doctest::Approx(o.b).epsilon(1e-10));
      CHECK(p.t == doctest::Approx(o.t).epsilon(1e-10));
      CHECK(p.df == doctest::Approx(o.df).epsilon(1e-9));
      CHECK(p.t > p.u_bar);

      // Ordering invariance.
      std::vector<Estimate> shuffled = est;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      PooledTerm s = pool_rubin(shuffled).term("x");
      CHECK(s.q_bar == doctest::Approx(p.q_bar).epsilon(1e-12));
      CHECK(s.t == doctest::Approx(p.t).epsilon(1e-12));

      // Affine equivariance: q -> a q + c, u -> a^2 u.
      const double a = -2.5, c = 0.7;
      std::vector<double> qa(m), ua(m);
      for (int i = 0; i < m; ++i) qa[i] = a * q[i] + c, ua[i] = a * a * u[i];
      PooledTerm f = pool_rubin(single_term(qa, ua)).term("x");
      CHECK(f.q_bar == doctest::Approx(a * p.q_bar + c).epsilon(1e-10));
      CHECK(f.t == doctest::Approx(a * a * p.t).epsilon(1e-10));
      CHECK(f.df == doctest::Approx(p.df).epsilon(1e-8));
    }
  }

  TEST_CASE("scaling points and standard errors by 10") {
    std::vector<double> q{0.10, 0.12, 0.14, 0.09}, u{0.0004, 0.0005, 0.0003, 0.0004};
    PooledTerm p = pool_rubin(single_term(q, u)).term("x");
    for (double& v : q) v *= 10;
    for (double& v : u) v *= 100;
    PooledTerm s = pool_rubin(single_term(q, u)).term("x");
    CHECK(s.q_bar == doctest::Approx(10 * p.q_bar));
    CHECK(s.t == doctest::Approx(100 * p.t));
  }

  TEST_CASE("df falls as between-imputation variance grows") {
    double last = INFINITY;
    for (double spread : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1}) {
      auto est = single_term({0.5 - spread, 0.5, 0.5 + spread}, {0.001, 0.001, 0.001});
      double df = pool_rubin(est).term("x").df;
      CHECK(df < last);
      last = df;
    }
    // With b dominating, df approaches M - 1.
    auto wide = single_term({-10.0, 0.5, 11.0}, {0.001, 0.001, 0.001});
    CHECK(pool_rubin(wide).term("x").df == doctest::Approx(2.0).epsilon(1e-4));
  }

  TEST_CASE("input errors") {
    auto one = single_term({0.1}, {0.01});
    CHECK_THROWS_AS(pool_rubin(one), ConfigError);
    auto two = single_term({0.1, 0.2}, {0.01, 0.01});
    two[1].terms[0].name = "z";
    CHECK_THROWS_AS(pool_rubin(two), ConfigError);
    two = single_term({0.1, 0.2}, {0.01, 0.01});
    two[1].terms.push_back({"w", 0.0, 1.0});
    CHECK_THROWS_AS(pool_rubin(two), ConfigError);
    CHECK_THROWS_AS(pool_rubin(single_term({0.1, 0.2}, {0.01, 0.01})).term("nope"), DataError);
  }
}

TEST_SUITE("analysis fits") {
  TEST_CASE("LD on a 30%-amputed MCAR table of 2000 rows uses 1400 rows") {
    Population pop = generate_population(PopulationConfig{});
    Rng rng = make_substream(32, {});
    Dataset d = ampute_mcar(pop.data, "X1", 0.3, rng);
    Estimate e = ld_estimate(d, default_analysis_formula(), ModelKind::Logistic);
    CHECK(e.n_used == 1400);
    CHECK(e.terms.size() == 8);
    CHECK(e.terms.front().name == "(Intercept)");

    // On the complete table LD is a direct fit.
    Estimate full = ld_estimate(pop.data, default_analysis_formula(), ModelKind::Logistic);
    GlmFit direct = fit_logistic(pop.data, default_analysis_formula());
    CHECK(full.n_used == 2000);
    for (Eigen::Index j = 0; j < direct.coef.size(); ++j) {
      CHECK(full.terms[j].point == doctest::Approx(direct.coef(j)).epsilon(1e-12));
      CHECK(full.terms[j].variance == doctest::Approx(direct.cov(j, j)).epsilon(1e-12));
    }
  }

  TEST_CASE("LD needs more complete rows than parameters") {
    Dataset d = testing::continuous_dataset({"y", "a", "b"}, {{1, 2, 3, 4}, {1, 0, 1, 2}, {3, 1, 2, 2}})
                    .with_column(0, {1, 2, 3, 4}, {1, 0, 1, 1});
    try {
      ld_estimate(d, ModelFormula{"y", {"a", "b"}}, ModelKind::Linear);
      FAIL("expected too_few_rows");
    } catch (const FitError& e) {
      CHECK(e.kind() == "too_few_rows");
    }
  }

  TEST_CASE("MI estimates are per-dataset refits and use every row") {
    Population pop = generate_population(PopulationConfig{});
    Rng rng = make_substream(33, {});
    Dataset d = ampute_mcar(pop.data, "X1", 0.3, rng);
    ImputationSpec spec;
    spec.models = {{"X1", ModelKind::Linear, {"X2", "X3", "X4", "X5", "X6", "X7", "Y", "Z_moderate"}}};
    spec.m = 4;
    spec.iterations = 1;
    auto completed = impute(d, spec, 34);
    auto est = mi_estimates(completed, default_analysis_formula(), ModelKind::Logistic, 2);
    REQUIRE(est.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(est[i].n_used == 2000);
      GlmFit direct = fit_logistic(completed[i].data, default_analysis_formula());
      for (Eigen::Index j = 0; j < direct.coef.size(); ++j)
        CHECK(est[i].terms[j].point == doctest::Approx(direct.coef(j)).epsilon(1e-12));
    }
    PooledTerm x1 = pool_rubin(est).term("X1");
    CHECK(x1.b > 0.0);
    CHECK(x1.t > x1.u_bar);
  }

  TEST_CASE("M copies of one dataset give M identical estimates") {
    Population pop = generate_population(PopulationConfig{});
    CompletedDataset c{pop.data, std::vector<Mask>(pop.data.n_vars(), Mask(pop.data.n_rows(), 0)), 0, {}};
    std::vector<CompletedDataset> copies(3, c);
    auto est = mi_estimates(copies, default_analysis_formula(), ModelKind::Logistic);
    for (const auto& e : est)
      for (std::size_t j = 0; j < e.terms.size(); ++j) CHECK(e.terms[j].point == est[0].terms[j].point);
    PooledTerm p = pool_rubin(est).term("X1");
    CHECK(p.b == 0.0);
    CHECK(std::isinf(p.df));
  }

  TEST_CASE("mi_estimates needs two datasets with one schema") {
    Population pop = generate_population(PopulationConfig{});
    CompletedDataset c{pop.data, {}, 0, {}};
    std::vector<CompletedDataset> one{c};
    CHECK_THROWS_AS(mi_estimates(one, default_analysis_formula(), ModelKind::Logistic), ConfigError);
  }

  TEST_CASE("ordinal analysis terms are cutpoints then slopes") {
    Rng rng = make_substream(35, {});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y(300), x(300);
    for (int i = 0; i < 300; ++i) {
      x[i] = normal(rng);
      double latent = x[i] + normal(rng);
      y[i] = latent < -0.5 ? 1 : latent < 0.5 ? 2 : 3;
    }
    Dataset d({{"y", VariableKind::ordinal({1, 2, 3})}, {"x", VariableKind::continuous()}}, {y, x});
    Estimate e = fit_analysis(d, ModelFormula{"y", {"x"}}, ModelKind::Ordinal);
    REQUIRE(e.terms.size() == 3);
    CHECK(e.terms[0].name == "cut1");
    CHECK(e.terms[1].name == "cut2");
    CHECK(e.terms[2].name == "x");
    CHECK(e.terms[2].point > 0.0);
  }
}
