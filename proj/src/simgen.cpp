#include "auxmi/simgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "auxmi/error.hpp"
#include "auxmi/pooling.hpp"

namespace auxmi {

namespace {

struct CovariateSpec {
  bool binary;
  double p;  // success probability for binary covariates
};

// X2..X7: income, sex, age, race, children, married.
constexpr CovariateSpec kOtherCovariates[] = {{false, 0.0}, {true, 0.5}, {false, 0.0},
                                              {true, 0.25}, {false, 0.0}, {true, 0.5}};

bool valid_tier_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace

void PopulationConfig::validate() const {
  if (n < 100) throw ConfigError("population: n must be at least 100");
  if (true_beta.size() != kCovariateCount + 1)
    throw ConfigError("population: true_beta needs " + std::to_string(kCovariateCount + 1) +
                      " entries (intercept then X1..X7)");
  for (double b : true_beta)
    if (!std::isfinite(b)) throw ConfigError("population: true_beta has a non-finite entry");
  if (!(base_r2 > 0.0 && base_r2 < 1.0)) throw ConfigError("population: base_r2 must lie in (0, 1)");
  for (std::size_t i = 0; i < aux_tiers.size(); ++i) {
    const auto& tier = aux_tiers[i];
    if (!valid_tier_name(tier.name)) throw ConfigError("population: bad tier name '" + tier.name + "'");
    if (tier.name == "none") throw ConfigError("population: tier name 'none' is reserved");
    if (!(tier.target_r2 > base_r2 && tier.target_r2 < 1.0))
      throw ConfigError("population: tier '" + tier.name + "' needs base_r2 < target_r2 < 1");
    for (std::size_t j = 0; j < i; ++j)
      if (aux_tiers[j].name == tier.name) throw ConfigError("population: duplicate tier '" + tier.name + "'");
  }
}

std::vector<std::string> covariate_names() {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= kCovariateCount; ++j) names.push_back("X" + std::to_string(j));
  return names;
}

std::string aux_column(const std::string& tier) { return "Z_" + tier; }

ModelFormula default_analysis_formula() { return ModelFormula{"Y", covariate_names()}; }

double calibrate_aux_strength(double base_r2, double target_r2) {
  if (!(base_r2 > 0.0 && base_r2 < 1.0 && target_r2 < 1.0))
    throw ConfigError("calibrate_aux_strength: R^2 values must lie in (0, 1)");
  if (target_r2 < base_r2)
    throw ConfigError("calibrate_aux_strength: target R^2 " + format_double(target_r2) + " is below base R^2 " +
                      format_double(base_r2));
  return std::sqrt(target_r2 - base_r2);
}

Population generate_population(const PopulationConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n = cfg.n;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<double>> x(kCovariateCount, std::vector<double>(n));
  std::vector<double> signal(n, 0.0);
  const double weight = std::sqrt(cfg.base_r2 / static_cast<double>(kCovariateCount - 1));
  for (std::size_t j = 0; j < kCovariateCount - 1; ++j) {
    const auto& spec = kOtherCovariates[j];
    auto& col = x[j + 1];
    const double sd = std::sqrt(spec.p * (1.0 - spec.p));
    for (std::size_t r = 0; r < n; ++r) {
      if (spec.binary) {
        col[r] = unif(rng) < spec.p ? 1.0 : 0.0;
        signal[r] += weight * (col[r] - spec.p) / sd;
      } else {
        col[r] = normal(rng);
        signal[r] += weight * col[r];
      }
    }
  }

  const double unique_var = 1.0 - cfg.base_r2;
  std::vector<double> u(n);
  for (std::size_t r = 0; r < n; ++r) {
    u[r] = std::sqrt(unique_var) * normal(rng);
    x[0][r] = signal[r] + u[r];
  }

  PopulationTruth truth;
  truth.terms.push_back("(Intercept)");
  for (const auto& name : covariate_names()) truth.terms.push_back(name);
  truth.true_beta = cfg.true_beta;
  truth.base_r2 = cfg.base_r2;
  truth.aux_tiers = cfg.aux_tiers;

  std::vector<std::vector<double>> aux;
  for (const auto& tier : cfg.aux_tiers) {
    const double lambda = calibrate_aux_strength(cfg.base_r2, tier.target_r2);
    truth.loadings.push_back(lambda);
    // corr(Z, u)^2 = lambda^2 / (1 - base_r2)
    const double a = lambda / unique_var;
    const double noise = std::sqrt(std::max(0.0, 1.0 - lambda * lambda / unique_var));
    std::vector<double> z(n);
    for (std::size_t r = 0; r < n; ++r) z[r] = a * u[r] + noise * normal(rng);
    aux.push_back(std::move(z));
  }

  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double eta = cfg.true_beta[0];
    for (std::size_t j = 0; j < kCovariateCount; ++j) eta += cfg.true_beta[j + 1] * x[j][r];
    y[r] = unif(rng) < inv_logit(eta) ? 1.0 : 0.0;
  }

  std::vector<Variable> vars;
  std::vector<std::vector<double>> values;
  for (std::size_t j = 0; j < kCovariateCount; ++j) {
    bool binary = j > 0 && kOtherCovariates[j - 1].binary;
    vars.push_back({"X" + std::to_string(j + 1), binary ? VariableKind::binary() : VariableKind::continuous()});
    values.push_back(std::move(x[j]));
  }
  vars.push_back({"Y", VariableKind::binary()});
  values.push_back(std::move(y));
  for (std::size_t t = 0; t < cfg.aux_tiers.size(); ++t) {
    vars.push_back({aux_column(cfg.aux_tiers[t].name), VariableKind::continuous()});
    values.push_back(std::move(aux[t]));
  }
  return Population{Dataset(std::move(vars), std::move(values)), std::move(truth)};
}

Population generate_population(const PopulationConfig& cfg) {
  Rng rng = make_substream(cfg.seed, {});
  return generate_population(cfg, rng);
}

PilotEstimand pilot_estimand(const PopulationConfig& cfg, const ModelFormula& analysis, ModelKind kind,
                             const std::string& term, std::uint64_t seed, std::size_t rows) {
  PopulationConfig big = cfg;
  big.n = rows;
  Rng rng = make_substream(seed, {hash_label("pilot")});
  Population pop = generate_population(big, rng);
  Estimate est = fit_analysis(pop.data, analysis, kind);
  const auto& t = est.term(term);
  return PilotEstimand{term, t.point, std::sqrt(t.variance), rows};
}

}  // namespace auxmi
