#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/regressors.hpp"
#include "auxmi/rng.hpp"

namespace auxmi {

struct AuxTier {
  std::string name;
  double target_r2 = 0.0;

  friend bool operator==(const AuxTier&, const AuxTier&) = default;
};

/// Synthetic stand-in for the survey extract: a logistic model of Y on seven
/// covariates, X1 incomplete, plus one auxiliary column per tier.
struct PopulationConfig {
  std::size_t n = 2000;
  /// Intercept followed by the X1..X7 slopes.
  std::vector<double> true_beta{0.2, 0.25, 0.30, 0.05, 0.15, -0.20, -0.10, 0.25};
  double base_r2 = 0.14;
  std::vector<AuxTier> aux_tiers{{"moderate", 0.45}, {"strong", 0.62}};
  std::uint64_t seed = 1;

  void validate() const;
};

struct PopulationTruth {
  std::vector<std::string> terms;  // "(Intercept)", "X1", ...
  std::vector<double> true_beta;
  double base_r2 = 0.0;
  std::vector<AuxTier> aux_tiers;
  std::vector<double> loadings;  // per tier, regression loading on Z
};

struct Population {
  Dataset data;
  PopulationTruth truth;
};

/// Estimand anchor from one very large draw of the same design.
struct PilotEstimand {
  std::string term;
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

constexpr std::size_t kCovariateCount = 7;
constexpr std::size_t kDefaultPilotRows = 1'000'000;

/// Names X1..X7.
std::vector<std::string> covariate_names();

/// Column name of a tier's auxiliary variable, e.g. "Z_strong".
std::string aux_column(const std::string& tier);

/// The logistic model Y ~ X1 + ... + X7.
ModelFormula default_analysis_formula();

/// sqrt(target_r2 - base_r2).
double calibrate_aux_strength(double base_r2, double target_r2);

/// Columns X1..X7, Y, then one Z_<tier> per tier, all fully observed.
///
/// X2, X4 and X6 are N(0,1); X3 and X7 are Bernoulli(.5); X5 is
/// Bernoulli(.25). X1 = s + u where s is an equal-weight sum of the
/// standardized X2..X7 with variance base_r2 and u ~ N(0, 1 - base_r2).
/// Each Z_t is a standardized noisy copy of u chosen so the population R^2
/// of X1 on (X2..X7, Z_t) is exactly the tier target.
Population generate_population(const PopulationConfig& cfg, Rng& rng);

/// Same, drawing from substream (cfg.seed).
Population generate_population(const PopulationConfig& cfg);

/// Fits the analysis model on a fresh population of `rows` rows drawn from
/// substream (seed, "pilot") and returns the coefficient of `term`.
PilotEstimand pilot_estimand(const PopulationConfig& cfg, const ModelFormula& analysis, ModelKind kind,
                             const std::string& term, std::uint64_t seed, std::size_t rows = kDefaultPilotRows);

}  // namespace auxmi
