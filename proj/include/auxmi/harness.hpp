#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "auxmi/dataset.hpp"
#include "auxmi/mice.hpp"
#include "auxmi/missingness.hpp"
#include "auxmi/regressors.hpp"
#include "auxmi/simgen.hpp"

namespace auxmi {

constexpr int kSchemaVersion = 1;

enum class Regime { Fixed, Resampled };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& s);

enum class EstimatorKind { ListwiseDeletion, MultipleImputation, Complete };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::ListwiseDeletion;
  std::string tier;  // MI only; "none" means no auxiliary variables

  /// "LD", "MI:<tier>" or "complete".
  std::string label() const;
  static EstimatorSpec parse(const std::string& label);

  friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

struct ImputationTier {
  std::string name;
  std::vector<std::string> auxiliaries;
};

struct HarnessConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 2012;
  PopulationConfig population;
  std::size_t pilot_rows = kDefaultPilotRows;
  Regime regime = Regime::Fixed;

  ModelFormula analysis = default_analysis_formula();
  ModelKind analysis_kind = ModelKind::Logistic;
  std::string focal = "X1";

  std::vector<MissingnessSpec> missingness;
  std::vector<EstimatorSpec> estimators;
  int replications = 100;

  int m = 20;
  int iterations = 10;
  PerfectPredictionPolicy policy = PerfectPredictionPolicy::Error;
  std::vector<ImputationTier> tiers;

  std::string reference = "LD";  // efficiency reference column: "LD" or "complete"
  std::vector<std::string> formats{"csv", "markdown", "json"};
  std::string basename = "report";

  void validate() const;
  const ImputationTier& tier(const std::string& name) const;
};

/// Desk-scale configuration: n = 2000, R = 100, M = 20, MCAR 30/20/10% on X1,
/// estimators LD, MI with no/moderate/strong auxiliaries, complete data.
HarnessConfig default_config();

HarnessConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const HarnessConfig& cfg);
HarnessConfig load_config(const std::filesystem::path& path);

/// Aggregated replications of one (missingness block, estimator) pair.
struct CellResult {
  std::string block;  // missingness label, e.g. "MCAR 30%"
  std::string mechanism;
  double rate = 0.0;
  std::string estimator;  // "LD", "MI:strong", "complete"
  std::string tier;       // empty unless MI
  std::string regime;
  std::string term;
  int replications = 0;
  double estimand = 0.0;     // large-n pilot coefficient
  double estimand_se = 0.0;
  double est_mean = 0.0;
  double est_sd = 0.0;       // empirical SD across replications
  double mean_model_se = 0.0;
  /// sqrt(est_sd^2 + complete-data model variance) under the fixed regime,
  /// est_sd when populations are resampled.
  double total_se = 0.0;
  double bias = 0.0;
  double bias_mcse = 0.0;
  double mean_r2 = std::numeric_limits<double>::quiet_NaN();  // MI only
  double mean_n_used = 0.0;

  friend bool operator==(const CellResult&, const CellResult&);
};

struct EfficiencyRow {
  double se_diff = 0.0;       // SE / SE_ref - 1
  double equiv_n_change = 0.0;  // (SE_ref / SE)^2 - 1
};

EfficiencyRow efficiency_metrics(double se_method, double se_ref);

/// Complete data versus listwise deletion under MCAR at `rate`:
/// first = SE reduction 1 - sqrt(1 - rate), second = 1 / (1 - rate) - 1.
std::pair<double, double> analytic_mcar_bounds(double rate);

/// Nearest whole percent, halves away from zero.
long percent(double fraction);
/// "-13%", "+1%", "0%".
std::string format_percent(double fraction, bool signed_positive = true);

/// "", "†", "*", "**" or "***" from a two-sided t test (normal when df is infinite).
std::string significance_stars(double point, double se, double df = std::numeric_limits<double>::infinity());
double two_sided_p(double t_ratio, double df);

/// One replication's outcome.
struct Replicate {
  double estimate = 0.0;
  double model_se = 0.0;
  double fit_statistic = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_used = 0;
};

/// Quantities shared by every cell of a run.
struct RunContext {
  PilotEstimand pilot;
  std::optional<Dataset> fixed_population;  // set under the fixed regime
  double fixed_complete_variance = 0.0;     // focal variance from the fixed population's complete-data fit
};

RunContext prepare_context(const HarnessConfig& cfg);

/// Replication r of one cell. Population and amputation draw from substream
/// (seed, "ampute", block, r); imputation from (seed, "impute", cell id, r).
Replicate run_replicate(const HarnessConfig& cfg, const RunContext& ctx, std::size_t block,
                        const EstimatorSpec& estimator, int r);

CellResult aggregate_cell(const HarnessConfig& cfg, const RunContext& ctx, std::size_t block,
                          const EstimatorSpec& estimator, const std::vector<Replicate>& reps);

CellResult run_cell(const HarnessConfig& cfg, const RunContext& ctx, std::size_t block, const EstimatorSpec& estimator,
                    int threads = 1);

struct GridResult {
  std::vector<CellResult> cells;  // block-major, estimators in config order
  std::string reference;
};

/// Every (block, estimator, replication) task; result is independent of `threads`.
GridResult run_grid(const HarnessConfig& cfg, int threads = 1);
GridResult run_grid(const HarnessConfig& cfg, const RunContext& ctx, int threads = 1);

}  // namespace auxmi
