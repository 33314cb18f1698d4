#include "auxmi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "auxmi/error.hpp"
#include "auxmi/parallel.hpp"
#include "auxmi/pooling.hpp"

namespace auxmi {

using nlohmann::json;

namespace {

ModelKind method_for(const Variable& var) {
  switch (var.kind.tag()) {
    case KindTag::Continuous:
      return ModelKind::Linear;
    case KindTag::Binary:
      return ModelKind::Logistic;
    case KindTag::Ordinal:
      return ModelKind::Ordinal;
  }
  return ModelKind::Linear;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Schema of the generated population; cheap to build and used for validation.
Dataset schema_sample(const PopulationConfig& pop) {
  PopulationConfig small = pop;
  small.n = 100;
  Rng rng(0);
  return generate_population(small, rng).data;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

std::uint64_t cell_id(std::size_t block, const EstimatorSpec& estimator) {
  return hash_label(std::to_string(block) + "|" + estimator.label());
}

}  // namespace

std::string to_string(Regime regime) { return regime == Regime::Fixed ? "fixed" : "resampled"; }

Regime regime_from_string(const std::string& s) {
  if (s == "fixed") return Regime::Fixed;
  if (s == "resampled") return Regime::Resampled;
  throw ConfigError("unknown regime '" + s + "' (expected fixed or resampled)");
}

std::string EstimatorSpec::label() const {
  switch (kind) {
    case EstimatorKind::ListwiseDeletion:
      return "LD";
    case EstimatorKind::MultipleImputation:
      return "MI:" + tier;
    case EstimatorKind::Complete:
      return "complete";
  }
  return "?";
}

EstimatorSpec EstimatorSpec::parse(const std::string& label) {
  if (label == "LD") return {EstimatorKind::ListwiseDeletion, ""};
  if (label == "complete") return {EstimatorKind::Complete, ""};
  if (label.rfind("MI:", 0) == 0 && label.size() > 3) return {EstimatorKind::MultipleImputation, label.substr(3)};
  throw ConfigError("unknown estimator '" + label + "' (expected LD, MI:<tier> or complete)");
}

const ImputationTier& HarnessConfig::tier(const std::string& name) const {
  for (const auto& t : tiers)
    if (t.name == name) return t;
  throw ConfigError("imputation tier '" + name + "' is not defined");
}

void HarnessConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("config: schema_version " + std::to_string(schema_version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  population.validate();
  if (pilot_rows < population.n) throw ConfigError("config: pilot_rows must be at least population n");
  Dataset sample = schema_sample(population);
  analysis.validate(sample);
  if (focal != "(Intercept)" &&
      std::find(analysis.predictors.begin(), analysis.predictors.end(), focal) == analysis.predictors.end())
    throw ConfigError("config: focal term '" + focal + "' is not in the analysis model");
  if (analysis_kind == ModelKind::Ordinal) throw ConfigError("config: ordinal analysis models are not supported");
  if (missingness.empty()) throw ConfigError("config: grid.missingness is empty");
  for (const auto& spec : missingness) spec.validate(sample);
  if (estimators.empty()) throw ConfigError("config: grid.estimators is empty");
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (estimators[j] == estimators[i]) throw ConfigError("config: duplicate estimator " + estimators[i].label());
    if (estimators[i].kind != EstimatorKind::MultipleImputation) continue;
    for (const auto& aux : tier(estimators[i].tier).auxiliaries) sample.index_of(aux);
  }
  if (replications < 2) throw ConfigError("config: replications must be at least 2");
  if (m < 2) throw ConfigError("config: imputation.m must be at least 2");
  if (iterations < 1) throw ConfigError("config: imputation.iterations must be at least 1");
  if (reference != "LD" && reference != "complete")
    throw ConfigError("config: report.reference must be LD or complete");
  for (const auto& f : formats)
    if (f != "csv" && f != "markdown" && f != "json") throw ConfigError("config: unknown report format '" + f + "'");
  if (basename.empty() || basename.find('/') != std::string::npos)
    throw ConfigError("config: report.basename must be a plain file stem");
}

HarnessConfig default_config() {
  HarnessConfig cfg;
  for (double rate : {0.3, 0.2, 0.1}) cfg.missingness.push_back({"X1", rate, Mechanism::MCAR, {}});
  cfg.tiers.push_back({"none", {}});
  for (const auto& t : cfg.population.aux_tiers) cfg.tiers.push_back({t.name, {aux_column(t.name)}});
  cfg.estimators.push_back(EstimatorSpec::parse("LD"));
  for (const auto& t : cfg.tiers) cfg.estimators.push_back({EstimatorKind::MultipleImputation, t.name});
  cfg.estimators.push_back(EstimatorSpec::parse("complete"));
  return cfg;
}

HarnessConfig config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j, {"schema_version", "seed", "regime", "population", "analysis", "grid", "imputation", "report"},
                        "the top level");
    if (!j.contains("schema_version")) throw ConfigError("config: schema_version is mandatory");
    HarnessConfig cfg;
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != kSchemaVersion)
      throw ConfigError("config: schema_version " + std::to_string(cfg.schema_version) + " is not supported");
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.regime = regime_from_string(get_or<std::string>(j, "regime", "fixed"));

    if (j.contains("population")) {
      const auto& p = j.at("population");
      reject_unknown_keys(p, {"n", "true_beta", "base_r2", "aux_tiers", "pilot_rows"}, "population");
      cfg.population.n = get_or<std::size_t>(p, "n", cfg.population.n);
      cfg.population.true_beta = get_or<std::vector<double>>(p, "true_beta", cfg.population.true_beta);
      cfg.population.base_r2 = get_or<double>(p, "base_r2", cfg.population.base_r2);
      if (p.contains("aux_tiers")) {
        cfg.population.aux_tiers.clear();
        for (const auto& t : p.at("aux_tiers"))
          cfg.population.aux_tiers.push_back({t.at("name").get<std::string>(), t.at("target_r2").get<double>()});
      }
      cfg.pilot_rows = get_or<std::size_t>(p, "pilot_rows", cfg.pilot_rows);
    }
    cfg.population.seed = cfg.seed;

    if (j.contains("analysis")) {
      const auto& a = j.at("analysis");
      reject_unknown_keys(a, {"response", "predictors", "model", "focal"}, "analysis");
      cfg.analysis.response = get_or<std::string>(a, "response", cfg.analysis.response);
      cfg.analysis.predictors = get_or<std::vector<std::string>>(a, "predictors", cfg.analysis.predictors);
      cfg.analysis_kind = model_kind_from_string(get_or<std::string>(a, "model", to_string(cfg.analysis_kind)));
      cfg.focal = get_or<std::string>(a, "focal", cfg.focal);
    }

    if (j.contains("imputation")) {
      const auto& im = j.at("imputation");
      reject_unknown_keys(im, {"m", "iterations", "policy", "tiers"}, "imputation");
      cfg.m = get_or<int>(im, "m", cfg.m);
      cfg.iterations = get_or<int>(im, "iterations", cfg.iterations);
      cfg.policy = policy_from_string(get_or<std::string>(im, "policy", to_string(cfg.policy)));
      if (im.contains("tiers"))
        for (const auto& [name, aux] : im.at("tiers").items())
          cfg.tiers.push_back({name, aux.get<std::vector<std::string>>()});
    }
    if (cfg.tiers.empty()) {
      cfg.tiers.push_back({"none", {}});
      for (const auto& t : cfg.population.aux_tiers) cfg.tiers.push_back({t.name, {aux_column(t.name)}});
    }

    if (!j.contains("grid")) throw ConfigError("config: grid section is mandatory");
    const auto& g = j.at("grid");
    reject_unknown_keys(g, {"missingness", "estimators", "replications"}, "grid");
    for (const auto& mj : g.at("missingness")) {
      reject_unknown_keys(mj, {"target", "rate", "mechanism", "score"}, "grid.missingness");
      MissingnessSpec spec;
      spec.target = get_or<std::string>(mj, "target", cfg.focal);
      spec.rate = mj.at("rate").get<double>();
      const auto mech = get_or<std::string>(mj, "mechanism", "MCAR");
      if (mech == "MCAR")
        spec.mechanism = Mechanism::MCAR;
      else if (mech == "MAR")
        spec.mechanism = Mechanism::MAR;
      else
        throw ConfigError("config: unknown mechanism '" + mech + "'");
      if (mj.contains("score"))
        for (const auto& [var, w] : mj.at("score").items()) spec.score.push_back({var, w.get<double>()});
      cfg.missingness.push_back(std::move(spec));
    }
    for (const auto& e : g.at("estimators")) cfg.estimators.push_back(EstimatorSpec::parse(e.get<std::string>()));
    cfg.replications = get_or<int>(g, "replications", cfg.replications);

    if (j.contains("report")) {
      const auto& r = j.at("report");
      reject_unknown_keys(r, {"reference", "formats", "basename"}, "report");
      cfg.reference = get_or<std::string>(r, "reference", cfg.reference);
      cfg.formats = get_or<std::vector<std::string>>(r, "formats", cfg.formats);
      cfg.basename = get_or<std::string>(r, "basename", cfg.basename);
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json config_to_json(const HarnessConfig& cfg) {
  json tiers = json::object();
  for (const auto& t : cfg.tiers) tiers[t.name] = t.auxiliaries;
  json aux = json::array();
  for (const auto& t : cfg.population.aux_tiers) aux.push_back({{"name", t.name}, {"target_r2", t.target_r2}});
  json miss = json::array();
  for (const auto& s : cfg.missingness) {
    json mj{{"target", s.target}, {"rate", s.rate}, {"mechanism", s.mechanism == Mechanism::MCAR ? "MCAR" : "MAR"}};
    if (!s.score.empty()) {
      json score = json::object();
      for (const auto& t : s.score) score[t.variable] = t.weight;
      mj["score"] = score;
    }
    miss.push_back(mj);
  }
  json est = json::array();
  for (const auto& e : cfg.estimators) est.push_back(e.label());
  return json{{"schema_version", cfg.schema_version},
              {"seed", cfg.seed},
              {"regime", to_string(cfg.regime)},
              {"population",
               {{"n", cfg.population.n},
                {"true_beta", cfg.population.true_beta},
                {"base_r2", cfg.population.base_r2},
                {"aux_tiers", aux},
                {"pilot_rows", cfg.pilot_rows}}},
              {"analysis",
               {{"response", cfg.analysis.response},
                {"predictors", cfg.analysis.predictors},
                {"model", to_string(cfg.analysis_kind)},
                {"focal", cfg.focal}}},
              {"grid", {{"missingness", miss}, {"estimators", est}, {"replications", cfg.replications}}},
              {"imputation",
               {{"m", cfg.m}, {"iterations", cfg.iterations}, {"policy", to_string(cfg.policy)}, {"tiers", tiers}}},
              {"report", {{"reference", cfg.reference}, {"formats", cfg.formats}, {"basename", cfg.basename}}}};
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

bool operator==(const CellResult& a, const CellResult& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.block == b.block && a.mechanism == b.mechanism && same(a.rate, b.rate) && a.estimator == b.estimator &&
         a.tier == b.tier && a.regime == b.regime && a.term == b.term && a.replications == b.replications &&
         same(a.estimand, b.estimand) && same(a.estimand_se, b.estimand_se) && same(a.est_mean, b.est_mean) &&
         same(a.est_sd, b.est_sd) && same(a.mean_model_se, b.mean_model_se) && same(a.total_se, b.total_se) &&
         same(a.bias, b.bias) && same(a.bias_mcse, b.bias_mcse) && same(a.mean_r2, b.mean_r2) &&
         same(a.mean_n_used, b.mean_n_used);
}

EfficiencyRow efficiency_metrics(double se_method, double se_ref) {
  if (!(se_method > 0.0) || !(se_ref > 0.0) || !std::isfinite(se_method) || !std::isfinite(se_ref))
    throw ConfigError("efficiency_metrics: standard errors must be positive and finite");
  const double ratio = se_ref / se_method;
  return EfficiencyRow{se_method / se_ref - 1.0, ratio * ratio - 1.0};
}

std::pair<double, double> analytic_mcar_bounds(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("analytic_mcar_bounds: rate must lie in (0, 1)");
  return {1.0 - std::sqrt(1.0 - rate), 1.0 / (1.0 - rate) - 1.0};
}

long percent(double fraction) { return std::lround(fraction * 100.0); }

std::string format_percent(double fraction, bool signed_positive) {
  if (!std::isfinite(fraction)) return "";
  long p = percent(fraction);
  std::string s = std::to_string(p) + "%";
  return (signed_positive && p > 0) ? "+" + s : s;
}

double two_sided_p(double t_ratio, double df) {
  const double a = std::abs(t_ratio);
  if (std::isinf(df)) return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), a));
  if (!(df > 0.0)) throw ConfigError("two_sided_p: df must be positive");
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<>(df), a));
}

std::string significance_stars(double point, double se, double df) {
  if (!(se > 0.0)) throw ConfigError("significance_stars: se must be positive");
  const double p = two_sided_p(point / se, df);
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.10) return "†";
  return "";
}

RunContext prepare_context(const HarnessConfig& cfg) {
  cfg.validate();
  RunContext ctx;
  ctx.pilot = pilot_estimand(cfg.population, cfg.analysis, cfg.analysis_kind, cfg.focal, cfg.seed, cfg.pilot_rows);
  if (cfg.regime == Regime::Fixed) {
    Rng rng = make_substream(cfg.seed, {hash_label("population")});
    ctx.fixed_population = generate_population(cfg.population, rng).data;
    Estimate est = fit_analysis(*ctx.fixed_population, cfg.analysis, cfg.analysis_kind);
    ctx.fixed_complete_variance = est.term(cfg.focal).variance;
  }
  return ctx;
}

Replicate run_replicate(const HarnessConfig& cfg, const RunContext& ctx, std::size_t block,
                        const EstimatorSpec& estimator, int r) {
  const auto& miss = cfg.missingness.at(block);
  try {
    Rng rng = make_substream(cfg.seed, {hash_label("ampute"), block, static_cast<std::uint64_t>(r)});
    Dataset population;
    if (cfg.regime == Regime::Fixed) {
      if (!ctx.fixed_population) throw ConfigError("fixed regime needs a prepared population");
      population = *ctx.fixed_population;
    } else {
      population = generate_population(cfg.population, rng).data;
    }

    Replicate rep;
    if (estimator.kind == EstimatorKind::Complete) {
      Estimate est = fit_analysis(population, cfg.analysis, cfg.analysis_kind);
      const auto& t = est.term(cfg.focal);
      return Replicate{t.point, std::sqrt(t.variance), rep.fit_statistic, est.n_used};
    }

    Dataset amputed = ampute(population, miss, rng);
    if (estimator.kind == EstimatorKind::ListwiseDeletion) {
      Estimate est = ld_estimate(amputed, cfg.analysis, cfg.analysis_kind);
      const auto& t = est.term(cfg.focal);
      return Replicate{t.point, std::sqrt(t.variance), rep.fit_statistic, est.n_used};
    }

    ImputationSpec spec;
    spec.m = cfg.m;
    spec.iterations = cfg.iterations;
    spec.policy = cfg.policy;
    VariableModel model;
    model.variable = miss.target;
    model.method = method_for(amputed.variable(amputed.index_of(miss.target)));
    for (const auto& v : cfg.analysis.variables())
      if (v != miss.target) model.predictors.push_back(v);
    for (const auto& aux : cfg.tier(estimator.tier).auxiliaries)
      if (std::find(model.predictors.begin(), model.predictors.end(), aux) == model.predictors.end())
        model.predictors.push_back(aux);
    spec.models.push_back(std::move(model));

    const std::uint64_t imp_seed =
        substream_seed(cfg.seed, {hash_label("impute"), cell_id(block, estimator), static_cast<std::uint64_t>(r)});
    auto completed = impute(amputed, spec, imp_seed);
    auto estimates = mi_estimates(completed, cfg.analysis, cfg.analysis_kind);
    PooledEstimate pooled = pool_rubin(estimates);
    const auto& t = pooled.term(cfg.focal);
    double r2 = 0.0;
    for (const auto& cd : completed) r2 += cd.fit_statistic(miss.target);
    rep.estimate = t.q_bar;
    rep.model_se = t.se();
    rep.fit_statistic = r2 / static_cast<double>(completed.size());
    rep.n_used = estimates.front().n_used;
    return rep;
  } catch (const Error& e) {
    throw Error(e.kind(), miss.label() + " / " + estimator.label() + ", replication " + std::to_string(r) + ": " +
                              e.what());
  }
}

CellResult aggregate_cell(const HarnessConfig& cfg, const RunContext& ctx, std::size_t block,
                          const EstimatorSpec& estimator, const std::vector<Replicate>& reps) {
  if (reps.size() < 2) throw ConfigError("aggregate_cell: need at least 2 replications");
  const auto& miss = cfg.missingness.at(block);
  CellResult c;
  c.block = miss.label();
  c.mechanism = miss.mechanism == Mechanism::MCAR ? "MCAR" : "MAR";
  c.rate = miss.rate;
  c.estimator = estimator.label();
  c.tier = estimator.tier;
  c.regime = to_string(cfg.regime);
  c.term = cfg.focal;
  c.replications = static_cast<int>(reps.size());
  c.estimand = ctx.pilot.value;
  c.estimand_se = ctx.pilot.se;

  std::vector<double> est, se, r2, used;
  for (const auto& rep : reps) {
    est.push_back(rep.estimate);
    se.push_back(rep.model_se);
    used.push_back(static_cast<double>(rep.n_used));
    if (std::isfinite(rep.fit_statistic)) r2.push_back(rep.fit_statistic);
  }
  const double rr = static_cast<double>(reps.size());
  c.est_mean = mean_of(est);
  c.est_sd = sd_of(est);
  c.mean_model_se = mean_of(se);
  c.mean_n_used = mean_of(used);
  if (!r2.empty()) c.mean_r2 = mean_of(r2);
  const double pilot_var = ctx.pilot.se * ctx.pilot.se;
  const double between = c.est_sd * c.est_sd;
  if (cfg.regime == Regime::Fixed) {
    c.total_se = std::sqrt(between + ctx.fixed_complete_variance);
    c.bias_mcse = std::sqrt(ctx.fixed_complete_variance + between / rr + pilot_var);
  } else {
    c.total_se = c.est_sd;
    c.bias_mcse = std::sqrt(between / rr + pilot_var);
  }
  c.bias = c.est_mean - c.estimand;
  return c;
}

CellResult run_cell(const HarnessConfig& cfg, const RunContext& ctx, std::size_t block, const EstimatorSpec& estimator,
                    int threads) {
  std::vector<Replicate> reps(static_cast<std::size_t>(cfg.replications));
  parallel_for(reps.size(), threads,
               [&](std::size_t r) { reps[r] = run_replicate(cfg, ctx, block, estimator, static_cast<int>(r)); });
  return aggregate_cell(cfg, ctx, block, estimator, reps);
}

GridResult run_grid(const HarnessConfig& cfg, int threads) { return run_grid(cfg, prepare_context(cfg), threads); }

GridResult run_grid(const HarnessConfig& cfg, const RunContext& ctx, int threads) {
  cfg.validate();
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t n_cells = cfg.missingness.size() * n_est;
  const auto reps_per_cell = static_cast<std::size_t>(cfg.replications);
  std::vector<std::vector<Replicate>> reps(n_cells, std::vector<Replicate>(reps_per_cell));
  parallel_for(n_cells * reps_per_cell, threads, [&](std::size_t task) {
    const std::size_t cell = task / reps_per_cell;
    const std::size_t r = task % reps_per_cell;
    reps[cell][r] = run_replicate(cfg, ctx, cell / n_est, cfg.estimators[cell % n_est], static_cast<int>(r));
  });
  GridResult out;
  out.reference = cfg.reference;
  for (std::size_t cell = 0; cell < n_cells; ++cell)
    out.cells.push_back(aggregate_cell(cfg, ctx, cell / n_est, cfg.estimators[cell % n_est], reps[cell]));
  return out;
}

}  // namespace auxmi
