#include "auxmi/mice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "auxmi/error.hpp"
#include "auxmi/parallel.hpp"

namespace auxmi {

namespace {

KindTag kind_for(ModelKind method) {
  switch (method) {
    case ModelKind::Linear:
      return KindTag::Continuous;
    case ModelKind::Logistic:
      return KindTag::Binary;
    case ModelKind::Ordinal:
      return KindTag::Ordinal;
  }
  return KindTag::Continuous;
}

Eigen::MatrixXd gather(const WorkingTable& table, const std::vector<std::size_t>& cols,
                       const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& column = table.columns[cols[j]];
    for (std::size_t i = 0; i < rows.size(); ++i)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = column[rows[i]];
  }
  return x;
}

struct CycleFit {
  ParameterDraw draw;
  double statistic = 0.0;
  bool perfect_prediction = false;
};

CycleFit fit_and_draw(const WorkingTable& table, const VariableModel& model, std::size_t target,
                      const std::vector<std::size_t>& pred_cols, const std::vector<std::string>& pred_names,
                      const std::vector<std::size_t>& obs_rows, Rng& rng) {
  Eigen::MatrixXd x = gather(table, pred_cols, obs_rows);
  const auto& column = table.columns[target];
  CycleFit out;
  switch (model.method) {
    case ModelKind::Linear: {
      Eigen::VectorXd y(static_cast<Eigen::Index>(obs_rows.size()));
      for (std::size_t i = 0; i < obs_rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = column[obs_rows[i]];
      LinearFit fit = fit_linear(x, y, pred_names);
      out.statistic = fit.r2;
      out.draw = draw_parameters(fit, rng);
      return out;
    }
    case ModelKind::Logistic: {
      Eigen::VectorXd y(static_cast<Eigen::Index>(obs_rows.size()));
      for (std::size_t i = 0; i < obs_rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = column[obs_rows[i]];
      try {
        GlmFit fit = fit_logistic(x, y, pred_names);
        if (fit.separation_detected || !fit.converged || fit.loglik_null == 0.0) {
          out.perfect_prediction = true;
          return out;
        }
        out.statistic = fit.pseudo_r2;
        out.draw = draw_parameters(fit, rng);
      } catch (const FitError& e) {
        if (e.kind() != "not_converged") throw;
        out.perfect_prediction = true;
      }
      return out;
    }
    case ModelKind::Ordinal: {
      const auto& kind = table.variables[target].kind;
      Eigen::VectorXi ranks(static_cast<Eigen::Index>(obs_rows.size()));
      for (std::size_t i = 0; i < obs_rows.size(); ++i)
        ranks(static_cast<Eigen::Index>(i)) = kind.rank_of(column[obs_rows[i]]);
      try {
        OrdinalFit fit = fit_ordinal(x, ranks, kind.levels(), pred_names);
        if (fit.separation_detected || !fit.converged) {
          out.perfect_prediction = true;
          return out;
        }
        out.statistic = fit.pseudo_r2;
        out.draw = draw_parameters(fit, rng);
      } catch (const FitError& e) {
        if (e.kind() != "not_converged") throw;
        out.perfect_prediction = true;
      }
      return out;
    }
  }
  return out;
}

}  // namespace

std::string to_string(PerfectPredictionPolicy policy) {
  switch (policy) {
    case PerfectPredictionPolicy::Error:
      return "error";
    case PerfectPredictionPolicy::DropPredictor:
      return "drop_predictor";
    case PerfectPredictionPolicy::AbortVariable:
      return "abort_variable";
  }
  return "unknown";
}

PerfectPredictionPolicy policy_from_string(const std::string& s) {
  if (s == "error") return PerfectPredictionPolicy::Error;
  if (s == "drop_predictor") return PerfectPredictionPolicy::DropPredictor;
  if (s == "abort_variable") return PerfectPredictionPolicy::AbortVariable;
  throw ConfigError("unknown perfect-prediction policy '" + s + "'");
}

void ImputationSpec::validate(const Dataset& d) const {
  if (m < 2) throw ConfigError("imputation: m must be at least 2");
  if (iterations < 1) throw ConfigError("imputation: iterations must be at least 1");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& model = models[i];
    const auto& var = d.variable(d.index_of(model.variable));
    if (var.kind.tag() != kind_for(model.method))
      throw ConfigError("imputation: method " + to_string(model.method) + " does not match " + var.kind.describe() +
                        " variable '" + model.variable + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (models[j].variable == model.variable)
        throw ConfigError("imputation: variable '" + model.variable + "' has two models");
    ModelFormula{model.variable, model.predictors}.validate(d);
  }
  for (std::size_t c = 0; c < d.n_vars(); ++c) {
    if (d.missing_count(c) == 0) continue;
    const auto& name = d.variable(c).name;
    bool covered = std::any_of(models.begin(), models.end(), [&](const VariableModel& mdl) { return mdl.variable == name; });
    if (!covered) throw ConfigError("imputation: variable '" + name + "' has missing cells but no model");
  }
}

std::size_t WorkingTable::index_of(const std::string& name) const {
  for (std::size_t c = 0; c < variables.size(); ++c)
    if (variables[c].name == name) return c;
  throw DataError("unknown variable '" + name + "'");
}

double CompletedDataset::fit_statistic(const std::string& variable) const {
  for (const auto& rec : fits)
    if (rec.variable == variable) return rec.fit_statistic;
  throw DataError("no imputation model for '" + variable + "'");
}

WorkingTable initialize_fill(const Dataset& d, Rng& rng) {
  WorkingTable table;
  table.variables = d.variables();
  table.columns.resize(d.n_vars());
  table.originally_observed.resize(d.n_vars());
  for (std::size_t c = 0; c < d.n_vars(); ++c) {
    auto values = d.column(c);
    const auto& mask = d.observed(c);
    table.columns[c].assign(values.begin(), values.end());
    table.originally_observed[c] = mask;
    if (d.missing_count(c) == 0) continue;
    std::vector<double> pool;
    for (std::size_t r = 0; r < d.n_rows(); ++r)
      if (mask[r]) pool.push_back(values[r]);
    if (pool.empty()) throw ConfigError("imputation: variable '" + d.variable(c).name + "' is entirely missing");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t r = 0; r < d.n_rows(); ++r)
      if (!mask[r]) table.columns[c][r] = pool[pick(rng)];
  }
  return table;
}

void mice_cycle(WorkingTable& table, const ImputationSpec& spec, Rng& rng) {
  if (table.records.size() != spec.models.size()) {
    table.records.clear();
    for (const auto& model : spec.models) {
      VariableFitRecord rec;
      rec.variable = model.variable;
      rec.method = model.method;
      rec.fit_statistic = std::numeric_limits<double>::quiet_NaN();
      rec.predictors_used = model.predictors;
      table.records.push_back(rec);
    }
  }

  for (std::size_t mi = 0; mi < spec.models.size(); ++mi) {
    const auto& model = spec.models[mi];
    auto& rec = table.records[mi];
    const std::size_t target = table.index_of(model.variable);
    const auto& mask = table.originally_observed[target];
    std::vector<std::size_t> obs_rows, mis_rows;
    for (std::size_t r = 0; r < table.n_rows(); ++r) (mask[r] ? obs_rows : mis_rows).push_back(r);
    if (mis_rows.empty()) continue;

    std::vector<std::string> preds;
    for (const auto& p : model.predictors)
      if (std::find(rec.dropped_predictors.begin(), rec.dropped_predictors.end(), p) == rec.dropped_predictors.end())
        preds.push_back(p);

    rec.aborted = false;
    while (true) {
      std::vector<std::size_t> pred_cols;
      for (const auto& p : preds) pred_cols.push_back(table.index_of(p));
      CycleFit fit = fit_and_draw(table, model, target, pred_cols, preds, obs_rows, rng);
      if (!fit.perfect_prediction) {
        Eigen::VectorXd imputed = impute_draw(fit.draw, gather(table, pred_cols, mis_rows), rng);
        auto& column = table.columns[target];
        for (std::size_t i = 0; i < mis_rows.size(); ++i) column[mis_rows[i]] = imputed(static_cast<Eigen::Index>(i));
        rec.fit_statistic = fit.statistic;
        rec.predictors_used = preds;
        break;
      }
      if (spec.policy == PerfectPredictionPolicy::Error || preds.empty()) throw SeparationError(model.variable, preds);
      if (spec.policy == PerfectPredictionPolicy::AbortVariable) {
        rec.aborted = true;
        rec.predictors_used = preds;
        break;
      }
      rec.dropped_predictors.push_back(preds.back());
      preds.pop_back();
    }
  }
}

std::vector<CompletedDataset> impute(const Dataset& d, const ImputationSpec& spec, std::uint64_t seed, int threads) {
  spec.validate(d);
  std::vector<CompletedDataset> out(static_cast<std::size_t>(spec.m));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    Rng rng = make_substream(seed, {static_cast<std::uint64_t>(i)});
    WorkingTable table = initialize_fill(d, rng);
    for (int it = 0; it < spec.iterations; ++it) mice_cycle(table, spec, rng);
    CompletedDataset cd;
    cd.imputation_index = static_cast<int>(i);
    cd.imputed.resize(table.originally_observed.size());
    for (std::size_t c = 0; c < table.originally_observed.size(); ++c) {
      cd.imputed[c].resize(table.originally_observed[c].size());
      for (std::size_t r = 0; r < cd.imputed[c].size(); ++r) cd.imputed[c][r] = table.originally_observed[c][r] ? 0 : 1;
    }
    cd.fits = table.records;
    cd.data = Dataset(table.variables, std::move(table.columns));
    out[i] = std::move(cd);
  });
  return out;
}

}  // namespace auxmi
