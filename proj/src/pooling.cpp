#include "auxmi/pooling.hpp"

#include <cmath>

#include "auxmi/error.hpp"
#include "auxmi/parallel.hpp"

namespace auxmi {

const TermEstimate& Estimate::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t;
  throw DataError("estimate has no term '" + name + "'");
}

double PooledTerm::se() const { return std::sqrt(t); }

const PooledTerm& PooledEstimate::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t;
  throw DataError("pooled estimate has no term '" + name + "'");
}

Estimate fit_analysis(const Dataset& d, const ModelFormula& f, ModelKind kind) {
  Estimate est;
  est.model_kind = kind;
  est.n_used = d.n_rows();
  switch (kind) {
    case ModelKind::Linear: {
      LinearFit fit = fit_linear(d, f);
      for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        auto i = static_cast<Eigen::Index>(j);
        est.terms.push_back({fit.terms[j], fit.coef(i), fit.sigma2_hat * fit.xtx_inverse(i, i)});
      }
      break;
    }
    case ModelKind::Logistic: {
      GlmFit fit = fit_logistic(d, f);
      if (fit.separation_detected || !fit.converged)
        throw FitError("analysis model: perfect prediction of '" + f.response + "'", "separation");
      for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        auto i = static_cast<Eigen::Index>(j);
        est.terms.push_back({fit.terms[j], fit.coef(i), fit.cov(i, i)});
      }
      break;
    }
    case ModelKind::Ordinal: {
      OrdinalFit fit = fit_ordinal(d, f);
      if (fit.separation_detected || !fit.converged)
        throw FitError("analysis model: perfect prediction of '" + f.response + "'", "separation");
      const Eigen::Index kt = fit.thresholds.size();
      for (Eigen::Index j = 0; j < kt; ++j)
        est.terms.push_back({"cut" + std::to_string(j + 1), fit.thresholds(j), fit.cov(j, j)});
      for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        auto i = static_cast<Eigen::Index>(j);
        est.terms.push_back({fit.terms[j], fit.coef(i), fit.cov(kt + i, kt + i)});
      }
      break;
    }
  }
  return est;
}

Estimate ld_estimate(const Dataset& d, const ModelFormula& f, ModelKind kind) {
  f.validate(d);
  Dataset complete = listwise_complete(d, f.variables());
  const std::size_t p = f.predictors.size() + 1;
  if (complete.n_rows() <= p)
    throw FitError("listwise deletion leaves " + std::to_string(complete.n_rows()) + " complete rows for " +
                       std::to_string(p) + " coefficients",
                   "too_few_rows");
  return fit_analysis(complete, f, kind);
}

std::vector<Estimate> mi_estimates(std::span<const CompletedDataset> completed, const ModelFormula& f,
                                   ModelKind kind, int threads) {
  if (completed.size() < 2) throw ConfigError("mi_estimates: need at least 2 completed datasets");
  for (const auto& cd : completed)
    if (cd.data.variables() != completed.front().data.variables())
      throw ConfigError("mi_estimates: completed datasets have different schemas");
  std::vector<Estimate> out(completed.size());
  parallel_for(completed.size(), threads, [&](std::size_t i) {
    try {
      out[i] = fit_analysis(completed[i].data, f, kind);
    } catch (const FitError& e) {
      throw FitError("imputation " + std::to_string(completed[i].imputation_index) + ": " + e.what(), e.kind());
    }
  });
  return out;
}

PooledEstimate pool_rubin(std::span<const Estimate> estimates) {
  const std::size_t m = estimates.size();
  if (m < 2) throw ConfigError("pool_rubin: need at least 2 estimates");
  const auto& first = estimates.front().terms;
  for (const auto& e : estimates) {
    bool same = e.terms.size() == first.size();
    for (std::size_t j = 0; same && j < first.size(); ++j) same = e.terms[j].name == first[j].name;
    if (!same) throw ConfigError("pool_rubin: estimates have mismatched terms");
  }
  const double md = static_cast<double>(m);
  PooledEstimate pooled;
  pooled.m = static_cast<int>(m);
  for (std::size_t j = 0; j < first.size(); ++j) {
    PooledTerm term;
    term.name = first[j].name;
    for (const auto& e : estimates) {
      term.q_bar += e.terms[j].point;
      term.u_bar += e.terms[j].variance;
    }
    term.q_bar /= md;
    term.u_bar /= md;
    for (const auto& e : estimates) {
      double dev = e.terms[j].point - term.q_bar;
      term.b += dev * dev;
    }
    term.b /= md - 1.0;
    const double inflated_b = (1.0 + 1.0 / md) * term.b;
    term.t = term.u_bar + inflated_b;
    if (term.b > 0.0) {
      double r = 1.0 + term.u_bar / inflated_b;
      term.df = (md - 1.0) * r * r;
    } else {
      term.df = std::numeric_limits<double>::infinity();
    }
    pooled.terms.push_back(term);
  }
  return pooled;
}

}  // namespace auxmi
