#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/mice.hpp"
#include "auxmi/regressors.hpp"

namespace auxmi {

struct TermEstimate {
  std::string name;
  double point = 0.0;
  double variance = 0.0;  // squared standard error
};

/// Analysis-model output for one dataset.
struct Estimate {
  std::vector<TermEstimate> terms;
  std::size_t n_used = 0;
  ModelKind model_kind = ModelKind::Logistic;

  /// Throws DataError for unknown terms.
  const TermEstimate& term(const std::string& name) const;
};

/// Rubin's rules for one term. `df` is +infinity when b == 0.
struct PooledTerm {
  std::string name;
  double q_bar = 0.0;
  double u_bar = 0.0;
  double b = 0.0;
  double t = 0.0;
  double df = std::numeric_limits<double>::infinity();

  double se() const;
};

struct PooledEstimate {
  std::vector<PooledTerm> terms;
  int m = 0;

  const PooledTerm& term(const std::string& name) const;
};

/// Fits the analysis model; ordinal terms are "cut1".."cutK-1" followed by the slopes.
/// Separation in the analysis model is an error.
Estimate fit_analysis(const Dataset& d, const ModelFormula& f, ModelKind kind);

/// Analysis model on the rows complete on the formula's variables.
Estimate ld_estimate(const Dataset& d, const ModelFormula& f, ModelKind kind);

/// One analysis fit per completed dataset, in input order.
std::vector<Estimate> mi_estimates(std::span<const CompletedDataset> completed, const ModelFormula& f,
                                   ModelKind kind, int threads = 1);

/// Rubin (1987) combination with large-sample degrees of freedom.
PooledEstimate pool_rubin(std::span<const Estimate> estimates);

}  // namespace auxmi
