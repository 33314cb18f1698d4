#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/regressors.hpp"
#include "auxmi/rng.hpp"

namespace auxmi {

enum class PerfectPredictionPolicy { Error, DropPredictor, AbortVariable };

std::string to_string(PerfectPredictionPolicy policy);
PerfectPredictionPolicy policy_from_string(const std::string& s);

/// Conditional model used to impute one variable.
struct VariableModel {
  std::string variable;
  ModelKind method = ModelKind::Linear;
  std::vector<std::string> predictors;
};

/// Chained-equations specification. Variables are updated in the order of
/// `models`.
struct ImputationSpec {
  std::vector<VariableModel> models;
  int m = 5;
  int iterations = 10;
  PerfectPredictionPolicy policy = PerfectPredictionPolicy::Error;

  void validate(const Dataset& d) const;
};

/// What happened to one variable's model in the most recent cycle.
struct VariableFitRecord {
  std::string variable;
  ModelKind method = ModelKind::Linear;
  double fit_statistic = 0.0;  // R^2 for linear, McFadden pseudo-R^2 otherwise
  std::vector<std::string> predictors_used;
  std::vector<std::string> dropped_predictors;  // cumulative across cycles
  bool aborted = false;
};

/// In-progress completed table of one chain.
struct WorkingTable {
  std::vector<Variable> variables;
  std::vector<std::vector<double>> columns;
  std::vector<Mask> originally_observed;
  std::vector<VariableFitRecord> records;  // one per model, in spec order

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t index_of(const std::string& name) const;
};

struct CompletedDataset {
  Dataset data;                      // no masked cells
  std::vector<Mask> imputed;         // 1 where the cell was filled in
  int imputation_index = 0;
  std::vector<VariableFitRecord> fits;  // final-cycle statistics

  double fit_statistic(const std::string& variable) const;
};

/// Fills every missing cell with a uniform draw from that variable's observed values.
WorkingTable initialize_fill(const Dataset& d, Rng& rng);

/// One pass over `spec.models`: refit on originally observed rows, draw
/// parameters, re-impute the originally missing cells.
void mice_cycle(WorkingTable& table, const ImputationSpec& spec, Rng& rng);

/// `spec.m` independent chains; chain i uses substream (seed, i). Output is
/// identical for any `threads` value.
std::vector<CompletedDataset> impute(const Dataset& d, const ImputationSpec& spec, std::uint64_t seed,
                                     int threads = 1);

}  // namespace auxmi
