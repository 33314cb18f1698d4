#pragma once

#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/rng.hpp"

namespace auxmi {

enum class Mechanism { MCAR, MAR };

struct ScoreTerm {
  std::string variable;
  double weight = 0.0;
};

/// Which cells of `target` to delete and how. Under MAR the per-row deletion
/// probability is inv_logit(a + sum_j weight_j * value_j), with the intercept
/// `a` calibrated so the mean probability equals `rate`.
struct MissingnessSpec {
  std::string target;
  double rate = 0.0;
  Mechanism mechanism = Mechanism::MCAR;
  std::vector<ScoreTerm> score;

  void validate(const Dataset& d) const;
  /// Short label such as "MCAR 30%" or "MAR(Y:2) 30%".
  std::string label() const;
};

inline constexpr double kCalibrationTolerance = 1e-4;

/// Masks exactly round(rate * n) cells of `target`, uniformly without replacement.
Dataset ampute_mcar(const Dataset& d, const std::string& target, double rate, Rng& rng);

/// Per-row Bernoulli deletion with a calibrated logistic selection model.
Dataset ampute_mar(const Dataset& d, const MissingnessSpec& spec, Rng& rng);

/// Dispatches on `spec.mechanism`.
Dataset ampute(const Dataset& d, const MissingnessSpec& spec, Rng& rng);

/// Intercept `a` solving mean(inv_logit(a + score)) = rate, by bisection.
double calibrate_selection_intercept(const std::vector<double>& score, double rate);

/// The per-row deletion probabilities implied by a MAR spec on `d`.
std::vector<double> mar_deletion_probabilities(const Dataset& d, const MissingnessSpec& spec);

}  // namespace auxmi
