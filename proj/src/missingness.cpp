#include "auxmi/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "auxmi/error.hpp"
#include "auxmi/regressors.hpp"

namespace auxmi {

namespace {

void require_fully_observed_target(const Dataset& d, const std::string& target) {
  if (d.missing_count(d.index_of(target)) > 0)
    throw ConfigError("amputation: target '" + target + "' already has missing values");
}

void require_rate(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("amputation: rate must lie in (0, 1)");
}

double mean_inv_logit(const std::vector<double>& score, double a) {
  double s = 0.0;
  for (double v : score) s += inv_logit(a + v);
  return s / static_cast<double>(score.size());
}

}  // namespace

void MissingnessSpec::validate(const Dataset& d) const {
  d.index_of(target);
  require_rate(rate);
  if (mechanism == Mechanism::MCAR) return;
  for (const auto& term : score) {
    std::size_t col = d.index_of(term.variable);
    if (term.variable == target) throw ConfigError("MAR score may not reference the target '" + target + "'");
    if (!std::isfinite(term.weight)) throw ConfigError("MAR score weight for '" + term.variable + "' is not finite");
    if (d.missing_count(col) > 0)
      throw ConfigError("MAR score variable '" + term.variable + "' must be fully observed");
  }
}

std::string MissingnessSpec::label() const {
  std::string pct = std::to_string(static_cast<int>(std::lround(rate * 100.0))) + "%";
  if (mechanism == Mechanism::MCAR) return "MCAR " + pct;
  std::string s = "MAR(";
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (i) s += ",";
    s += score[i].variable + ":" + format_double(score[i].weight);
  }
  return s + ") " + pct;
}

Dataset ampute_mcar(const Dataset& d, const std::string& target, double rate, Rng& rng) {
  std::size_t col = d.index_of(target);
  require_rate(rate);
  require_fully_observed_target(d, target);
  const std::size_t n = d.n_rows();
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  if (count == 0) return d;

  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  Mask observed(n, 1);
  for (std::size_t i = 0; i < count; ++i) observed[order[i]] = 0;
  auto values = d.column(col);
  return d.with_column(col, std::vector<double>(values.begin(), values.end()), std::move(observed));
}

double calibrate_selection_intercept(const std::vector<double>& score, double rate) {
  require_rate(rate);
  if (score.empty()) throw ConfigError("MAR calibration: empty dataset");
  for (double v : score)
    if (!std::isfinite(v)) throw ConfigError("MAR calibration failed: score has non-finite values");
  auto [min_it, max_it] = std::minmax_element(score.begin(), score.end());
  double base = std::log(rate / (1.0 - rate));
  double lo = base - *max_it - 1.0;
  double hi = base - *min_it + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mean_inv_logit(score, mid) > rate)
      hi = mid;
    else
      lo = mid;
  }
  double a = 0.5 * (lo + hi);
  if (std::abs(mean_inv_logit(score, a) - rate) >= kCalibrationTolerance)
    throw ConfigError("MAR calibration failed: cannot reach mean deletion probability " + format_double(rate));
  return a;
}

std::vector<double> mar_deletion_probabilities(const Dataset& d, const MissingnessSpec& spec) {
  spec.validate(d);
  std::vector<double> score(d.n_rows(), 0.0);
  for (const auto& term : spec.score) {
    auto values = d.column(term.variable);
    for (std::size_t r = 0; r < score.size(); ++r) score[r] += term.weight * values[r];
  }
  double a = calibrate_selection_intercept(score, spec.rate);
  for (double& s : score) s = inv_logit(a + s);
  return score;
}

Dataset ampute_mar(const Dataset& d, const MissingnessSpec& spec, Rng& rng) {
  std::size_t col = d.index_of(spec.target);
  require_fully_observed_target(d, spec.target);
  auto prob = mar_deletion_probabilities(d, spec);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mask observed(d.n_rows(), 1);
  for (std::size_t r = 0; r < d.n_rows(); ++r)
    if (unif(rng) < prob[r]) observed[r] = 0;
  auto values = d.column(col);
  return d.with_column(col, std::vector<double>(values.begin(), values.end()), std::move(observed));
}

Dataset ampute(const Dataset& d, const MissingnessSpec& spec, Rng& rng) {
  spec.validate(d);
  if (spec.mechanism == Mechanism::MCAR) return ampute_mcar(d, spec.target, spec.rate, rng);
  return ampute_mar(d, spec, rng);
}

}  // namespace auxmi
