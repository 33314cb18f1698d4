#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "auxmi/dataset.hpp"
#include "auxmi/regressors.hpp"
#include "auxmi/rng.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(auxmi::Rng& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return a;
}

// Solves (A'A) b = A'y by Cholesky; deliberately a different route from the QR engine.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a = with_intercept(x);
  Eigen::MatrixXd ata = a.transpose() * a;
  return ata.llt().solve(a.transpose() * y);
}

inline std::vector<std::string> names(int p) {
  std::vector<std::string> out;
  for (int j = 1; j <= p; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

// Maximises the one-predictor logistic log-likelihood by shrinking grid search,
// using no derivatives.
inline Eigen::Vector2d grid_logistic_mle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  auto loglik = [&](double a, double b) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double eta = a + b * x(i);
      ll += y(i) * eta - std::log1p(std::exp(eta));
    }
    return ll;
  };
  double ca = 0.0, cb = 0.0, step = 1.0;
  const int half = 20;
  while (step > 1e-9) {
    double best = -INFINITY, ba = ca, bb = cb;
    for (int i = -half; i <= half; ++i)
      for (int j = -half; j <= half; ++j) {
        double a = ca + i * step, b = cb + j * step;
        double ll = loglik(a, b);
        if (ll > best) best = ll, ba = a, bb = b;
      }
    ca = ba;
    cb = bb;
    step /= 4.0;
  }
  return {ca, cb};
}

inline auxmi::Dataset continuous_dataset(const std::vector<std::string>& cols,
                                         std::vector<std::vector<double>> values) {
  std::vector<auxmi::Variable> vars;
  for (const auto& c : cols) vars.push_back({c, auxmi::VariableKind::continuous()});
  return auxmi::Dataset(std::move(vars), std::move(values));
}

}  // namespace testing
