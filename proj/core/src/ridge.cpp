// Copyright 2026 The wermeter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numeric>

#include "wermeter/error.hpp"
#include "wermeter/regression.hpp"

namespace wermeter::regression {

double RidgeModel::predict_row(const double* features) const {
  double s = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * features[j];
  return s;
}

// min ||y - Xw - b||^2 + alpha ||w||^2, intercept unpenalized and
// unconstrained. Coordinate descent with optional projection onto w >= 0;
// converges for this convex objective.
RidgeModel fit_ridge(const Dataset2D& data, double alpha, bool nonneg, double tol,
                     int max_sweeps) {
  data.validate();
  if (alpha < 0.0) throw ValidationError("ridge: alpha must be >= 0");
  const std::size_t n = data.n_rows;
  const std::size_t d = data.n_cols;

  std::vector<double> col_sq(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) col_sq[j] += data.at(i, j) * data.at(i, j);
  }

  RidgeModel model;
  model.weights.assign(d, 0.0);
  model.intercept =
      std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);

  // residual = y - b - Xw, maintained incrementally.
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = data.y[i] - model.intercept;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (col_sq[j] == 0.0) continue;  // constant-zero column stays at 0
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += data.at(i, j) * residual[i];
      rho += col_sq[j] * model.weights[j];
      double w_new = rho / (col_sq[j] + alpha);
      if (nonneg && w_new < 0.0) w_new = 0.0;
      const double delta = w_new - model.weights[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * data.at(i, j);
        model.weights[j] = w_new;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    // Re-center the intercept on the current residual.
    const double b_shift =
        std::accumulate(residual.begin(), residual.end(), 0.0) / static_cast<double>(n);
    if (b_shift != 0.0) {
      model.intercept += b_shift;
      for (double& r : residual) r -= b_shift;
    }
    max_delta = std::max(max_delta, std::abs(b_shift));
    if (max_delta < tol) break;
  }
  return model;
}

}  // namespace wermeter::regression
