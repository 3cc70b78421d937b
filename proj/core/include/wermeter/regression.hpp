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

#ifndef WERMETER_REGRESSION_HPP
#define WERMETER_REGRESSION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wermeter/rng.hpp"

namespace wermeter::regression {

// Row-major feature matrix with targets.
struct Dataset2D {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> x;  // n_rows * n_cols
  std::vector<double> y;  // n_rows

  double at(std::size_t row, std::size_t col) const { return x[row * n_cols + col]; }
  const double* row(std::size_t r) const { return x.data() + r * n_cols; }
  void push_row(std::span<const double> features, double target);
  // Throws ValidationError on shape problems or non-finite entries; when
  // require_nonneg_targets is set, negative y is rejected.
  void validate(bool require_nonneg_targets = false) const;
};

// ---------------------------------------------------------------------------
// CART regression tree (squared-error impurity, mean-leaf predictions).

struct TreeParams {
  int max_depth = -1;  // -1 = unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;
  int max_features = -1;  // -1 = all; forests subsample per split
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

class Tree {
 public:
  // Fits on the rows named by `idx` (with multiplicity) against `targets`,
  // which must be indexable by the same row ids as `data`.
  static Tree fit(const Dataset2D& data, std::span<const std::size_t> idx,
                  std::span<const double> targets, const TreeParams& params, Rng* rng);
  static Tree fit(const Dataset2D& data, const TreeParams& params);

  double predict_row(const double* features) const;
  std::vector<double> predict(const Dataset2D& data) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

// ---------------------------------------------------------------------------
// Random forest: bootstrapped trees with ceil(d/3) feature subsampling.

struct ForestParams {
  int n_estimators = 100;
  TreeParams tree;
  bool bootstrap = true;
};

class Forest {
 public:
  static Forest fit(const Dataset2D& data, const ForestParams& params, std::uint64_t seed);
  double predict_row(const double* features) const;
  std::vector<double> predict(const Dataset2D& data) const;
  const std::vector<Tree>& trees() const { return trees_; }
  std::vector<Tree>& mutable_trees() { return trees_; }

 private:
  std::vector<Tree> trees_;
};

// ---------------------------------------------------------------------------
// Gradient boosting on squared loss with shrinkage.

struct GbrParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  TreeParams tree{.max_depth = 3};
};

class Gbr {
 public:
  static Gbr fit(const Dataset2D& data, const GbrParams& params);
  double predict_row(const double* features) const;
  std::vector<double> predict(const Dataset2D& data) const;
  // Training MSE after each boosting round; non-increasing for lr <= 1.
  const std::vector<double>& training_mse() const { return training_mse_; }

  double init_value() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<Tree>& trees() const { return trees_; }
  void restore(double init, double lr, std::vector<Tree> trees);

 private:
  double init_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<Tree> trees_;
  std::vector<double> training_mse_;
};

// ---------------------------------------------------------------------------
// Histogram gradient boosting: quantile binning (<=256 bins) and
// gradient/hessian histograms; squared or Poisson deviance loss.

enum class HgbLoss { kSquared, kPoisson };

struct HgbParams {
  int max_iter = 100;
  double learning_rate = 0.1;
  int max_depth = -1;
  int min_samples_leaf = 1;
  int max_bins = 256;
  HgbLoss loss = HgbLoss::kSquared;
};

class Hgb {
 public:
  static Hgb fit(const Dataset2D& data, const HgbParams& params);
  double predict_row(const double* features) const;
  std::vector<double> predict(const Dataset2D& data) const;

  HgbLoss loss() const { return loss_; }
  double init_value() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<Tree>& trees() const { return trees_; }
  void restore(HgbLoss loss, double init, double lr, std::vector<Tree> trees);

 private:
  HgbLoss loss_ = HgbLoss::kSquared;
  double init_ = 0.0;  // raw (link-space) initial score
  double learning_rate_ = 0.1;
  std::vector<Tree> trees_;  // thresholds mapped back to raw feature space
};

// ---------------------------------------------------------------------------
// Ridge with optional non-negativity (projected coordinate descent).

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double predict_row(const double* features) const;
};

RidgeModel fit_ridge(const Dataset2D& data, double alpha, bool nonneg,
                     double tol = 1e-10, int max_sweeps = 200000);

// ---------------------------------------------------------------------------
// Stacking ensemble: out-of-fold meta-features, non-negative ridge combiner.

struct BaseSpec {
  enum class Kind { kForest, kGbr, kHgb } kind = Kind::kForest;
  ForestParams forest;
  GbrParams gbr;
  HgbParams hgb;

  static BaseSpec make_forest(ForestParams p);
  static BaseSpec make_gbr(GbrParams p);
  static BaseSpec make_hgb(HgbParams p);
};

struct StackSpec {
  std::vector<BaseSpec> bases;
  double ridge_alpha = 1.0;
  bool ridge_nonneg = true;
  bool passthrough = true;
  int folds = 5;
};

// Which fold each training row was assigned to, plus which rows each base
// model saw when producing out-of-fold predictions. Used by leakage tests.
struct FoldPlan {
  std::vector<int> fold_of;                         // per training row
  std::vector<std::vector<std::size_t>> fold_train;  // per fold: training rows
};

class StackedModel {
 public:
  static StackedModel fit(const Dataset2D& data, const StackSpec& spec, std::uint64_t seed,
                          FoldPlan* plan_out = nullptr);

  // Predictions are clamped to >= 0. Throws ValidationError on a feature-dim
  // mismatch with the training data.
  double predict_row(const double* features, std::size_t n_features) const;
  std::vector<double> predict(const Dataset2D& data) const;

  std::size_t input_dim() const { return input_dim_; }
  const StackSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  void save(std::ostream& out) const;
  static StackedModel load(std::istream& in);
  void save_file(const std::string& path) const;
  static StackedModel load_file(const std::string& path);

 private:
  using FittedBase = std::variant<Forest, Gbr, Hgb>;
  StackSpec spec_;
  std::uint64_t seed_ = 0;
  std::size_t input_dim_ = 0;
  std::vector<FittedBase> bases_;
  RidgeModel final_;
};

// ---------------------------------------------------------------------------
// Randomized hyperparameter search over the published grids, scored by
// k-fold cross-validated MAE of the full stack.

struct SearchSpace {
  std::vector<int> rf_n_estimators{100, 200, 300, 500, 700, 1000};
  std::vector<int> rf_max_depth{5, 10, 15, 20, 25, 30};
  std::vector<int> rf_min_samples_split{2, 5, 10, 15, 20};
  std::vector<int> rf_min_samples_leaf{1, 2, 4, 8};

  std::vector<int> gbr_n_estimators{100, 200, 400, 600, 800};
  std::vector<double> gbr_learning_rate{0.001, 0.01, 0.05, 0.1, 0.2};
  std::vector<int> gbr_max_depth{3, 5, 7, 10};
  std::vector<double> gbr_min_impurity_decrease{0.0, 0.001, 0.01, 0.1, 0.2};

  std::vector<int> hgb_max_iter{100, 200, 300, 400, 500};
  std::vector<double> hgb_learning_rate{0.001, 0.01, 0.05, 0.1, 0.2};
  std::vector<int> hgb_max_depth{3, 5, 7, 10, 15};
  // loss fixed to Poisson in the published grid; squared kept for rate targets
  HgbLoss hgb_loss = HgbLoss::kPoisson;

  std::vector<double> ridge_alpha{1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0};
  bool passthrough = true;

  int n_iter = 25;
  int folds = 5;
  std::uint64_t seed = 0;
};

struct SearchResult {
  StackSpec best;
  double cv_mae = 0.0;
  std::size_t best_draw = 0;  // index of the winning sample (first wins ties)
};

SearchResult random_search(const SearchSpace& space, const Dataset2D& data, int jobs = 1);

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual);

}  // namespace wermeter::regression

#endif  // WERMETER_REGRESSION_HPP
