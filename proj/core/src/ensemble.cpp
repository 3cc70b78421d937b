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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wermeter/error.hpp"
#include "wermeter/parallel.hpp"
#include "wermeter/regression.hpp"

namespace wermeter::regression {

// ---------------------------------------------------------------------------
// Random forest

Forest Forest::fit(const Dataset2D& data, const ForestParams& params, std::uint64_t seed) {
  data.validate();
  if (params.n_estimators < 1) throw ValidationError("forest: n_estimators must be >= 1");

  TreeParams tree_params = params.tree;
  if (tree_params.max_features < 0) {
    tree_params.max_features =
        static_cast<int>((data.n_cols + 2) / 3);  // ceil(d/3)
  }

  const Rng root(seed);
  Forest forest;
  forest.trees_.resize(static_cast<std::size_t>(params.n_estimators));
  parallel_for(forest.trees_.size(), 0, [&](std::size_t t) {
    Rng rng = root.stream(t);
    std::vector<std::size_t> idx(data.n_rows);
    if (params.bootstrap) {
      for (auto& i : idx) i = rng.uniform_index(data.n_rows);
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    forest.trees_[t] = Tree::fit(data, idx, data.y, tree_params, &rng);
  });
  return forest;
}

double Forest::predict_row(const double* features) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict_row(features);
  return sum / static_cast<double>(trees_.size());
}

std::vector<double> Forest::predict(const Dataset2D& data) const {
  std::vector<double> out(data.n_rows);
  for (std::size_t i = 0; i < data.n_rows; ++i) out[i] = predict_row(data.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// Gradient boosting (squared loss)

Gbr Gbr::fit(const Dataset2D& data, const GbrParams& params) {
  data.validate();
  if (params.learning_rate <= 0.0) throw ValidationError("gbr: learning_rate must be > 0");
  if (params.n_estimators < 0) throw ValidationError("gbr: n_estimators must be >= 0");

  Gbr model;
  model.learning_rate_ = params.learning_rate;
  model.init_ = std::accumulate(data.y.begin(), data.y.end(), 0.0) /
                static_cast<double>(data.n_rows);

  std::vector<double> pred(data.n_rows, model.init_);
  std::vector<double> residual(data.n_rows);
  std::vector<std::size_t> all(data.n_rows);
  std::iota(all.begin(), all.end(), 0);

  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < data.n_rows; ++i) residual[i] = data.y[i] - pred[i];
    Tree tree = Tree::fit(data, all, residual, params.tree, nullptr);
    double mse = 0.0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      pred[i] += params.learning_rate * tree.predict_row(data.row(i));
      const double e = data.y[i] - pred[i];
      mse += e * e;
    }
    model.trees_.push_back(std::move(tree));
    model.training_mse_.push_back(mse / static_cast<double>(data.n_rows));
  }
  return model;
}

double Gbr::predict_row(const double* features) const {
  double score = init_;
  for (const auto& tree : trees_) score += learning_rate_ * tree.predict_row(features);
  return score;
}

std::vector<double> Gbr::predict(const Dataset2D& data) const {
  std::vector<double> out(data.n_rows);
  for (std::size_t i = 0; i < data.n_rows; ++i) out[i] = predict_row(data.row(i));
  return out;
}

void Gbr::restore(double init, double lr, std::vector<Tree> trees) {
  init_ = init;
  learning_rate_ = lr;
  trees_ = std::move(trees);
}

// ---------------------------------------------------------------------------
// Histogram gradient boosting

namespace {

struct BinnedFeatures {
  // Per feature: ascending cut points; bin b holds values in
  // (cuts[b-1], cuts[b]]. Bin count is cuts.size()+1.
  std::vector<std::vector<double>> cuts;
  std::vector<std::vector<std::uint16_t>> bins;  // [feature][row]
};

BinnedFeatures bin_features(const Dataset2D& data, int max_bins) {
  BinnedFeatures out;
  out.cuts.resize(data.n_cols);
  out.bins.assign(data.n_cols, std::vector<std::uint16_t>(data.n_rows));
  for (std::size_t f = 0; f < data.n_cols; ++f) {
    std::vector<double> values(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) values[i] = data.at(i, f);
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    auto& cuts = out.cuts[f];
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
      // One bin per distinct value; cuts at midpoints.
      for (std::size_t k = 1; k < distinct.size(); ++k) {
        cuts.push_back((distinct[k - 1] + distinct[k]) / 2.0);
      }
    } else {
      // Quantile cut points over the sorted value stream.
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      for (int b = 1; b < max_bins; ++b) {
        const auto pos = static_cast<std::size_t>(
            static_cast<double>(b) * static_cast<double>(sorted.size()) / max_bins);
        const double cut = sorted[std::min(pos, sorted.size() - 1)];
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
      }
    }
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      const auto it = std::lower_bound(cuts.begin(), cuts.end(), values[i]);
      out.bins[f][i] = static_cast<std::uint16_t>(it - cuts.begin());
    }
  }
  return out;
}

struct HgbTreeBuilder {
  const BinnedFeatures& binned;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const HgbParams& params;
  std::vector<TreeNode> nodes;

  std::int32_t build(std::vector<std::size_t> idx, int depth) {
    double g_sum = 0.0, h_sum = 0.0;
    for (std::size_t r : idx) {
      g_sum += grad[r];
      h_sum += hess[r];
    }
    const double leaf_value = -g_sum / (h_sum + 1e-16);

    const auto leaf = [&] {
      TreeNode node;
      node.value = leaf_value;
      nodes.push_back(node);
      return static_cast<std::int32_t>(nodes.size() - 1);
    };
    const std::size_t n = idx.size();
    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    if ((params.max_depth >= 0 && depth >= params.max_depth) || n < 2 * min_leaf || n < 2) {
      return leaf();
    }

    // Best split by gradient gain: GL^2/HL + GR^2/HR - G^2/H.
    const double parent_score = g_sum * g_sum / (h_sum + 1e-16);
    bool found = false;
    std::size_t best_feature = 0;
    std::uint16_t best_bin = 0;
    double best_gain = 0.0;
    for (std::size_t f = 0; f < binned.bins.size(); ++f) {
      const std::size_t n_bins = binned.cuts[f].size() + 1;
      if (n_bins < 2) continue;
      std::vector<double> g_hist(n_bins, 0.0), h_hist(n_bins, 0.0);
      std::vector<std::size_t> c_hist(n_bins, 0);
      for (std::size_t r : idx) {
        const std::uint16_t b = binned.bins[f][r];
        g_hist[b] += grad[r];
        h_hist[b] += hess[r];
        ++c_hist[b];
      }
      double gl = 0.0, hl = 0.0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b + 1 < n_bins; ++b) {
        gl += g_hist[b];
        hl += h_hist[b];
        cl += c_hist[b];
        if (cl < min_leaf || n - cl < min_leaf || cl == 0 || cl == n) continue;
        const double gr = g_sum - gl;
        const double hr = h_sum - hl;
        const double gain =
            gl * gl / (hl + 1e-16) + gr * gr / (hr + 1e-16) - parent_score;
        if (gain > best_gain + 1e-15) {
          found = true;
          best_feature = f;
          best_bin = static_cast<std::uint16_t>(b);
          best_gain = gain;
        }
      }
    }
    if (!found) return leaf();

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t r : idx) {
      (binned.bins[best_feature][r] <= best_bin ? left_idx : right_idx).push_back(r);
    }
    idx.clear();
    idx.shrink_to_fit();

    TreeNode node;
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = binned.cuts[best_feature][best_bin];  // raw-space threshold
    node.value = leaf_value;
    nodes.push_back(node);
    const auto self = static_cast<std::int32_t>(nodes.size() - 1);
    const std::int32_t l = build(std::move(left_idx), depth + 1);
    const std::int32_t r = build(std::move(right_idx), depth + 1);
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
  }
};

}  // namespace

Hgb Hgb::fit(const Dataset2D& data, const HgbParams& params) {
  data.validate(params.loss == HgbLoss::kPoisson);
  if (params.learning_rate <= 0.0) throw ValidationError("hgb: learning_rate must be > 0");
  if (params.max_bins < 2 || params.max_bins > 256) {
    throw ValidationError("hgb: max_bins must be in [2, 256]");
  }

  Hgb model;
  model.loss_ = params.loss;
  model.learning_rate_ = params.learning_rate;
  const double y_mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) /
                        static_cast<double>(data.n_rows);
  model.init_ = params.loss == HgbLoss::kPoisson ? std::log(y_mean + 1e-8) : y_mean;

  const BinnedFeatures binned = bin_features(data, params.max_bins);

  std::vector<double> score(data.n_rows, model.init_);
  std::vector<double> grad(data.n_rows), hess(data.n_rows);
  std::vector<std::size_t> all(data.n_rows);
  std::iota(all.begin(), all.end(), 0);

  for (int m = 0; m < params.max_iter; ++m) {
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      if (params.loss == HgbLoss::kPoisson) {
        const double lambda = std::exp(score[i]);
        grad[i] = lambda - data.y[i];
        hess[i] = lambda;
      } else {
        grad[i] = score[i] - data.y[i];
        hess[i] = 1.0;
      }
    }
    HgbTreeBuilder builder{binned, grad, hess, params, {}};
    builder.build(all, 0);
    Tree tree;
    tree.mutable_nodes() = std::move(builder.nodes);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      score[i] += params.learning_rate * tree.predict_row(data.row(i));
    }
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

double Hgb::predict_row(const double* features) const {
  double score = init_;
  for (const auto& tree : trees_) score += learning_rate_ * tree.predict_row(features);
  return loss_ == HgbLoss::kPoisson ? std::exp(score) : score;
}

std::vector<double> Hgb::predict(const Dataset2D& data) const {
  std::vector<double> out(data.n_rows);
  for (std::size_t i = 0; i < data.n_rows; ++i) out[i] = predict_row(data.row(i));
  return out;
}

void Hgb::restore(HgbLoss loss, double init, double lr, std::vector<Tree> trees) {
  loss_ = loss;
  init_ = init;
  learning_rate_ = lr;
  trees_ = std::move(trees);
}

}  // namespace wermeter::regression
