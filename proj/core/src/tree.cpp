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
#include "wermeter/regression.hpp"

namespace wermeter::regression {

void Dataset2D::push_row(std::span<const double> features, double target) {
  if (n_rows == 0 && n_cols == 0) n_cols = features.size();
  if (features.size() != n_cols) {
    throw ValidationError("push_row: expected " + std::to_string(n_cols) + " features, got " +
                          std::to_string(features.size()));
  }
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(target);
  ++n_rows;
}

void Dataset2D::validate(bool require_nonneg_targets) const {
  if (n_rows == 0 || n_cols == 0) throw ValidationError("dataset: empty");
  if (x.size() != n_rows * n_cols || y.size() != n_rows) {
    throw ValidationError("dataset: shape mismatch");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("dataset: non-finite feature");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("dataset: non-finite target");
    if (require_nonneg_targets && v < 0.0) {
      throw ValidationError("dataset: negative target not allowed here");
    }
  }
}

namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;  // per-node impurity decrease, unweighted
};

struct Builder {
  const Dataset2D& data;
  std::span<const double> targets;
  const TreeParams& params;
  Rng* rng;
  std::size_t n_total;
  std::vector<TreeNode> nodes;

  // Scratch reused across nodes.
  std::vector<std::size_t> feature_pool;

  double target_of(std::size_t row) const { return targets[row]; }

  // Features considered at this split: all, or a random subset of
  // max_features drawn without replacement (lowest-index order preserved
  // for deterministic tie-breaking).
  std::vector<std::size_t> candidate_features() {
    const std::size_t d = data.n_cols;
    if (params.max_features < 0 || static_cast<std::size_t>(params.max_features) >= d ||
        rng == nullptr) {
      std::vector<std::size_t> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    feature_pool.resize(d);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    const auto k = static_cast<std::size_t>(params.max_features);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng->uniform_index(d - i);
      std::swap(feature_pool[i], feature_pool[j]);
    }
    std::vector<std::size_t> picked(feature_pool.begin(), feature_pool.begin() + k);
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  SplitChoice best_split(std::vector<std::size_t>& idx) {
    const std::size_t n = idx.size();
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r : idx) {
      const double t = target_of(r);
      sum += t;
      sumsq += t * t;
    }
    const double node_imp = std::max(0.0, sumsq / n - (sum / n) * (sum / n));
    SplitChoice best;
    if (node_imp <= 0.0) return best;

    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    std::vector<std::size_t> sorted = idx;
    for (std::size_t f : candidate_features()) {
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return data.at(a, f) < data.at(b, f);
      });
      double left_sum = 0.0, left_sumsq = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        const double t = target_of(sorted[k - 1]);
        left_sum += t;
        left_sumsq += t * t;
        if (k < min_leaf || n - k < min_leaf) continue;
        const double lo = data.at(sorted[k - 1], f);
        const double hi = data.at(sorted[k], f);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(n - k);
        const double right_sum = sum - left_sum;
        const double right_sumsq = sumsq - left_sumsq;
        const double imp_l = std::max(0.0, left_sumsq / nl - (left_sum / nl) * (left_sum / nl));
        const double imp_r =
            std::max(0.0, right_sumsq / nr - (right_sum / nr) * (right_sum / nr));
        const double gain = node_imp - (nl * imp_l + nr * imp_r) / static_cast<double>(n);
        if (gain > best.gain + 1e-15) {
          best.found = true;
          best.feature = f;
          best.threshold = (lo + hi) / 2.0;
          best.gain = gain;
        }
      }
    }
    // Weighted decrease threshold, sklearn-style.
    if (best.found) {
      const double weighted = best.gain * static_cast<double>(n) / static_cast<double>(n_total);
      if (weighted < params.min_impurity_decrease) best.found = false;
    }
    return best;
  }

  std::int32_t build(std::vector<std::size_t> idx, int depth) {
    const std::size_t n = idx.size();
    double sum = 0.0;
    for (std::size_t r : idx) sum += target_of(r);
    const double mean = sum / static_cast<double>(n);

    const auto leaf = [&] {
      TreeNode node;
      node.value = mean;
      nodes.push_back(node);
      return static_cast<std::int32_t>(nodes.size() - 1);
    };

    if ((params.max_depth >= 0 && depth >= params.max_depth) ||
        n < static_cast<std::size_t>(params.min_samples_split) ||
        n < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
      return leaf();
    }
    const SplitChoice split = best_split(idx);
    if (!split.found) return leaf();

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t r : idx) {
      (data.at(r, split.feature) <= split.threshold ? left_idx : right_idx).push_back(r);
    }
    idx.clear();
    idx.shrink_to_fit();

    TreeNode node;
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    node.value = mean;
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

Tree Tree::fit(const Dataset2D& data, std::span<const std::size_t> idx,
               std::span<const double> targets, const TreeParams& params, Rng* rng) {
  if (idx.empty()) throw ValidationError("tree fit: no rows");
  if (params.min_samples_leaf < 1 || params.min_samples_split < 2) {
    throw ValidationError("tree fit: constraints must be positive");
  }
  Builder builder{data, targets, params, rng, idx.size(), {}, {}};
  builder.build(std::vector<std::size_t>(idx.begin(), idx.end()), 0);
  Tree tree;
  tree.nodes_ = std::move(builder.nodes);
  return tree;
}

Tree Tree::fit(const Dataset2D& data, const TreeParams& params) {
  data.validate();
  std::vector<std::size_t> idx(data.n_rows);
  std::iota(idx.begin(), idx.end(), 0);
  return fit(data, idx, data.y, params, nullptr);
}

double Tree::predict_row(const double* features) const {
  std::size_t at = 0;
  for (;;) {
    const TreeNode& node = nodes_[at];
    if (node.feature < 0 || node.left < 0) return node.value;
    at = features[node.feature] <= node.threshold ? static_cast<std::size_t>(node.left)
                                                  : static_cast<std::size_t>(node.right);
  }
}

std::vector<double> Tree::predict(const Dataset2D& data) const {
  std::vector<double> out(data.n_rows);
  for (std::size_t i = 0; i < data.n_rows; ++i) out[i] = predict_row(data.row(i));
  return out;
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw ValidationError("mean_absolute_error: size mismatch or empty");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += std::abs(predicted[i] - actual[i]);
  return s / static_cast<double>(predicted.size());
}

}  // namespace wermeter::regression
