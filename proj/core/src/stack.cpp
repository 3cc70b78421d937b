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
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wermeter/error.hpp"
#include "wermeter/parallel.hpp"
#include "wermeter/regression.hpp"

namespace wermeter::regression {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'W', 'M', 'S', '1'};

std::variant<Forest, Gbr, Hgb> fit_base(const Dataset2D& data, const BaseSpec& spec,
                                        std::uint64_t seed) {
  switch (spec.kind) {
    case BaseSpec::Kind::kForest:
      return Forest::fit(data, spec.forest, seed);
    case BaseSpec::Kind::kGbr:
      return Gbr::fit(data, spec.gbr);
    case BaseSpec::Kind::kHgb:
      return Hgb::fit(data, spec.hgb);
  }
  throw ValidationError("unknown base estimator kind");
}

double base_predict_row(const std::variant<Forest, Gbr, Hgb>& base, const double* features) {
  return std::visit([&](const auto& model) { return model.predict_row(features); }, base);
}

Dataset2D subset(const Dataset2D& data, const std::vector<std::size_t>& rows) {
  Dataset2D out;
  out.n_cols = data.n_cols;
  for (std::size_t r : rows) {
    out.x.insert(out.x.end(), data.row(r), data.row(r) + data.n_cols);
    out.y.push_back(data.y[r]);
    ++out.n_rows;
  }
  return out;
}

}  // namespace

BaseSpec BaseSpec::make_forest(ForestParams p) {
  BaseSpec s;
  s.kind = Kind::kForest;
  s.forest = p;
  return s;
}

BaseSpec BaseSpec::make_gbr(GbrParams p) {
  BaseSpec s;
  s.kind = Kind::kGbr;
  s.gbr = p;
  return s;
}

BaseSpec BaseSpec::make_hgb(HgbParams p) {
  BaseSpec s;
  s.kind = Kind::kHgb;
  s.hgb = p;
  return s;
}

StackedModel StackedModel::fit(const Dataset2D& data, const StackSpec& spec,
                               std::uint64_t seed, FoldPlan* plan_out) {
  data.validate();
  if (spec.bases.empty()) throw ValidationError("stack: needs at least one base estimator");
  if (spec.folds < 2) throw ValidationError("stack: folds must be >= 2");
  if (data.n_rows < static_cast<std::size_t>(spec.folds)) {
    throw ValidationError("stack: fewer samples than folds");
  }

  const std::size_t n = data.n_rows;
  const std::size_t n_bases = spec.bases.size();
  const Rng root(seed);

  // Deterministic fold assignment: shuffled order, round-robin folds.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng = root.stream(0xF01D);
  fold_rng.shuffle(order);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % spec.folds);

  FoldPlan plan;
  plan.fold_of = fold_of;
  plan.fold_train.resize(static_cast<std::size_t>(spec.folds));
  for (int f = 0; f < spec.folds; ++f) {
    for (std::size_t r = 0; r < n; ++r) {
      if (fold_of[r] != f) plan.fold_train[static_cast<std::size_t>(f)].push_back(r);
    }
  }

  // Out-of-fold meta-features: each row is predicted by bases that never saw it.
  std::vector<double> meta(n * n_bases, 0.0);
  for (int f = 0; f < spec.folds; ++f) {
    const auto& train_rows = plan.fold_train[static_cast<std::size_t>(f)];
    const Dataset2D fold_data = subset(data, train_rows);
    for (std::size_t b = 0; b < n_bases; ++b) {
      const auto base = fit_base(fold_data, spec.bases[b],
                                 root.stream(1 + static_cast<std::uint64_t>(f) * n_bases + b)
                                     .next_u64());
      for (std::size_t r = 0; r < n; ++r) {
        if (fold_of[r] == f) meta[r * n_bases + b] = base_predict_row(base, data.row(r));
      }
    }
  }

  // Final non-negative ridge on [meta || raw features].
  const std::size_t final_dim = n_bases + (spec.passthrough ? data.n_cols : 0);
  Dataset2D final_data;
  final_data.n_cols = final_dim;
  for (std::size_t r = 0; r < n; ++r) {
    final_data.x.insert(final_data.x.end(), meta.begin() + r * n_bases,
                        meta.begin() + (r + 1) * n_bases);
    if (spec.passthrough) {
      final_data.x.insert(final_data.x.end(), data.row(r), data.row(r) + data.n_cols);
    }
    final_data.y.push_back(data.y[r]);
    ++final_data.n_rows;
  }

  StackedModel model;
  model.spec_ = spec;
  model.seed_ = seed;
  model.input_dim_ = data.n_cols;
  model.final_ = fit_ridge(final_data, spec.ridge_alpha, spec.ridge_nonneg);

  // Bases are refit on the full data for inference.
  for (std::size_t b = 0; b < n_bases; ++b) {
    model.bases_.push_back(
        fit_base(data, spec.bases[b], root.stream(0xF111 + b).next_u64()));
  }

  if (plan_out != nullptr) *plan_out = std::move(plan);
  return model;
}

double StackedModel::predict_row(const double* features, std::size_t n_features) const {
  if (n_features != input_dim_) {
    throw ValidationError("stack predict: expected " + std::to_string(input_dim_) +
                          " features, got " + std::to_string(n_features));
  }
  std::vector<double> final_input;
  final_input.reserve(bases_.size() + (spec_.passthrough ? input_dim_ : 0));
  for (const auto& base : bases_) final_input.push_back(base_predict_row(base, features));
  if (spec_.passthrough) final_input.insert(final_input.end(), features, features + input_dim_);
  const double raw = final_.predict_row(final_input.data());
  return std::max(0.0, raw);  // count/rate targets are nonnegative
}

std::vector<double> StackedModel::predict(const Dataset2D& data) const {
  std::vector<double> out(data.n_rows);
  for (std::size_t i = 0; i < data.n_rows; ++i) {
    out[i] = predict_row(data.row(i), data.n_cols);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: JSON header + packed little-endian tree blob.

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("model artifact truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }
std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_u32(in)); }

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u32(out, static_cast<std::uint32_t>(bits & 0xFFFFFFFFULL));
  put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

double get_f64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  const std::uint64_t bits = lo | (hi << 32);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_trees(std::ostream& out, const std::vector<Tree>& trees, json& meta) {
  meta["trees"] = json::array();
  for (const auto& tree : trees) {
    meta["trees"].push_back(tree.nodes().size());
    for (const auto& node : tree.nodes()) {
      put_i32(out, node.feature);
      put_f64(out, node.threshold);
      put_i32(out, node.left);
      put_i32(out, node.right);
      put_f64(out, node.value);
    }
  }
}

json tree_params_to_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf},
          {"min_impurity_decrease", p.min_impurity_decrease},
          {"max_features", p.max_features}};
}

TreeParams tree_params_from_json(const json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.min_impurity_decrease = j.at("min_impurity_decrease").get<double>();
  p.max_features = j.at("max_features").get<int>();
  return p;
}

}  // namespace

void StackedModel::save(std::ostream& out) const {
  json header;
  header["format"] = "wermeter-stack";
  header["version"] = 1;
  header["seed"] = seed_;
  header["input_dim"] = input_dim_;
  header["spec"] = {{"ridge_alpha", spec_.ridge_alpha},
                    {"ridge_nonneg", spec_.ridge_nonneg},
                    {"passthrough", spec_.passthrough},
                    {"folds", spec_.folds}};
  header["final"] = {{"weights", final_.weights}, {"intercept", final_.intercept}};
  header["bases"] = json::array();

  std::ostringstream blob;
  for (std::size_t b = 0; b < bases_.size(); ++b) {
    json meta;
    const BaseSpec& spec = spec_.bases[b];
    switch (spec.kind) {
      case BaseSpec::Kind::kForest: {
        meta["kind"] = "forest";
        meta["n_estimators"] = spec.forest.n_estimators;
        meta["bootstrap"] = spec.forest.bootstrap;
        meta["tree"] = tree_params_to_json(spec.forest.tree);
        write_trees(blob, std::get<Forest>(bases_[b]).trees(), meta);
        break;
      }
      case BaseSpec::Kind::kGbr: {
        const auto& model = std::get<Gbr>(bases_[b]);
        meta["kind"] = "gbr";
        meta["n_estimators"] = spec.gbr.n_estimators;
        meta["learning_rate"] = model.learning_rate();
        meta["init"] = model.init_value();
        meta["tree"] = tree_params_to_json(spec.gbr.tree);
        write_trees(blob, model.trees(), meta);
        break;
      }
      case BaseSpec::Kind::kHgb: {
        const auto& model = std::get<Hgb>(bases_[b]);
        meta["kind"] = "hgb";
        meta["max_iter"] = spec.hgb.max_iter;
        meta["max_depth"] = spec.hgb.max_depth;
        meta["min_samples_leaf"] = spec.hgb.min_samples_leaf;
        meta["max_bins"] = spec.hgb.max_bins;
        meta["learning_rate"] = model.learning_rate();
        meta["init"] = model.init_value();
        meta["loss"] = model.loss() == HgbLoss::kPoisson ? "poisson" : "squared";
        write_trees(blob, model.trees(), meta);
        break;
      }
    }
    header["bases"].push_back(std::move(meta));
  }

  const std::string header_str = header.dump();
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(header_str.size()));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  const std::string blob_str = blob.str();
  out.write(blob_str.data(), static_cast<std::streamsize>(blob_str.size()));
}

StackedModel StackedModel::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad model artifact magic");
  }
  const std::uint32_t header_len = get_u32(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), header_len);
  if (!in) throw FormatError("model artifact truncated in header");
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model artifact header is not valid JSON: ") + e.what());
  }
  if (header.value("format", "") != "wermeter-stack") {
    throw FormatError("model artifact has unknown format tag");
  }

  StackedModel model;
  model.seed_ = header.at("seed").get<std::uint64_t>();
  model.input_dim_ = header.at("input_dim").get<std::size_t>();
  model.spec_.ridge_alpha = header.at("spec").at("ridge_alpha").get<double>();
  model.spec_.ridge_nonneg = header.at("spec").at("ridge_nonneg").get<bool>();
  model.spec_.passthrough = header.at("spec").at("passthrough").get<bool>();
  model.spec_.folds = header.at("spec").at("folds").get<int>();
  model.final_.weights = header.at("final").at("weights").get<std::vector<double>>();
  model.final_.intercept = header.at("final").at("intercept").get<double>();

  for (const auto& meta : header.at("bases")) {
    const std::string kind = meta.at("kind").get<std::string>();
    std::vector<Tree> trees;
    for (const auto& count : meta.at("trees")) {
      Tree tree;
      auto& nodes = tree.mutable_nodes();
      nodes.resize(count.get<std::size_t>());
      for (auto& node : nodes) {
        node.feature = get_i32(in);
        node.threshold = get_f64(in);
        node.left = get_i32(in);
        node.right = get_i32(in);
        node.value = get_f64(in);
      }
      trees.push_back(std::move(tree));
    }
    if (kind == "forest") {
      BaseSpec spec;
      spec.kind = BaseSpec::Kind::kForest;
      spec.forest.n_estimators = meta.at("n_estimators").get<int>();
      spec.forest.bootstrap = meta.at("bootstrap").get<bool>();
      spec.forest.tree = tree_params_from_json(meta.at("tree"));
      Forest forest;
      forest.mutable_trees() = std::move(trees);
      model.spec_.bases.push_back(spec);
      model.bases_.emplace_back(std::move(forest));
    } else if (kind == "gbr") {
      BaseSpec spec;
      spec.kind = BaseSpec::Kind::kGbr;
      spec.gbr.n_estimators = meta.at("n_estimators").get<int>();
      spec.gbr.learning_rate = meta.at("learning_rate").get<double>();
      spec.gbr.tree = tree_params_from_json(meta.at("tree"));
      Gbr gbr;
      gbr.restore(meta.at("init").get<double>(), meta.at("learning_rate").get<double>(),
                  std::move(trees));
      model.spec_.bases.push_back(spec);
      model.bases_.emplace_back(std::move(gbr));
    } else if (kind == "hgb") {
      BaseSpec spec;
      spec.kind = BaseSpec::Kind::kHgb;
      spec.hgb.max_iter = meta.at("max_iter").get<int>();
      spec.hgb.max_depth = meta.at("max_depth").get<int>();
      spec.hgb.min_samples_leaf = meta.at("min_samples_leaf").get<int>();
      spec.hgb.max_bins = meta.at("max_bins").get<int>();
      spec.hgb.learning_rate = meta.at("learning_rate").get<double>();
      const HgbLoss loss =
          meta.at("loss").get<std::string>() == "poisson" ? HgbLoss::kPoisson : HgbLoss::kSquared;
      spec.hgb.loss = loss;
      Hgb hgb;
      hgb.restore(loss, meta.at("init").get<double>(), meta.at("learning_rate").get<double>(),
                  std::move(trees));
      model.spec_.bases.push_back(spec);
      model.bases_.emplace_back(std::move(hgb));
    } else {
      throw FormatError("model artifact has unknown base kind '" + kind + "'");
    }
  }
  return model;
}

void StackedModel::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open model artifact for writing: " + path);
  save(out);
}

StackedModel StackedModel::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model artifact: " + path);
  return load(in);
}

// ---------------------------------------------------------------------------
// Randomized hyperparameter search

SearchResult random_search(const SearchSpace& space, const Dataset2D& data, int jobs) {
  data.validate();
  if (space.n_iter < 1) throw ValidationError("random_search: n_iter must be >= 1");
  if (space.folds < 2) throw ValidationError("random_search: folds must be >= 2");

  const Rng root(space.seed);

  // CV folds shared by all candidates (paired comparison).
  const std::size_t n = data.n_rows;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng = root.stream(0xCF);
  fold_rng.shuffle(order);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % space.folds);

  auto pick = [](Rng& rng, const auto& grid) { return grid[rng.uniform_index(grid.size())]; };

  std::vector<StackSpec> candidates;
  candidates.reserve(static_cast<std::size_t>(space.n_iter));
  for (int draw = 0; draw < space.n_iter; ++draw) {
    Rng rng = root.stream(static_cast<std::uint64_t>(draw) + 1);
    StackSpec spec;
    ForestParams rf;
    rf.n_estimators = pick(rng, space.rf_n_estimators);
    rf.tree.max_depth = pick(rng, space.rf_max_depth);
    rf.tree.min_samples_split = pick(rng, space.rf_min_samples_split);
    rf.tree.min_samples_leaf = pick(rng, space.rf_min_samples_leaf);
    GbrParams gbr;
    gbr.n_estimators = pick(rng, space.gbr_n_estimators);
    gbr.learning_rate = pick(rng, space.gbr_learning_rate);
    gbr.tree.max_depth = pick(rng, space.gbr_max_depth);
    gbr.tree.min_impurity_decrease = pick(rng, space.gbr_min_impurity_decrease);
    HgbParams hgb;
    hgb.max_iter = pick(rng, space.hgb_max_iter);
    hgb.learning_rate = pick(rng, space.hgb_learning_rate);
    hgb.max_depth = pick(rng, space.hgb_max_depth);
    hgb.loss = space.hgb_loss;
    spec.bases = {BaseSpec::make_forest(rf), BaseSpec::make_gbr(gbr), BaseSpec::make_hgb(hgb)};
    spec.ridge_alpha = pick(rng, space.ridge_alpha);
    spec.ridge_nonneg = true;
    spec.passthrough = space.passthrough;
    spec.folds = space.folds;
    candidates.push_back(std::move(spec));
  }

  std::vector<double> scores(candidates.size(),
                             std::numeric_limits<double>::infinity());
  parallel_for(candidates.size(), jobs, [&](std::size_t c) {
    double total = 0.0;
    for (int f = 0; f < space.folds; ++f) {
      Dataset2D train, test;
      train.n_cols = test.n_cols = data.n_cols;
      for (std::size_t r = 0; r < n; ++r) {
        auto& dst = fold_of[r] == f ? test : train;
        dst.x.insert(dst.x.end(), data.row(r), data.row(r) + data.n_cols);
        dst.y.push_back(data.y[r]);
        ++dst.n_rows;
      }
      const StackedModel model = StackedModel::fit(train, candidates[c], space.seed);
      total += mean_absolute_error(model.predict(test), test.y);
    }
    scores[c] = total / static_cast<double>(space.folds);
  });

  SearchResult result;
  result.best_draw = 0;
  result.cv_mae = scores[0];
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] < result.cv_mae) {  // first sampled wins ties
      result.cv_mae = scores[c];
      result.best_draw = c;
    }
  }
  result.best = candidates[result.best_draw];
  return result;
}

}  // namespace wermeter::regression
