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

#include "wermeter/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "wermeter/error.hpp"
#include "wermeter/rng.hpp"

namespace wermeter::harness {

namespace {

using corpus::Corpus;
using corpus::CorpusKind;
using corpus::UtteranceRecord;
using regression::Dataset2D;

bool is_char_kind(TargetKind k) { return k == TargetKind::kCharCount || k == TargetKind::kCer; }

void assert_trainable(const std::vector<const Corpus*>& corpora) {
  for (const auto* c : corpora) {
    if (c->kind == CorpusKind::kWild) {
      throw ValidationError("training refused: corpus '" + c->name + "' is wild-kind");
    }
  }
}

double target_of(const UtteranceRecord& rec, const std::string& model,
                 const ExperimentConfig& cfg) {
  if (!rec.reference) {
    throw ValidationError("record '" + rec.id + "' has no reference to compute targets");
  }
  const auto hyp = rec.hypotheses.find(model);
  if (hyp == rec.hypotheses.end()) {
    throw ValidationError("record '" + rec.id + "' has no hypothesis for model '" + model +
                          "'");
  }
  const auto stats = is_char_kind(cfg.target_kind)
                         ? metrics::char_align(*rec.reference, hyp->second)
                         : metrics::word_align(*rec.reference, hyp->second);
  switch (cfg.target_kind) {
    case TargetKind::kWordCount:
    case TargetKind::kCharCount:
      return static_cast<double>(stats.errors());
    case TargetKind::kWer:
    case TargetKind::kCer:
      return metrics::rate_from(stats);
    case TargetKind::kSubCount:
      return static_cast<double>(stats.substitutions);
    case TargetKind::kInsCount:
      return static_cast<double>(stats.insertions);
    case TargetKind::kDelCount:
      return static_cast<double>(stats.deletions);
  }
  throw ValidationError("unknown target kind");
}

// Length used to turn predicted counts into approximated rates.
double denominator_of(const UtteranceRecord& rec, const std::string& model,
                      const ExperimentConfig& cfg) {
  const auto hyp = rec.hypotheses.find(model);
  const std::string& text = cfg.norm_denominator == metrics::Denominator::kHypothesis
                                ? hyp->second
                                : rec.reference.value_or("");
  const std::string norm = metrics::normalize(text);
  const double len = is_char_kind(cfg.target_kind)
                         ? static_cast<double>(norm.size())
                         : static_cast<double>(metrics::tokenize(norm).size());
  return len > 0.0 ? len : 1.0;
}

double actual_rate_of(const UtteranceRecord& rec, const std::string& model,
                      const ExperimentConfig& cfg) {
  const auto hyp = rec.hypotheses.find(model);
  const auto stats = is_char_kind(cfg.target_kind)
                         ? metrics::char_align(*rec.reference, hyp->second)
                         : metrics::word_align(*rec.reference, hyp->second);
  return metrics::rate_from(stats);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct SplitCorpora {
  std::vector<Corpus> train;
  std::vector<Corpus> test;
};

// Per-corpus 80/20 splits; deterministic per (seed, corpus index), so any
// two variants sharing a seed see identical splits.
SplitCorpora split_benchmarks(const std::vector<Corpus>& benchmarks, double test_fraction,
                              std::uint64_t seed) {
  SplitCorpora out;
  const Rng root(seed);
  for (std::size_t i = 0; i < benchmarks.size(); ++i) {
    Rng rng = root.stream(0x5917 + i);
    auto [train, test] = corpus::split_train_test(benchmarks[i], test_fraction, rng.next_u64());
    out.train.push_back(std::move(train));
    out.test.push_back(std::move(test));
  }
  return out;
}

Dataset2D cap_rows(const Dataset2D& data, std::size_t cap, std::uint64_t seed) {
  if (cap >= data.n_rows) return data;
  std::vector<std::size_t> order(data.n_rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  Dataset2D out;
  out.n_cols = data.n_cols;
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t r = order[i];
    out.x.insert(out.x.end(), data.row(r), data.row(r) + data.n_cols);
    out.y.push_back(data.y[r]);
    ++out.n_rows;
  }
  return out;
}

}  // namespace

std::string to_string(EvalCase c) {
  switch (c) {
    case EvalCase::kI:
      return "I";
    case EvalCase::kII:
      return "II";
    case EvalCase::kIII:
      return "III";
    case EvalCase::kIV:
      return "IV";
  }
  return "?";
}

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::kWordCount:
      return "word_count";
    case TargetKind::kCharCount:
      return "char_count";
    case TargetKind::kWer:
      return "wer";
    case TargetKind::kCer:
      return "cer";
    case TargetKind::kSubCount:
      return "sub_count";
    case TargetKind::kInsCount:
      return "ins_count";
    case TargetKind::kDelCount:
      return "del_count";
  }
  return "?";
}

std::string condition_of(EvalCase c) {
  switch (c) {
    case EvalCase::kI:
      return "IID";
    case EvalCase::kII:
      return "OOD-M";
    case EvalCase::kIII:
      return "OOD-D";
    case EvalCase::kIV:
      return "OOD-D+M";
  }
  return "?";
}

void EvaluationReport::append(const EvaluationReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  for (const auto& [k, v] : other.metadata) metadata.emplace(k, v);
}

std::vector<AggregateRow> EvaluationReport::aggregates() const {
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<double>>
      groups;
  for (const auto& row : rows) {
    groups[{row.experiment, row.variant, row.condition, row.dataset}].push_back(row.mae);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, values] : groups) {
    AggregateRow agg;
    std::tie(agg.experiment, agg.variant, agg.condition, agg.dataset) = key;
    agg.runs = values.size();
    agg.mean = mean_of(values);
    if (values.size() >= 2) {
      double ss = 0.0;
      for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
      agg.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    out.push_back(std::move(agg));
  }
  return out;
}

FeatureTable build_feature_table(const std::vector<const Corpus*>& corpora,
                                 const std::string& model, const ExperimentConfig& cfg,
                                 const proxy::FeatureSpec& spec,
                                 const embeddings::EmbeddingStore& store) {
  FeatureTable table;
  for (const auto* c : corpora) {
    for (const auto& rec : c->records) {
      const auto z = proxy::assemble_features(rec, model, spec, store);
      table.data.push_row(z, target_of(rec, model, cfg));
      table.record_ids.push_back(rec.id);
      table.datasets.push_back(rec.dataset);
      table.denominators.push_back(denominator_of(rec, model, cfg));
      table.actual_rates.push_back(actual_rate_of(rec, model, cfg));
    }
  }
  return table;
}

Trainer stack_trainer(const regression::StackSpec& spec) {
  return [spec](const Dataset2D& train, std::uint64_t seed) -> Predictor {
    const auto model = regression::StackedModel::fit(train, spec, seed);
    return [model](const Dataset2D& test) { return model.predict(test); };
  };
}

namespace {

// Per-dataset MAE rows for one evaluation table, plus an "all" row that
// averages dataset-level MAEs (not pooled utterances).
std::vector<ReportRow> dataset_rows(const FeatureTable& table,
                                    const std::vector<double>& predictions,
                                    const ReportRow& prototype) {
  std::map<std::string, std::vector<std::size_t>> by_dataset;
  for (std::size_t i = 0; i < table.datasets.size(); ++i) {
    by_dataset[table.datasets[i]].push_back(i);
  }
  std::vector<ReportRow> rows;
  std::vector<double> dataset_maes;
  for (const auto& [name, idx] : by_dataset) {
    ReportRow row = prototype;
    row.dataset = name;
    row.n = idx.size();
    double abs_sum = 0.0, actual_sum = 0.0, approx_sum = 0.0;
    for (std::size_t i : idx) {
      abs_sum += std::abs(predictions[i] - table.data.y[i]);
      actual_sum += table.actual_rates[i];
      approx_sum += predictions[i] / table.denominators[i];
    }
    row.mae = abs_sum / static_cast<double>(idx.size());
    row.actual_rate_pct = 100.0 * actual_sum / static_cast<double>(idx.size());
    row.approx_rate_pct = 100.0 * approx_sum / static_cast<double>(idx.size());
    dataset_maes.push_back(row.mae);
    rows.push_back(std::move(row));
  }
  ReportRow all = prototype;
  all.dataset = "all";
  all.n = table.datasets.size();
  all.mae = mean_of(dataset_maes);
  rows.push_back(std::move(all));
  return rows;
}

struct CasePlan {
  std::vector<const Corpus*> test_corpora;
  std::string eval_model;
};

CasePlan plan_case(EvalCase eval_case, const ExperimentConfig& cfg,
                   const SplitCorpora& splits, const std::vector<Corpus>& wild) {
  CasePlan plan;
  const bool target_side = eval_case == EvalCase::kII || eval_case == EvalCase::kIV;
  if (target_side && cfg.target_model == cfg.source_model) {
    throw ValidationError("cases II/IV need a target model different from the source");
  }
  plan.eval_model = target_side ? cfg.target_model : cfg.source_model;
  if (eval_case == EvalCase::kI || eval_case == EvalCase::kII) {
    for (const auto& c : splits.test) plan.test_corpora.push_back(&c);
  } else {
    for (const auto& c : wild) plan.test_corpora.push_back(&c);
  }
  return plan;
}

Predictor train_on_benchmarks(const ExperimentConfig& cfg,
                              const proxy::FeatureSpec& feature_spec,
                              const std::vector<Corpus>& train_corpora,
                              const embeddings::EmbeddingStore& store, std::uint64_t seed,
                              const Trainer* trainer_override) {
  std::vector<const Corpus*> train_ptrs;
  for (const auto& c : train_corpora) train_ptrs.push_back(&c);
  assert_trainable(train_ptrs);
  FeatureTable train_table =
      build_feature_table(train_ptrs, cfg.source_model, cfg, feature_spec, store);
  Dataset2D train_data = std::move(train_table.data);
  if (cfg.train_size_cap) {
    if (*cfg.train_size_cap > train_data.n_rows) {
      throw ValidationError("train_size_cap exceeds available training rows");
    }
    train_data = cap_rows(train_data, *cfg.train_size_cap, seed ^ 0xCA9);
  }
  const Trainer trainer =
      trainer_override != nullptr ? *trainer_override : stack_trainer(cfg.stack);
  return trainer(train_data, seed);
}

}  // namespace

EvaluationReport run_case(EvalCase eval_case, const ExperimentConfig& cfg,
                          const std::vector<Corpus>& benchmark_corpora,
                          const std::vector<Corpus>& wild_corpora,
                          const embeddings::EmbeddingStore& store, std::uint64_t seed,
                          const Trainer* trainer_override) {
  const SplitCorpora splits = split_benchmarks(benchmark_corpora, cfg.test_fraction, seed);
  const Predictor predictor =
      train_on_benchmarks(cfg, cfg.feature_spec, splits.train, store, seed, trainer_override);
  const CasePlan plan = plan_case(eval_case, cfg, splits, wild_corpora);

  EvaluationReport report;
  report.metadata["target_kind"] = to_string(cfg.target_kind);
  report.metadata["ood_average"] = "mean of dataset-level MAEs";
  ReportRow prototype;
  prototype.experiment = "case";
  prototype.variant = "Ours";
  prototype.condition = condition_of(eval_case);
  prototype.seed = seed;

  for (const auto* test_corpus : plan.test_corpora) {
    const FeatureTable table =
        build_feature_table({test_corpus}, plan.eval_model, cfg, cfg.feature_spec, store);
    const auto predictions = predictor(table.data);
    for (auto& row : dataset_rows(table, predictions, prototype)) {
      if (row.dataset == "all") continue;
      report.rows.push_back(std::move(row));
    }
  }
  // One pooled condition row: average of dataset-level MAEs.
  std::vector<double> maes;
  for (const auto& row : report.rows) maes.push_back(row.mae);
  ReportRow all = prototype;
  all.dataset = "all";
  all.mae = mean_of(maes);
  all.n = report.rows.size();
  report.rows.push_back(std::move(all));
  return report;
}

EvaluationReport leave_one_out_eval(const ExperimentConfig& cfg,
                                    const std::vector<Corpus>& benchmark_corpora,
                                    const std::vector<Corpus>& wild_corpora,
                                    const embeddings::EmbeddingStore& store,
                                    std::uint64_t seed, const Trainer* trainer_override) {
  const auto folds = corpus::leave_one_out(benchmark_corpora);
  EvaluationReport report;
  report.metadata["protocol"] = "leave-one-out";
  for (const auto& fold : folds) {
    std::vector<Corpus> train_corpora;
    for (const auto* c : fold.train) train_corpora.push_back(*c);
    const Predictor predictor = train_on_benchmarks(cfg, cfg.feature_spec, train_corpora,
                                                    store, seed, trainer_override);
    ReportRow prototype;
    prototype.experiment = "loo";
    prototype.variant = "Ours";
    prototype.condition = "fold:" + fold.held_out->name;
    prototype.seed = seed;

    std::vector<const Corpus*> tests{fold.held_out};
    for (const auto& w : wild_corpora) tests.push_back(&w);
    for (const auto* test_corpus : tests) {
      const FeatureTable table =
          build_feature_table({test_corpus}, cfg.source_model, cfg, cfg.feature_spec, store);
      const auto predictions = predictor(table.data);
      for (auto& row : dataset_rows(table, predictions, prototype)) {
        if (row.dataset == "all") continue;
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

EvaluationReport ablate(const std::vector<AblationVariant>& suite, const ExperimentConfig& cfg,
                        const std::vector<Corpus>& benchmark_corpora,
                        const std::vector<Corpus>& wild_corpora,
                        const embeddings::EmbeddingStore& store,
                        const Trainer* trainer_override) {
  if (cfg.seeds.empty()) throw ValidationError("ablate: seeds must be nonempty");
  EvaluationReport report;
  report.metadata["protocol"] = "paired ablation";
  report.metadata["ood_average"] = "mean of dataset-level MAEs";
  for (const std::uint64_t seed : cfg.seeds) {
    for (const auto& variant : suite) {
      ExperimentConfig variant_cfg = cfg;
      variant_cfg.feature_spec = variant.feature_spec;
      for (const EvalCase c : {EvalCase::kI, EvalCase::kII, EvalCase::kIII, EvalCase::kIV}) {
        const auto case_report = run_case(c, variant_cfg, benchmark_corpora, wild_corpora,
                                          store, seed, trainer_override);
        for (const auto& row : case_report.rows) {
          if (row.dataset != "all") continue;
          ReportRow out = row;
          out.experiment = "ablate";
          out.variant = variant.name;
          report.rows.push_back(std::move(out));
        }
      }
    }
  }
  return report;
}

EvaluationReport scaling_study(const std::vector<std::size_t>& sizes,
                               const ExperimentConfig& cfg,
                               const std::vector<Corpus>& train_corpora,
                               const std::vector<Corpus>& test_corpora,
                               const embeddings::EmbeddingStore& store, std::uint64_t seed,
                               const Trainer* trainer_override) {
  std::vector<const Corpus*> train_ptrs;
  for (const auto& c : train_corpora) train_ptrs.push_back(&c);
  assert_trainable(train_ptrs);
  FeatureTable full =
      build_feature_table(train_ptrs, cfg.source_model, cfg, cfg.feature_spec, store);
  for (std::size_t s : sizes) {
    if (s > full.data.n_rows) {
      throw ValidationError("scaling_study: size " + std::to_string(s) +
                            " exceeds available training rows (" +
                            std::to_string(full.data.n_rows) + ")");
    }
  }

  // One shuffled order; each size takes a prefix, so subsets are nested.
  std::vector<std::size_t> order(full.data.n_rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const Trainer trainer =
      trainer_override != nullptr ? *trainer_override : stack_trainer(cfg.stack);
  EvaluationReport report;
  report.metadata["protocol"] = "scaling (nested prefixes)";
  for (std::size_t s : sizes) {
    Dataset2D subset;
    subset.n_cols = full.data.n_cols;
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t r = order[i];
      subset.x.insert(subset.x.end(), full.data.row(r), full.data.row(r) + full.data.n_cols);
      subset.y.push_back(full.data.y[r]);
      ++subset.n_rows;
    }
    const Predictor predictor = trainer(subset, seed);

    ReportRow prototype;
    prototype.experiment = "scale";
    prototype.variant = "Ours";
    prototype.condition = "n=" + std::to_string(s);
    prototype.seed = seed;
    std::vector<double> maes;
    for (const auto& test_corpus : test_corpora) {
      const FeatureTable table =
          build_feature_table({&test_corpus}, cfg.source_model, cfg, cfg.feature_spec, store);
      const auto predictions = predictor(table.data);
      for (auto& row : dataset_rows(table, predictions, prototype)) {
        if (row.dataset == "all") continue;
        maes.push_back(row.mae);
        report.rows.push_back(std::move(row));
      }
    }
    ReportRow all = prototype;
    all.dataset = "all";
    all.mae = mean_of(maes);
    all.n = maes.size();
    report.rows.push_back(std::move(all));
  }
  return report;
}

EvaluationReport direct_proxy_baseline(const ExperimentConfig& cfg,
                                       const std::vector<Corpus>& benchmark_corpora,
                                       const std::vector<Corpus>& wild_corpora,
                                       const embeddings::EmbeddingStore& store,
                                       std::uint64_t seed, const Trainer* trainer_override) {
  if (cfg.feature_spec.proxies.empty()) {
    throw ValidationError("direct_proxy_baseline: feature spec names no proxy");
  }
  EvaluationReport report;
  report.metadata["protocol"] = "direct proxy comparison";

  // Regression model ("Ours") and similarity-only ("w/o Proxy"), trained on
  // the benchmark train split and evaluated on the wild sets.
  const auto eval_variant = [&](const std::string& name, const proxy::FeatureSpec& spec) {
    ExperimentConfig variant_cfg = cfg;
    variant_cfg.feature_spec = spec;
    const auto case_report = run_case(EvalCase::kIII, variant_cfg, benchmark_corpora,
                                      wild_corpora, store, seed, trainer_override);
    for (const auto& row : case_report.rows) {
      ReportRow out = row;
      out.experiment = "direct_proxy";
      out.variant = name;
      report.rows.push_back(std::move(out));
    }
  };
  eval_variant("Ours", cfg.feature_spec);
  if (cfg.feature_spec.use_similarity) {
    proxy::FeatureSpec sim_only = cfg.feature_spec;
    sim_only.proxies.clear();
    eval_variant("w/o Proxy", sim_only);
  }

  // Direct proxy: predicted count = pWER x denominator, no learned model.
  ReportRow prototype;
  prototype.experiment = "direct_proxy";
  prototype.variant = "w Proxy";
  prototype.condition = condition_of(EvalCase::kIII);
  prototype.seed = seed;
  std::vector<double> maes;
  for (const auto& wild : wild_corpora) {
    const FeatureTable table =
        build_feature_table({&wild}, cfg.source_model, cfg, cfg.feature_spec, store);
    std::vector<double> predictions(table.data.n_rows);
    const std::size_t proxy_col = cfg.feature_spec.use_similarity ? 1 : 0;
    for (std::size_t i = 0; i < table.data.n_rows; ++i) {
      predictions[i] = table.data.at(i, proxy_col) * table.denominators[i];
    }
    for (auto& row : dataset_rows(table, predictions, prototype)) {
      if (row.dataset == "all") continue;
      maes.push_back(row.mae);
      report.rows.push_back(std::move(row));
    }
  }
  ReportRow all = prototype;
  all.dataset = "all";
  all.mae = mean_of(maes);
  all.n = maes.size();
  report.rows.push_back(std::move(all));
  return report;
}

EvaluationReport fine_grained_eval(const ExperimentConfig& cfg,
                                   const std::vector<Corpus>& benchmark_corpora,
                                   const std::vector<Corpus>& wild_corpora,
                                   const embeddings::EmbeddingStore& store, std::uint64_t seed,
                                   const Trainer* trainer_override) {
  EvaluationReport report;
  report.metadata["protocol"] = "fine-grained S/I/D";
  for (const TargetKind kind :
       {TargetKind::kSubCount, TargetKind::kInsCount, TargetKind::kDelCount}) {
    ExperimentConfig kind_cfg = cfg;
    kind_cfg.target_kind = kind;
    for (const EvalCase c : {EvalCase::kI, EvalCase::kII, EvalCase::kIII, EvalCase::kIV}) {
      const auto case_report =
          run_case(c, kind_cfg, benchmark_corpora, wild_corpora, store, seed, trainer_override);
      for (const auto& row : case_report.rows) {
        if (row.dataset != "all") continue;
        ReportRow out = row;
        out.experiment = "fine_grained";
        out.variant = to_string(kind);
        report.rows.push_back(std::move(out));
      }
    }
  }
  return report;
}

embeddings::EmbeddingStore build_similarity_store(corpus::SyntheticCorpus& synthetic,
                                                  double noise_sigma, std::uint64_t seed) {
  std::map<std::pair<std::string, std::string>, const corpus::TruthRecord*> truth_by_key;
  for (const auto& t : synthetic.truth) truth_by_key[{t.id, t.model_id}] = &t;

  embeddings::EmbeddingStore store(2);
  const Rng root(seed);
  std::size_t rec_index = 0;
  for (auto& rec : synthetic.corpus.records) {
    Rng rng = root.stream(rec_index++);
    const std::string speech_key = "s:" + rec.id;
    store.insert({speech_key, {1.0f, 0.0f}});
    rec.speech_embedding_key = speech_key;

    const double ref_words = static_cast<double>(
        metrics::tokenize(metrics::normalize(rec.reference.value_or(""))).size());
    for (const auto& [model, hyp] : rec.hypotheses) {
      const auto it = truth_by_key.find({rec.id, model});
      if (it == truth_by_key.end()) {
        throw ValidationError("build_similarity_store: no truth entry for (" + rec.id + ", " +
                              model + ")");
      }
      const double true_wer =
          static_cast<double>(it->second->total()) / std::max(1.0, ref_words);
      double cos_target = 1.0 - true_wer + noise_sigma * rng.normal();
      cos_target = std::clamp(cos_target, -1.0, 1.0);
      const auto sin_part = static_cast<float>(std::sqrt(std::max(0.0, 1.0 - cos_target * cos_target)));
      const std::string text_key = "t:" + rec.id + ":" + model;
      store.insert({text_key, {static_cast<float>(cos_target), sin_part}});
      rec.text_embedding_keys[model] = text_key;
    }
  }
  return store;
}

std::vector<std::string> calibration_overlap(const std::vector<Corpus>& calibration,
                                             const std::vector<Corpus>& evaluation) {
  std::set<std::string> eval_names;
  for (const auto& c : evaluation) eval_names.insert(c.name);
  std::vector<std::string> overlap;
  for (const auto& c : calibration) {
    if (eval_names.contains(c.name)) overlap.push_back(c.name);
  }
  return overlap;
}

}  // namespace wermeter::harness
