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

#ifndef WERMETER_HARNESS_HPP
#define WERMETER_HARNESS_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wermeter/corpus.hpp"
#include "wermeter/embeddings.hpp"
#include "wermeter/metrics.hpp"
#include "wermeter/proxy.hpp"
#include "wermeter/regression.hpp"

namespace wermeter::harness {

enum class TargetKind {
  kWordCount,
  kCharCount,
  kWer,
  kCer,
  kSubCount,
  kInsCount,
  kDelCount
};

// I: IID source; II: IID target model; III: wild data, source model;
// IV: wild data, target model.
enum class EvalCase { kI, kII, kIII, kIV };

std::string to_string(EvalCase c);
std::string to_string(TargetKind k);
// Condition labels used in ablation tables.
std::string condition_of(EvalCase c);  // "IID", "OOD-D", "OOD-M", "OOD-D+M"

struct ExperimentConfig {
  std::string source_model;
  std::string target_model;
  proxy::FeatureSpec feature_spec;
  TargetKind target_kind = TargetKind::kWordCount;
  // Denominator for approximated rates; hypothesis length is the label-free
  // default, reference mode exists for evaluation parity.
  metrics::Denominator norm_denominator = metrics::Denominator::kHypothesis;
  std::optional<std::size_t> train_size_cap;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int folds = 5;
  double test_fraction = 0.2;
  regression::StackSpec stack;  // base/final estimator configuration
};

struct ReportRow {
  std::string experiment;
  std::string variant;
  std::string condition;
  std::string dataset;
  std::uint64_t seed = 0;
  double mae = 0.0;
  std::size_t n = 0;
  // Mean actual / approximated rate in percent, for slash-style tables.
  std::optional<double> actual_rate_pct;
  std::optional<double> approx_rate_pct;
};

struct AggregateRow {
  std::string experiment;
  std::string variant;
  std::string condition;
  std::string dataset;
  double mean = 0.0;
  std::optional<double> std_dev;  // only with >= 2 seeds
  std::size_t runs = 0;
};

struct EvaluationReport {
  std::vector<ReportRow> rows;
  std::map<std::string, std::string> metadata;

  void append(const EvaluationReport& other);
  // Mean +- std over seeds, grouped by (experiment, variant, condition,
  // dataset); recomputable from rows at any time.
  std::vector<AggregateRow> aggregates() const;
};

// Rows of a feature/target table, traceable back to the corpus.
struct FeatureTable {
  regression::Dataset2D data;
  std::vector<std::string> record_ids;
  std::vector<std::string> datasets;
  std::vector<double> denominators;  // per row, for aWER/aCER rendering
  std::vector<double> actual_rates;  // actual WER or CER, unit interval
};

// Builds z and y for every record of every corpus, for one model. References
// are consumed only for the target; features never touch them.
FeatureTable build_feature_table(const std::vector<const corpus::Corpus*>& corpora,
                                 const std::string& model, const ExperimentConfig& cfg,
                                 const proxy::FeatureSpec& spec,
                                 const embeddings::EmbeddingStore& store);

// A fitted predictor: features in, estimates out.
using Predictor = std::function<std::vector<double>(const regression::Dataset2D&)>;
// Trains a predictor on a table; the default trainer fits cfg.stack.
using Trainer = std::function<Predictor(const regression::Dataset2D&, std::uint64_t seed)>;

Trainer stack_trainer(const regression::StackSpec& spec);

// Refuses to train when any corpus is wild-kind. Evaluates the stacked model
// on the case-appropriate test set; one row per test dataset plus an "all"
// average-of-datasets row.
EvaluationReport run_case(EvalCase eval_case, const ExperimentConfig& cfg,
                          const std::vector<corpus::Corpus>& benchmark_corpora,
                          const std::vector<corpus::Corpus>& wild_corpora,
                          const embeddings::EmbeddingStore& store, std::uint64_t seed,
                          const Trainer* trainer_override = nullptr);

// Train on K-1 benchmarks, test on the held-out benchmark and all wild
// corpora; repeated for every benchmark. Emits aWER/aCER alongside actuals.
EvaluationReport leave_one_out_eval(const ExperimentConfig& cfg,
                                    const std::vector<corpus::Corpus>& benchmark_corpora,
                                    const std::vector<corpus::Corpus>& wild_corpora,
                                    const embeddings::EmbeddingStore& store,
                                    std::uint64_t seed,
                                    const Trainer* trainer_override = nullptr);

struct AblationVariant {
  std::string name;
  proxy::FeatureSpec feature_spec;
};

// Paired comparison: every variant sees identical splits and seeds. One row
// per (variant, condition, seed).
EvaluationReport ablate(const std::vector<AblationVariant>& suite, const ExperimentConfig& cfg,
                        const std::vector<corpus::Corpus>& benchmark_corpora,
                        const std::vector<corpus::Corpus>& wild_corpora,
                        const embeddings::EmbeddingStore& store,
                        const Trainer* trainer_override = nullptr);

// Nested training subsets of the given sizes, fixed test sets.
EvaluationReport scaling_study(const std::vector<std::size_t>& sizes,
                               const ExperimentConfig& cfg,
                               const std::vector<corpus::Corpus>& train_corpora,
                               const std::vector<corpus::Corpus>& test_corpora,
                               const embeddings::EmbeddingStore& store, std::uint64_t seed,
                               const Trainer* trainer_override = nullptr);

// No learned model: prediction = proxy-derived error count (pWER x
// denominator), reported next to the regression model and a similarity-only
// model.
EvaluationReport direct_proxy_baseline(const ExperimentConfig& cfg,
                                       const std::vector<corpus::Corpus>& benchmark_corpora,
                                       const std::vector<corpus::Corpus>& wild_corpora,
                                       const embeddings::EmbeddingStore& store,
                                       std::uint64_t seed,
                                       const Trainer* trainer_override = nullptr);

// One independently trained model per S/I/D count kind.
EvaluationReport fine_grained_eval(const ExperimentConfig& cfg,
                                   const std::vector<corpus::Corpus>& benchmark_corpora,
                                   const std::vector<corpus::Corpus>& wild_corpora,
                                   const embeddings::EmbeddingStore& store, std::uint64_t seed,
                                   const Trainer* trainer_override = nullptr);

// Synthetic-oracle support: attach embedding keys to a synthetic corpus and
// build a dim-2 store whose cosine similarity equals
// clamp(1 - true_WER + N(0, sigma^2), -1, 1) per (record, model).
embeddings::EmbeddingStore build_similarity_store(corpus::SyntheticCorpus& synthetic,
                                                  double noise_sigma, std::uint64_t seed);

// Warns (returns overlapping names) when calibration and evaluation corpora
// share datasets; the caller decides what to do with it.
std::vector<std::string> calibration_overlap(const std::vector<corpus::Corpus>& calibration,
                                             const std::vector<corpus::Corpus>& evaluation);

}  // namespace wermeter::harness

#endif  // WERMETER_HARNESS_HPP
