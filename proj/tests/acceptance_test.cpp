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
//
// Acceptance gate. Each criterion prints exactly one pass/fail line; the
// process exits nonzero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "wermeter/corpus.hpp"
#include "wermeter/embeddings.hpp"
#include "wermeter/error.hpp"
#include "wermeter/harness.hpp"
#include "wermeter/metrics.hpp"
#include "wermeter/parallel.hpp"
#include "wermeter/proxy.hpp"
#include "wermeter/regression.hpp"
#include "wermeter/remote.hpp"
#include "wermeter/report.hpp"
#include "wermeter/rng.hpp"

using namespace wermeter;
using regression::Dataset2D;

namespace {

int g_failures = 0;

void report_criterion(int number, const std::string& name, bool pass,
                      const std::string& detail = "") {
  std::cout << "criterion " << number << " (" << name << "): " << (pass ? "PASS" : "FAIL");
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: alignment vs exhaustive brute force.

int brute_distance(const std::vector<std::string>& a, const std::vector<std::string>& b,
                   std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int best = 1 + brute_distance(a, b, i + 1, j);
  best = std::min(best, 1 + brute_distance(a, b, i, j + 1));
  best = std::min(best, (a[i] == b[j] ? 0 : 1) + brute_distance(a, b, i + 1, j + 1));
  return best;
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  bool ok = true;
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    auto draw = [&] {
      std::vector<std::string> toks(rng.uniform_index(7));
      for (auto& t : toks) t = std::string(1, static_cast<char>('a' + rng.uniform_index(4)));
      return toks;
    };
    const auto a = draw();
    const auto b = draw();
    const auto stats = metrics::align(a, b);
    ok = ok && stats.errors() == brute_distance(a, b);
    ok = ok && stats.substitutions + stats.deletions + stats.hits ==
                   static_cast<std::int64_t>(a.size());
    ok = ok && stats.substitutions + stats.insertions + stats.hits ==
                   static_cast<std::int64_t>(b.size());
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 30.0;
  report_criterion(1, "alignment oracle", ok,
                   "10000 pairs, " + report::format_fixed(elapsed, 2) + "s");
}

// ---------------------------------------------------------------------------
// Criterion 2: pWER/pCER conformance.

void criterion_2() {
  struct Case {
    const char* hyp;
    const char* proxy;
    double pwer;   // denominator: proxy words
    double pcer;   // denominator: proxy chars
  };
  // EditDistance(hyp, proxy) / Count(proxy); empty-proxy pairs fall back to
  // denominator 1.
  const std::vector<Case> cases = {
      {"a b c", "a b c", 0.0, 0.0},
      {"a b c", "a b d", 1.0 / 3.0, 1.0 / 5.0},
      {"a b", "a b c", 1.0 / 3.0, 2.0 / 5.0},
      {"a b c", "a b", 1.0 / 2.0, 2.0 / 3.0},
      {"", "a b c", 1.0, 1.0},
      {"a b c", "", 3.0, 5.0},
      {"", "", 0.0, 0.0},
      {"x", "a b c d", 1.0, 7.0 / 7.0},
      {"a b c d", "x", 4.0, 7.0 / 1.0},
      {"hello", "hello", 0.0, 0.0},
      {"hello", "jello", 1.0, 1.0 / 5.0},
      {"one two three", "one three", 1.0 / 2.0, 4.0 / 9.0},
      {"one three", "one two three", 1.0 / 3.0, 4.0 / 13.0},
      {"a", "b", 1.0, 1.0},
      {"a a a a", "a", 3.0, 6.0 / 1.0},
      {"a", "a a a a", 3.0 / 4.0, 6.0 / 7.0},
      {"the cat sat", "the cat sat down", 1.0 / 4.0, 5.0 / 16.0},
      {"Hello, World!", "hello world", 0.0, 0.0},
      {"don't", "dont", 1.0, 1.0 / 4.0},
      {"w1 w2 w3 w4 w5", "w1 x2 w3 x4 w5", 2.0 / 5.0, 2.0 / 14.0},
  };
  bool ok = true;
  std::string first_fail;
  for (const auto& c : cases) {
    const auto r = metrics::proxy_metrics(c.hyp, c.proxy);
    if (std::abs(r.wer - c.pwer) > 1e-12 || std::abs(r.cer - c.pcer) > 1e-12) {
      ok = false;
      if (first_fail.empty()) {
        first_fail = std::string("hyp='") + c.hyp + "' proxy='" + c.proxy + "' got " +
                     report::format_fixed(r.wer, 4) + "/" + report::format_fixed(r.cer, 4);
      }
    }
  }
  Rng rng(1002);
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::string s;
    const std::size_t words = rng.uniform_index(12);
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) s.push_back(' ');
      const std::size_t len = 1 + rng.uniform_index(8);
      for (std::size_t k = 0; k < len; ++k) {
        s.push_back(static_cast<char>('a' + rng.uniform_index(26)));
      }
    }
    const auto r = metrics::proxy_metrics(s, s);
    ok = ok && r.wer == 0.0 && r.cer == 0.0;
  }
  report_criterion(2, "pWER/pCER conformance", ok, first_fail);
}

// ---------------------------------------------------------------------------
// Criterion 3: estimator properties.

Dataset2D random_regression_data(Rng& rng, std::size_t n, std::size_t d) {
  Dataset2D data;
  data.n_cols = d;
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.normal();
    double y = 0.0;
    for (std::size_t j = 0; j < d; ++j) y += (j + 1.0) * row[j];
    data.push_row(row, std::abs(y + 0.2 * rng.normal()));
  }
  return data;
}

void criterion_3() {
  bool ok = true;
  std::string detail;

  {  // Ridge recovers a planted linear model.
    Dataset2D data;
    data.n_cols = 1;
    Rng rng(1003);
    for (int i = 0; i < 50; ++i) {
      const double x = rng.normal();
      data.push_row(std::vector<double>{x}, 2.0 * x);
    }
    const auto model = regression::fit_ridge(data, 1e-9, false);
    if (std::abs(model.weights[0] - 2.0) > 1e-6) {
      ok = false;
      detail = "ridge weight " + report::format_fixed(model.weights[0], 8);
    }
  }
  {  // Non-negative ridge zeroes a planted negative slope.
    Dataset2D data;
    data.n_cols = 1;
    Rng rng(1004);
    for (int i = 0; i < 50; ++i) {
      const double x = rng.normal();
      data.push_row(std::vector<double>{x}, -2.0 * x);
    }
    const auto model = regression::fit_ridge(data, 1e-9, true);
    if (model.weights[0] != 0.0) {
      ok = false;
      detail = "nonneg ridge weight " + report::format_fixed(model.weights[0], 8);
    }
  }
  {  // GBR training MSE monotone over 200 rounds on 5 random datasets.
    Rng rng(1005);
    for (int trial = 0; trial < 5; ++trial) {
      Rng local = rng.stream(trial);
      const auto data = random_regression_data(local, 80, 3);
      regression::GbrParams params;
      params.n_estimators = 200;
      const auto gbr = regression::Gbr::fit(data, params);
      const auto& mse = gbr.training_mse();
      for (std::size_t i = 1; i < mse.size(); ++i) {
        if (mse[i] > mse[i - 1] + 1e-12) {
          ok = false;
          detail = "gbr mse rose at round " + std::to_string(i);
        }
      }
    }
  }
  {  // Poisson HGB on constant targets predicts the constant.
    Dataset2D data;
    data.n_cols = 2;
    Rng rng(1006);
    for (int i = 0; i < 60; ++i) {
      data.push_row(std::vector<double>{rng.normal(), rng.normal()}, 4.0);
    }
    regression::HgbParams params;
    params.loss = regression::HgbLoss::kPoisson;
    const auto hgb = regression::Hgb::fit(data, params);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      if (std::abs(hgb.predict_row(data.row(i)) - 4.0) > 1e-6) {
        ok = false;
        detail = "poisson constant " + report::format_fixed(hgb.predict_row(data.row(i)), 8);
      }
    }
  }
  {  // Bit determinism across two runs with the same seed, all estimators.
    Rng rng(1007);
    const auto data = random_regression_data(rng, 100, 3);
    regression::ForestParams fp;
    fp.n_estimators = 15;
    const auto f1 = regression::Forest::fit(data, fp, 7);
    const auto f2 = regression::Forest::fit(data, fp, 7);
    const auto g1 = regression::Gbr::fit(data, {});
    const auto g2 = regression::Gbr::fit(data, {});
    regression::HgbParams hp;
    hp.loss = regression::HgbLoss::kPoisson;
    const auto h1 = regression::Hgb::fit(data, hp);
    const auto h2 = regression::Hgb::fit(data, hp);
    const auto r1 = regression::fit_ridge(data, 0.5, true);
    const auto r2 = regression::fit_ridge(data, 0.5, true);
    regression::StackSpec spec;
    spec.bases = {regression::BaseSpec::make_forest(fp)};
    const auto s1 = regression::StackedModel::fit(data, spec, 3);
    const auto s2 = regression::StackedModel::fit(data, spec, 3);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      const double* row = data.row(i);
      if (f1.predict_row(row) != f2.predict_row(row) ||
          g1.predict_row(row) != g2.predict_row(row) ||
          h1.predict_row(row) != h2.predict_row(row) ||
          r1.predict_row(row) != r2.predict_row(row) ||
          s1.predict_row(row, data.n_cols) != s2.predict_row(row, data.n_cols)) {
        ok = false;
        detail = "nondeterministic prediction at row " + std::to_string(i);
        break;
      }
    }
  }
  report_criterion(3, "estimator properties", ok, detail);
}

// ---------------------------------------------------------------------------
// Criterion 4: stacking leakage over 20 random datasets, folds in {2, 5}.

void criterion_4() {
  bool ok = true;
  std::string detail;
  Rng rng(1008);
  for (int trial = 0; trial < 20 && ok; ++trial) {
    for (const int folds : {2, 5}) {
      Rng local = rng.stream(trial * 2 + folds);
      const auto data = random_regression_data(local, 30 + local.uniform_index(40), 3);
      regression::StackSpec spec;
      regression::ForestParams fp;
      fp.n_estimators = 2;
      spec.bases = {regression::BaseSpec::make_forest(fp)};
      spec.folds = folds;
      regression::FoldPlan plan;
      regression::StackedModel::fit(data, spec, trial + 1, &plan);
      for (int f = 0; f < folds && ok; ++f) {
        for (const auto row : plan.fold_train[f]) {
          if (plan.fold_of[row] == f) {
            ok = false;
            detail = "row " + std::to_string(row) + " trained its own fold";
          }
        }
      }
      for (std::size_t i = 0; i < data.n_rows && ok; ++i) {
        std::size_t appearances = 0;
        for (int f = 0; f < folds; ++f) {
          appearances +=
              std::count(plan.fold_train[f].begin(), plan.fold_train[f].end(), i);
        }
        if (appearances != static_cast<std::size_t>(folds - 1)) {
          ok = false;
          detail = "row " + std::to_string(i) + " coverage " + std::to_string(appearances);
        }
      }
    }
  }
  report_criterion(4, "stacking leakage", ok, detail);
}

// ---------------------------------------------------------------------------
// Criteria 5-7: end-to-end synthetic reproduction.

struct SynthSuite {
  std::vector<corpus::Corpus> benchmarks;
  std::vector<corpus::Corpus> wilds;
  embeddings::EmbeddingStore store;
};

corpus::SynthChannelConfig channel(double sub, double ins, double del,
                                   std::uint64_t seed) {
  corpus::SynthChannelConfig ch;
  ch.sub_rate = sub;
  ch.ins_rate = ins;
  ch.del_rate = del;
  ch.vocab_size = 400;
  ch.sentence_len_range = {9, 13};
  ch.seed = seed;
  return ch;
}

void merge_store(embeddings::EmbeddingStore& into, const embeddings::EmbeddingStore& from) {
  for (const auto& [key, vec] : from.entries()) into.insert(vec);
}

// 3 benchmark + 2 wild corpora; source model "asr", target model "asr2",
// good proxies p1..p5, bad proxy pbad; similarity = 1 - trueWER + N(0, 0.05).
SynthSuite build_suite(std::size_t n_utt) {
  SynthSuite suite;
  std::map<std::string, corpus::SynthChannelConfig> channels;
  channels["asr"] = channel(0.12, 0.04, 0.04, 21);
  channels["asr2"] = channel(0.18, 0.05, 0.05, 22);
  channels["p1"] = channel(0.030, 0.0, 0.0, 23);
  channels["p2"] = channel(0.035, 0.0, 0.0, 24);
  channels["p3"] = channel(0.040, 0.0, 0.0, 25);
  channels["p4"] = channel(0.045, 0.0, 0.0, 26);
  channels["p5"] = channel(0.050, 0.0, 0.0, 27);
  channels["pbad"] = channel(0.25, 0.05, 0.05, 28);

  const std::vector<std::tuple<std::string, std::uint64_t, corpus::CorpusKind>> specs = {
      {"bench1", 301, corpus::CorpusKind::kBenchmark},
      {"bench2", 302, corpus::CorpusKind::kBenchmark},
      {"bench3", 303, corpus::CorpusKind::kBenchmark},
      {"wild1", 304, corpus::CorpusKind::kWild},
      {"wild2", 305, corpus::CorpusKind::kWild},
  };
  for (const auto& [name, seed, kind] : specs) {
    auto base = channel(0.0, 0.0, 0.0, seed);
    auto syn = corpus::generate_synthetic(base, n_utt, channels, name, kind);
    merge_store(suite.store, harness::build_similarity_store(syn, 0.05, seed + 7000));
    if (kind == corpus::CorpusKind::kWild) {
      suite.wilds.push_back(std::move(syn.corpus));
    } else {
      suite.benchmarks.push_back(std::move(syn.corpus));
    }
  }
  return suite;
}

regression::StackSpec small_stack() {
  regression::StackSpec spec;
  regression::ForestParams rf;
  rf.n_estimators = 20;
  rf.tree.max_depth = 10;
  regression::GbrParams gbr;
  gbr.n_estimators = 60;
  gbr.tree.max_depth = 3;
  regression::HgbParams hgb;
  hgb.max_iter = 60;
  hgb.max_depth = 5;
  hgb.loss = regression::HgbLoss::kPoisson;
  spec.bases = {regression::BaseSpec::make_forest(rf), regression::BaseSpec::make_gbr(gbr),
                regression::BaseSpec::make_hgb(hgb)};
  spec.folds = 3;
  return spec;
}

harness::ExperimentConfig suite_config(const proxy::FeatureSpec& features) {
  harness::ExperimentConfig cfg;
  cfg.source_model = "asr";
  cfg.target_model = "asr2";
  cfg.feature_spec = features;
  cfg.train_size_cap = 1500;
  cfg.stack = small_stack();
  return cfg;
}

proxy::FeatureSpec features_of(bool similarity, std::vector<std::string> proxies) {
  proxy::FeatureSpec spec;
  spec.use_similarity = similarity;
  spec.proxies = std::move(proxies);
  return spec;
}

double all_mae(const harness::EvaluationReport& report) {
  for (const auto& row : report.rows) {
    if (row.dataset == "all") return row.mae;
  }
  throw ValidationError("no all-row in report");
}

void criteria_5_to_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const SynthSuite suite = build_suite(2000);

  const std::map<std::string, proxy::FeatureSpec> variants = {
      {"Base", features_of(true, {"p1"})},
      {"w/o PR", features_of(true, {})},
      {"MPR5", features_of(true, {"p1", "p2", "p3", "p4", "p5"})},
      {"Bad", features_of(true, {"pbad"})},
  };

  bool ok5 = true;
  std::string detail5;
  int regression_wins = 0;  // criterion 6 tally
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  for (const std::uint64_t seed : seeds) {
    std::map<std::string, double> mae_I, mae_IV;
    for (const auto& [name, features] : variants) {
      const auto cfg = suite_config(features);
      mae_I[name] = all_mae(harness::run_case(harness::EvalCase::kI, cfg, suite.benchmarks,
                                              suite.wilds, suite.store, seed));
      mae_IV[name] = all_mae(harness::run_case(harness::EvalCase::kIV, cfg, suite.benchmarks,
                                               suite.wilds, suite.store, seed));
    }
    auto check = [&](bool cond, const std::string& what) {
      if (!cond) {
        ok5 = false;
        if (detail5.empty()) {
          detail5 = "seed " + std::to_string(seed) + ": " + what;
        }
      }
    };
    check(mae_I["Base"] < mae_I["w/o PR"] && mae_IV["Base"] < mae_IV["w/o PR"],
          "Base !< w/o PR");
    check(mae_I["MPR5"] <= mae_I["Base"] + 1e-12 && mae_IV["MPR5"] <= mae_IV["Base"] + 1e-12,
          "MPR5 !<= Base");
    check(mae_I["Base"] < mae_I["Bad"] && mae_IV["Base"] < mae_IV["Bad"],
          "good proxy !< bad proxy");
    check(mae_I["Base"] <= mae_IV["Base"] + 0.5, "case I > case IV + 0.5");

    // Criterion 6: learned regression vs direct proxy, bad-proxy features.
    const auto direct = harness::direct_proxy_baseline(
        suite_config(variants.at("Bad")), suite.benchmarks, suite.wilds, suite.store, seed);
    double ours = -1.0, direct_mae = -1.0;
    for (const auto& row : direct.rows) {
      if (row.dataset != "all") continue;
      if (row.variant == "Ours") ours = row.mae;
      if (row.variant == "w Proxy") direct_mae = row.mae;
    }
    if (ours >= 0.0 && direct_mae >= 0.0 && ours < direct_mae) ++regression_wins;
  }
  const double elapsed5 = seconds_since(t0);
  ok5 = ok5 && elapsed5 < 300.0;
  report_criterion(5, "end-to-end synthetic directional reproduction", ok5,
                   detail5.empty() ? report::format_fixed(elapsed5, 1) + "s" : detail5);

  report_criterion(6, "regression beats direct bad proxy", regression_wins >= 4,
                   std::to_string(regression_wins) + "/5 seeds");

  // Criterion 7: scaling flatness, 1,000 vs 10,000 training rows.
  std::map<std::string, corpus::SynthChannelConfig> channels;
  channels["asr"] = channel(0.12, 0.04, 0.04, 21);
  channels["p1"] = channel(0.030, 0.0, 0.0, 23);
  auto big = corpus::generate_synthetic(channel(0.0, 0.0, 0.0, 401), 10000, channels,
                                        "bigtrain", corpus::CorpusKind::kBenchmark);
  embeddings::EmbeddingStore big_store;
  merge_store(big_store, harness::build_similarity_store(big, 0.05, 402));
  std::map<std::string, corpus::SynthChannelConfig> test_channels = channels;
  auto test =
      corpus::generate_synthetic(channel(0.0, 0.0, 0.0, 403), 2000, test_channels,
                                 "scaletest", corpus::CorpusKind::kBenchmark);
  merge_store(big_store, harness::build_similarity_store(test, 0.05, 404));

  auto cfg7 = suite_config(features_of(true, {"p1"}));
  cfg7.train_size_cap.reset();
  const auto scaling =
      harness::scaling_study({1000, 10000}, cfg7, {big.corpus}, {test.corpus}, big_store, 1);
  double mae_1k = -1.0, mae_10k = -1.0;
  for (const auto& row : scaling.rows) {
    if (row.dataset != "all") continue;
    if (row.condition == "n=1000") mae_1k = row.mae;
    if (row.condition == "n=10000") mae_10k = row.mae;
  }
  const bool ok7 = mae_1k >= 0.0 && mae_10k > 0.0 && mae_1k <= 1.5 * mae_10k;
  report_criterion(7, "scaling flatness", ok7,
                   "MAE(1k)=" + report::format_fixed(mae_1k, 3) +
                       " MAE(10k)=" + report::format_fixed(mae_10k, 3));
}

// ---------------------------------------------------------------------------
// Criterion 8: divergence diagnostics.

void criterion_8() {
  bool ok = true;
  std::string detail;
  Rng rng(1009);
  std::vector<embeddings::EmbeddingVector> xs;
  for (int i = 0; i < 100; ++i) {
    embeddings::EmbeddingVector v;
    v.key = std::to_string(i);
    for (int d = 0; d < 4; ++d) v.values.push_back(static_cast<float>(rng.normal()));
    xs.push_back(std::move(v));
  }
  if (std::abs(embeddings::cmd(xs, xs)) > 1e-12) {
    ok = false;
    detail = "cmd(X,X) != 0";
  }

  const std::vector<embeddings::EmbeddingVector> zeros{{"a", {0.0f}}, {"b", {0.0f}}};
  const std::vector<embeddings::EmbeddingVector> ones{{"c", {1.0f}}, {"d", {1.0f}}};
  embeddings::CmdOptions unit;
  unit.has_bounds = true;
  unit.lower = 0.0;
  unit.upper = 1.0;
  if (std::abs(embeddings::cmd(zeros, ones, unit) - 1.0) > 1e-12) {
    ok = false;
    detail = "two-point-mass cmd != 1";
  }

  if (std::abs(embeddings::tvo({"a b c"}, {"c a b"}) - 100.0) > 1e-12 ||
      std::abs(embeddings::tvo({"a b"}, {"c d"}) - 0.0) > 1e-12 ||
      std::abs(embeddings::tvo({"a b c"}, {"b c d"}) - 50.0) > 1e-12) {
    ok = false;
    detail = "tvo closed forms";
  }

  embeddings::CmdOptions wide;
  wide.has_bounds = true;
  wide.lower = -12.0;
  wide.upper = 12.0;
  double prev = -1.0;
  for (const double shift : {0.5, 1.0, 2.0, 4.0}) {
    auto shifted = xs;
    for (auto& v : shifted) {
      for (auto& x : v.values) x += static_cast<float>(shift);
    }
    const double value = embeddings::cmd(xs, shifted, wide);
    if (value <= prev) {
      ok = false;
      detail = "cmd not increasing at shift " + report::format_fixed(shift, 1);
    }
    prev = value;
  }
  report_criterion(8, "divergence diagnostics", ok, detail);
}

// ---------------------------------------------------------------------------
// Criterion 9: fixture fidelity against stored table fragments.

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_9() {
  const std::string golden_dir = WERMETER_GOLDEN_DIR;
  bool ok = true;
  std::string detail;

  report::SlashRow slash;
  slash.label = "can-1b";
  slash.actual_approx_pct = {{4.1, 6.4}, {16.2, 13.4}, {30.4, 35.5}, {23.2, 12.1}};
  const std::string slash_table = report::render_slash_table(
      {"LS_Noise", "Primock57", "ATCOsim", "VP_Acc"}, {slash});
  if (slash_table != read_file(golden_dir + "/table1_can1b.md")) {
    ok = false;
    detail = "slash table mismatch";
  }

  report::MaeRow mae_row;
  mae_row.label = "Base";
  for (const auto& [mean, sd] : std::vector<std::pair<double, double>>{
           {1.03, 0.03}, {1.05, 0.01}, {1.03, 0.02}, {1.07, 0.01}}) {
    report::MaeCell cell;
    cell.mean = mean;
    cell.has_std = true;
    cell.std_dev = sd;
    mae_row.cells.push_back(cell);
  }
  const std::string mae_table =
      report::render_mae_table({"IID", "OOD-D", "OOD-M", "OOD-D+M"}, {mae_row});
  if (mae_table != read_file(golden_dir + "/table3_base.md")) {
    ok = false;
    detail = "mae table mismatch";
  }
  report_criterion(9, "fixture fidelity", ok, detail);
}

// ---------------------------------------------------------------------------
// Criterion 10: remote encoder client against a mock with one injected
// transient failure.

void criterion_10() {
  httplib::Server server;
  std::atomic<int> requests{0};
  std::atomic<int> failures_left{1};
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    if (failures_left-- > 0) {
      res.status = 503;
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply;
    reply["dim"] = 8;
    reply["vectors"] = nlohmann::json::array();
    for (const auto& item : body.at("items")) {
      nlohmann::json entry;
      entry["key"] = item.at("key");
      std::vector<float> values(8, 0.5f);
      values[0] = static_cast<float>(item.at("payload").get<std::string>().size());
      entry["values"] = values;
      reply["vectors"].push_back(std::move(entry));
    }
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  bool ok = true;
  std::string detail;
  try {
    std::vector<std::pair<std::string, std::string>> items;
    for (int i = 0; i < 100; ++i) {
      items.emplace_back("text/" + std::to_string(i), "payload " + std::to_string(i));
    }
    embeddings::EmbeddingStore store;
    remote::FetchOptions opts;
    opts.initial_backoff_ms = 5;
    const auto result = remote::fetch_remote("http://127.0.0.1:" + std::to_string(port),
                                             remote::PayloadKind::kText, items, store, opts);
    if (result.retries != 1) {
      ok = false;
      detail = "retries = " + std::to_string(result.retries);
    }
    if (requests.load() != 2) {
      ok = false;
      detail = "requests = " + std::to_string(requests.load());
    }
    if (store.size() != 100 || store.dim() != 8) {
      ok = false;
      detail = "store " + std::to_string(store.size()) + " x " + std::to_string(store.dim());
    }
    for (std::size_t i = 0; i < items.size() && ok; ++i) {
      if (result.vectors[i].key != items[i].first) {
        ok = false;
        detail = "order broken at " + std::to_string(i);
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  server.stop();
  listener.join();
  report_criterion(10, "remote encoder client", ok, detail);
}

}  // namespace

int main() {
  const unsigned hw = std::thread::hardware_concurrency();
  max_jobs() = static_cast<int>(std::min(8u, hw == 0 ? 1u : hw));

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_to_7();
  criterion_8();
  criterion_9();
  criterion_10();

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
