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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "wermeter/embeddings.hpp"
#include "wermeter/metrics.hpp"
#include "wermeter/regression.hpp"
#include "wermeter/rng.hpp"

using namespace wermeter;

namespace {

std::vector<std::string> random_sentence(Rng& rng, std::size_t words, std::size_t vocab) {
  std::vector<std::string> toks(words);
  for (auto& t : toks) t = "w" + std::to_string(rng.uniform_index(vocab));
  return toks;
}

void BM_Align(benchmark::State& state) {
  const std::size_t len = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_sentence(rng, len, 200);
  auto b = a;
  for (std::size_t i = 0; i < len / 5; ++i) {
    b[rng.uniform_index(len)] = "w" + std::to_string(rng.uniform_index(200));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::align(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Align)->Range(8, 512)->Complexity(benchmark::oNSquared);

void BM_Normalize(benchmark::State& state) {
  const std::string text =
      "The QUICK brown fox, it's said, jumps -- over the lazy dog!  Again...";
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::normalize(text));
  }
}
BENCHMARK(BM_Normalize);

regression::Dataset2D make_dataset(std::size_t n, std::size_t d) {
  regression::Dataset2D data;
  data.n_cols = d;
  Rng rng(2);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.normal();
    data.push_row(row, std::abs(row[0] + 0.3 * rng.normal()));
  }
  return data;
}

void BM_TreeFit(benchmark::State& state) {
  const auto data = make_dataset(static_cast<std::size_t>(state.range(0)), 4);
  regression::TreeParams params;
  params.max_depth = 8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(regression::Tree::fit(data, params));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeFit)->Range(256, 4096)->Complexity();

void BM_ForestFit(benchmark::State& state) {
  const auto data = make_dataset(1024, 4);
  regression::ForestParams params;
  params.n_estimators = static_cast<int>(state.range(0));
  params.tree.max_depth = 8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(regression::Forest::fit(data, params, 7));
  }
}
BENCHMARK(BM_ForestFit)->Arg(10)->Arg(50);

void BM_HgbFit(benchmark::State& state) {
  const auto data = make_dataset(static_cast<std::size_t>(state.range(0)), 4);
  regression::HgbParams params;
  params.max_iter = 50;
  params.max_depth = 5;
  params.loss = regression::HgbLoss::kPoisson;
  for (auto _ : state) {
    benchmark::DoNotOptimize(regression::Hgb::fit(data, params));
  }
}
BENCHMARK(BM_HgbFit)->Arg(1024)->Arg(8192);

void BM_Cosine(benchmark::State& state) {
  Rng rng(3);
  embeddings::EmbeddingVector a, b;
  a.key = "a";
  b.key = "b";
  for (int i = 0; i < 1024; ++i) {
    a.values.push_back(static_cast<float>(rng.normal()));
    b.values.push_back(static_cast<float>(rng.normal()));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(embeddings::cosine(a, b));
  }
}
BENCHMARK(BM_Cosine);

void BM_Cmd(benchmark::State& state) {
  Rng rng(4);
  std::vector<embeddings::EmbeddingVector> xs, ys;
  for (int i = 0; i < 500; ++i) {
    embeddings::EmbeddingVector v;
    v.key = "x" + std::to_string(i);
    for (int d = 0; d < 64; ++d) v.values.push_back(static_cast<float>(rng.normal()));
    xs.push_back(v);
    v.key = "y" + std::to_string(i);
    for (auto& x : v.values) x += 0.5f;
    ys.push_back(std::move(v));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(embeddings::cmd(xs, ys));
  }
}
BENCHMARK(BM_Cmd);

}  // namespace

BENCHMARK_MAIN();
