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

#ifndef WERMETER_CORPUS_HPP
#define WERMETER_CORPUS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wermeter::corpus {

struct UtteranceRecord {
  std::string id;
  std::string dataset;
  std::optional<std::string> reference;
  std::map<std::string, std::string> hypotheses;   // model id -> raw text
  std::optional<std::string> speech_embedding_key;
  std::map<std::string, std::string> text_embedding_keys;  // model id -> key
};

enum class CorpusKind { kBenchmark, kWild, kSynthetic };

// Immutable after construction; wild-kind corpora must never enter training
// (enforced by the harness, the kind tag lives here).
struct Corpus {
  std::string name;
  CorpusKind kind = CorpusKind::kBenchmark;
  std::vector<UtteranceRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct SynthChannelConfig {
  double sub_rate = 0.0;
  double ins_rate = 0.0;
  double del_rate = 0.0;
  std::uint32_t vocab_size = 100;
  std::pair<std::uint32_t, std::uint32_t> sentence_len_range{5, 15};
  std::uint64_t seed = 0;
};

// Per-(utterance, channel) edit counts logged by the generator.
struct TruthRecord {
  std::string id;
  std::string model_id;
  std::int64_t true_sub = 0;
  std::int64_t true_ins = 0;
  std::int64_t true_del = 0;

  std::int64_t total() const { return true_sub + true_ins + true_del; }
};

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<TruthRecord> truth;
};

// JSON-lines manifest I/O. One object per utterance:
// {"id", "dataset", "reference", "hypotheses", "speech_emb", "text_embs"}.
Corpus parse_manifest(std::istream& in, const std::string& name = "corpus",
                      CorpusKind kind = CorpusKind::kBenchmark);
void write_manifest(const Corpus& corpus, std::ostream& out);

Corpus load_manifest(const std::string& path, CorpusKind kind = CorpusKind::kBenchmark);
void save_manifest(const Corpus& corpus, const std::string& path);

// Sidecar truth log: {"id","model_id","true_sub","true_ins","true_del"}.
void write_truth_log(const std::vector<TruthRecord>& truth, std::ostream& out);
std::vector<TruthRecord> parse_truth_log(std::istream& in);

// Deterministic shuffled split; |test| = round(fraction * N).
std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed);

struct LeaveOneOutFold {
  std::vector<const Corpus*> train;
  const Corpus* held_out = nullptr;
};

// One fold per corpus; the held-out corpus never appears in its train list.
std::vector<LeaveOneOutFold> leave_one_out(const std::vector<Corpus>& benchmark_corpora);

// Random reference sentences over a rendered integer vocabulary ("w<k>"),
// one hypothesis per channel from i.i.d. sub/ins/del edits, with every edit
// event logged. Fully seed-deterministic.
SyntheticCorpus generate_synthetic(const SynthChannelConfig& cfg,
                                   std::size_t n_utterances,
                                   const std::map<std::string, SynthChannelConfig>& channels,
                                   const std::string& name = "synthetic",
                                   CorpusKind kind = CorpusKind::kSynthetic);

}  // namespace wermeter::corpus

#endif  // WERMETER_CORPUS_HPP
