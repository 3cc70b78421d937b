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

#ifndef WERMETER_PROXY_HPP
#define WERMETER_PROXY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "wermeter/corpus.hpp"
#include "wermeter/embeddings.hpp"
#include "wermeter/metrics.hpp"

namespace wermeter::proxy {

// Candidate models sorted ascending by r, the average WER percent across
// calibration datasets (lower r = higher quality).
struct ModelRanking {
  struct Entry {
    std::string model;
    double r = 0.0;
  };
  std::vector<Entry> entries;  // ascending by r, ties by model id
};

// z = [similarity?] ++ [pWER or pCER against each proxy, in rank order].
struct FeatureSpec {
  bool use_similarity = true;
  std::vector<std::string> proxies;
  metrics::Denominator proxy_denominator = metrics::Denominator::kReference;
  enum class MetricKind { kWord, kChar } metric_kind = MetricKind::kWord;

  std::size_t dim() const { return (use_similarity ? 1 : 0) + proxies.size(); }
};

// r(model) = unweighted mean over datasets of the dataset-level WER percent.
// Every record needs a reference and a hypothesis for each model.
ModelRanking profile_models(const std::vector<corpus::Corpus>& calibration,
                            const std::vector<std::string>& model_ids);

// The n best-ranked models excluding the target, in rank order.
std::vector<std::string> select_proxy(const ModelRanking& ranking, const std::string& target,
                                      std::size_t n);

// Mixed-quality pool: n proxies spread evenly across the eligible ranking
// (best, worst, and evenly spaced between). Deterministic.
std::vector<std::string> select_mixed_proxies(const ModelRanking& ranking,
                                              const std::string& target, std::size_t n);

// Assemble the feature vector for one record and target model. Reads only
// hypotheses and embeddings, never the reference.
std::vector<double> assemble_features(const corpus::UtteranceRecord& record,
                                      const std::string& target, const FeatureSpec& spec,
                                      const embeddings::EmbeddingStore& store);

// Ranking persistence: {"entries":[{"model":str,"r":float},...]}.
void write_ranking(const ModelRanking& ranking, std::ostream& out);
ModelRanking read_ranking(std::istream& in);
ModelRanking load_ranking(const std::string& path);
void save_ranking(const ModelRanking& ranking, const std::string& path);

}  // namespace wermeter::proxy

#endif  // WERMETER_PROXY_HPP
