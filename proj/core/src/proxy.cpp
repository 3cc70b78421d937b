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

#include "wermeter/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "wermeter/error.hpp"

namespace wermeter::proxy {

namespace {

using nlohmann::ordered_json;

}  // namespace

ModelRanking profile_models(const std::vector<corpus::Corpus>& calibration,
                            const std::vector<std::string>& model_ids) {
  if (calibration.empty()) throw ValidationError("profile_models: no calibration corpora");
  if (model_ids.empty()) throw ValidationError("profile_models: no models");

  ModelRanking ranking;
  for (const auto& model : model_ids) {
    double r_sum = 0.0;
    for (const auto& corpus : calibration) {
      std::int64_t errors = 0, ref_words = 0;
      for (const auto& rec : corpus.records) {
        if (!rec.reference) {
          throw ValidationError("profile_models: record '" + rec.id + "' has no reference");
        }
        const auto it = rec.hypotheses.find(model);
        if (it == rec.hypotheses.end()) {
          throw ValidationError("profile_models: model '" + model +
                                "' has no hypothesis for utterance '" + rec.id + "'");
        }
        const auto stats = metrics::word_align(*rec.reference, it->second);
        errors += stats.errors();
        ref_words += stats.ref_len;
      }
      // Dataset-level pooled WER, as a percent.
      const double denom = ref_words > 0 ? static_cast<double>(ref_words) : 1.0;
      r_sum += 100.0 * static_cast<double>(errors) / denom;
    }
    ranking.entries.push_back({model, r_sum / static_cast<double>(calibration.size())});
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(),
            [](const ModelRanking::Entry& a, const ModelRanking::Entry& b) {
              if (a.r != b.r) return a.r < b.r;
              return a.model < b.model;
            });
  return ranking;
}

std::vector<std::string> select_proxy(const ModelRanking& ranking, const std::string& target,
                                      std::size_t n) {
  std::vector<std::string> picked;
  for (const auto& entry : ranking.entries) {
    if (entry.model == target) continue;
    picked.push_back(entry.model);
    if (picked.size() == n) return picked;
  }
  throw ValidationError("select_proxy: ranking has fewer than " + std::to_string(n) +
                        " models besides '" + target + "'");
}

std::vector<std::string> select_mixed_proxies(const ModelRanking& ranking,
                                              const std::string& target, std::size_t n) {
  std::vector<std::string> eligible;
  for (const auto& entry : ranking.entries) {
    if (entry.model != target) eligible.push_back(entry.model);
  }
  if (eligible.size() < n) {
    throw ValidationError("select_mixed_proxies: ranking has fewer than " + std::to_string(n) +
                          " models besides '" + target + "'");
  }
  if (n == 0) return {};
  if (n == 1) return {eligible.front()};
  std::vector<std::string> picked;
  const std::size_t span = eligible.size() - 1;
  std::size_t prev = eligible.size();  // sentinel
  for (std::size_t i = 0; i < n; ++i) {
    // Evenly spaced over the quality range: best, worst, and between.
    std::size_t at = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(span) /
                     static_cast<double>(n - 1)));
    if (prev != eligible.size() && at <= prev) at = prev + 1;  // keep indices strictly rising
    picked.push_back(eligible[at]);
    prev = at;
  }
  return picked;
}

std::vector<double> assemble_features(const corpus::UtteranceRecord& record,
                                      const std::string& target, const FeatureSpec& spec,
                                      const embeddings::EmbeddingStore& store) {
  if (!spec.use_similarity && spec.proxies.empty()) {
    throw ValidationError("assemble_features: feature spec is empty");
  }
  const auto target_hyp = record.hypotheses.find(target);
  if (target_hyp == record.hypotheses.end()) {
    throw ValidationError("assemble_features: record '" + record.id +
                          "' has no hypothesis for target '" + target + "'");
  }

  std::vector<double> z;
  z.reserve(spec.dim());
  if (spec.use_similarity) {
    if (!record.speech_embedding_key) {
      throw ValidationError("assemble_features: record '" + record.id +
                            "' has no speech embedding key");
    }
    const auto text_key = record.text_embedding_keys.find(target);
    if (text_key == record.text_embedding_keys.end()) {
      throw ValidationError("assemble_features: record '" + record.id +
                            "' has no text embedding key for target '" + target + "'");
    }
    z.push_back(embeddings::cosine(store.at(*record.speech_embedding_key),
                                   store.at(text_key->second)));
  }
  for (const auto& proxy_model : spec.proxies) {
    const auto proxy_hyp = record.hypotheses.find(proxy_model);
    if (proxy_hyp == record.hypotheses.end()) {
      throw ValidationError("assemble_features: record '" + record.id +
                            "' has no hypothesis for proxy '" + proxy_model + "'");
    }
    const auto rates = metrics::proxy_metrics(target_hyp->second, proxy_hyp->second,
                                              spec.proxy_denominator);
    z.push_back(spec.metric_kind == FeatureSpec::MetricKind::kWord ? rates.wer : rates.cer);
  }
  return z;
}

void write_ranking(const ModelRanking& ranking, std::ostream& out) {
  ordered_json doc;
  doc["entries"] = ordered_json::array();
  for (const auto& entry : ranking.entries) {
    doc["entries"].push_back({{"model", entry.model}, {"r", entry.r}});
  }
  out << doc.dump(2) << '\n';
}

ModelRanking read_ranking(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("ranking file is not valid JSON: ") + e.what());
  }
  ModelRanking ranking;
  try {
    for (const auto& entry : doc.at("entries")) {
      ranking.entries.push_back(
          {entry.at("model").get<std::string>(), entry.at("r").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ranking file malformed: ") + e.what());
  }
  for (const auto& entry : ranking.entries) {
    if (entry.r < 0.0) throw ValidationError("ranking: r must be >= 0");
  }
  if (!std::is_sorted(ranking.entries.begin(), ranking.entries.end(),
                      [](const auto& a, const auto& b) { return a.r < b.r; })) {
    std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                     [](const auto& a, const auto& b) { return a.r < b.r; });
  }
  return ranking;
}

ModelRanking load_ranking(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ranking: " + path);
  return read_ranking(in);
}

void save_ranking(const ModelRanking& ranking, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open ranking for writing: " + path);
  write_ranking(ranking, out);
}

}  // namespace wermeter::proxy
