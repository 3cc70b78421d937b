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

#include "wermeter/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "wermeter/error.hpp"
#include "wermeter/rng.hpp"

namespace wermeter::corpus {

namespace {

using nlohmann::ordered_json;

void validate_record(const UtteranceRecord& rec, std::size_t line_no) {
  if (rec.id.empty()) {
    throw ValidationError("manifest line " + std::to_string(line_no) + ": empty id");
  }
  if (rec.hypotheses.empty()) {
    throw ValidationError("manifest line " + std::to_string(line_no) + ": record '" +
                          rec.id + "' has no hypotheses");
  }
  for (const auto& [model, key] : rec.text_embedding_keys) {
    if (!rec.hypotheses.contains(model)) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": record '" +
                            rec.id + "' has text embedding key for unknown model '" +
                            model + "'");
    }
  }
}

}  // namespace

Corpus parse_manifest(std::istream& in, const std::string& name, CorpusKind kind) {
  Corpus corpus;
  corpus.name = name;
  corpus.kind = kind;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": not a JSON object");
    }
    UtteranceRecord rec;
    try {
      rec.id = obj.at("id").get<std::string>();
      rec.dataset = obj.at("dataset").get<std::string>();
      for (const auto& [model, text] : obj.at("hypotheses").items()) {
        rec.hypotheses[model] = text.get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line_no) +
                       ": missing or malformed required field (id, dataset, hypotheses): " +
                       e.what());
    }
    if (obj.contains("reference") && !obj["reference"].is_null()) {
      rec.reference = obj["reference"].get<std::string>();
    }
    if (obj.contains("speech_emb") && !obj["speech_emb"].is_null()) {
      rec.speech_embedding_key = obj["speech_emb"].get<std::string>();
    }
    if (obj.contains("text_embs") && !obj["text_embs"].is_null()) {
      for (const auto& [model, key] : obj["text_embs"].items()) {
        rec.text_embedding_keys[model] = key.get<std::string>();
      }
    }
    validate_record(rec, line_no);
    if (!seen_ids.insert(rec.id).second) {
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": duplicate id '" + rec.id + "'");
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

void write_manifest(const Corpus& corpus, std::ostream& out) {
  for (const auto& rec : corpus.records) {
    ordered_json obj;
    obj["id"] = rec.id;
    obj["dataset"] = rec.dataset;
    obj["reference"] = rec.reference ? ordered_json(*rec.reference) : ordered_json(nullptr);
    obj["hypotheses"] = ordered_json::object();
    for (const auto& [model, text] : rec.hypotheses) obj["hypotheses"][model] = text;
    obj["speech_emb"] = rec.speech_embedding_key ? ordered_json(*rec.speech_embedding_key)
                                                 : ordered_json(nullptr);
    obj["text_embs"] = ordered_json::object();
    for (const auto& [model, key] : rec.text_embedding_keys) obj["text_embs"][model] = key;
    out << obj.dump() << '\n';
  }
}

Corpus load_manifest(const std::string& path, CorpusKind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path);
  std::string name = path;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_manifest(in, name, kind);
}

void save_manifest(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  write_manifest(corpus, out);
}

void write_truth_log(const std::vector<TruthRecord>& truth, std::ostream& out) {
  for (const auto& t : truth) {
    ordered_json obj;
    obj["id"] = t.id;
    obj["model_id"] = t.model_id;
    obj["true_sub"] = t.true_sub;
    obj["true_ins"] = t.true_ins;
    obj["true_del"] = t.true_del;
    out << obj.dump() << '\n';
  }
}

std::vector<TruthRecord> parse_truth_log(std::istream& in) {
  std::vector<TruthRecord> truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      TruthRecord t;
      t.id = obj.at("id").get<std::string>();
      t.model_id = obj.at("model_id").get<std::string>();
      t.true_sub = obj.at("true_sub").get<std::int64_t>();
      t.true_ins = obj.at("true_ins").get<std::int64_t>();
      t.true_del = obj.at("true_del").get<std::int64_t>();
      truth.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("truth log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return truth;
}

std::pair<Corpus, Corpus> split_train_test(const Corpus& corpus, double test_fraction,
                                           std::uint64_t seed) {
  if (corpus.empty()) throw ValidationError("split_train_test: empty corpus");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("split_train_test: test_fraction must be in (0,1)");
  }
  const std::size_t n = corpus.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);

  const auto test_n = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < test_n; ++i) in_test[idx[i]] = true;

  Corpus train, test;
  train.name = corpus.name + "-train";
  test.name = corpus.name + "-test";
  train.kind = test.kind = corpus.kind;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).records.push_back(corpus.records[i]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<LeaveOneOutFold> leave_one_out(const std::vector<Corpus>& benchmark_corpora) {
  if (benchmark_corpora.size() < 2) {
    throw ValidationError("leave_one_out: need at least 2 corpora");
  }
  std::vector<LeaveOneOutFold> folds;
  folds.reserve(benchmark_corpora.size());
  for (std::size_t k = 0; k < benchmark_corpora.size(); ++k) {
    LeaveOneOutFold fold;
    fold.held_out = &benchmark_corpora[k];
    for (std::size_t i = 0; i < benchmark_corpora.size(); ++i) {
      if (i != k) fold.train.push_back(&benchmark_corpora[i]);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

namespace {

void check_rates(const SynthChannelConfig& cfg) {
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!in_unit(cfg.sub_rate) || !in_unit(cfg.ins_rate) || !in_unit(cfg.del_rate)) {
    throw ValidationError("synthetic channel: rates must lie in [0,1]");
  }
  if (cfg.sub_rate + cfg.del_rate > 1.0) {
    throw ValidationError("synthetic channel: sub_rate + del_rate must be <= 1");
  }
  if (cfg.sentence_len_range.first > cfg.sentence_len_range.second) {
    throw ValidationError("synthetic channel: sentence length min > max");
  }
  if (cfg.vocab_size == 0) throw ValidationError("synthetic channel: vocab_size must be > 0");
}

std::string render_token(std::uint64_t k) { return "w" + std::to_string(k); }

}  // namespace

SyntheticCorpus generate_synthetic(const SynthChannelConfig& cfg,
                                   std::size_t n_utterances,
                                   const std::map<std::string, SynthChannelConfig>& channels,
                                   const std::string& name, CorpusKind kind) {
  if (n_utterances == 0) throw ValidationError("generate_synthetic: n_utterances must be > 0");
  check_rates(cfg);
  for (const auto& [model, ch] : channels) check_rates(ch);

  SyntheticCorpus out;
  out.corpus.name = name;
  out.corpus.kind = kind;
  out.corpus.records.reserve(n_utterances);

  const Rng ref_root(cfg.seed);
  for (std::size_t i = 0; i < n_utterances; ++i) {
    Rng ref_rng = ref_root.stream(i);
    const std::uint32_t lo = cfg.sentence_len_range.first;
    const std::uint32_t hi = cfg.sentence_len_range.second;
    const std::size_t len = lo + ref_rng.uniform_index(hi - lo + 1);

    std::vector<std::uint64_t> ref_tokens(len);
    for (auto& t : ref_tokens) t = ref_rng.uniform_u64(cfg.vocab_size);

    UtteranceRecord rec;
    rec.id = name + "-" + std::to_string(i);
    rec.dataset = name;
    std::string ref_text;
    for (std::size_t t = 0; t < len; ++t) {
      if (t > 0) ref_text.push_back(' ');
      ref_text += render_token(ref_tokens[t]);
    }
    rec.reference = ref_text;

    for (const auto& [model, ch] : channels) {
      Rng ch_rng = Rng(ch.seed).stream(i);
      TruthRecord truth{rec.id, model, 0, 0, 0};
      std::vector<std::uint64_t> hyp_tokens;
      hyp_tokens.reserve(len + 2);
      auto maybe_insert = [&] {
        if (ch.ins_rate > 0.0 && ch_rng.uniform_real() < ch.ins_rate) {
          hyp_tokens.push_back(ch_rng.uniform_u64(ch.vocab_size));
          ++truth.true_ins;
        }
      };
      for (std::size_t t = 0; t < len; ++t) {
        maybe_insert();
        const double u = ch_rng.uniform_real();
        if (u < ch.del_rate) {
          ++truth.true_del;
        } else if (u < ch.del_rate + ch.sub_rate) {
          // Substitute with a guaranteed-different token.
          std::uint64_t repl = ref_tokens[t];
          if (ch.vocab_size > 1) {
            repl = ch_rng.uniform_u64(ch.vocab_size - 1);
            if (repl >= ref_tokens[t]) ++repl;
          }
          hyp_tokens.push_back(repl);
          ++truth.true_sub;
        } else {
          hyp_tokens.push_back(ref_tokens[t]);
        }
      }
      maybe_insert();

      std::string hyp_text;
      for (std::size_t t = 0; t < hyp_tokens.size(); ++t) {
        if (t > 0) hyp_text.push_back(' ');
        hyp_text += render_token(hyp_tokens[t]);
      }
      rec.hypotheses[model] = hyp_text;
      out.truth.push_back(std::move(truth));
    }
    out.corpus.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace wermeter::corpus
