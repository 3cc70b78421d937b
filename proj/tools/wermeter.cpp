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
// wermeter: reference-free ASR quality estimation pipeline.
// Subcommands: validate, features, train, predict, evaluate, ablate,
// scale, diverge, synth. Configuration is a single JSON file; flags only
// select the command, the config path, and seed/output/jobs overrides.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
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

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wermeter;

namespace {

// ---------------------------------------------------------------------------
// Config schema. Every key is listed here; --help prints this table and the
// validator rejects anything not in it (with a closest-match suggestion).

const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"", {"paths", "experiment", "features", "stack", "search", "remote", "synth",
            "ablation", "scale", "diverge", "jobs"}},
      {"paths",
       {"benchmark_manifests", "wild_manifests", "calibration_manifests", "embedding_store",
        "ranking", "truth_logs", "output_dir", "model_artifact"}},
      {"experiment",
       {"source_model", "target_model", "target_kind", "norm_denominator", "seeds", "folds",
        "test_fraction", "train_size_cap"}},
      {"features",
       {"use_similarity", "proxies", "n_proxies", "mixed_proxies", "metric_kind",
        "proxy_denominator"}},
      {"stack",
       {"rf_n_estimators", "rf_max_depth", "rf_min_samples_split", "rf_min_samples_leaf",
        "gbr_n_estimators", "gbr_learning_rate", "gbr_max_depth", "gbr_min_impurity_decrease",
        "hgb_max_iter", "hgb_learning_rate", "hgb_max_depth", "hgb_loss", "ridge_alpha",
        "passthrough", "folds"}},
      {"search", {"enabled", "n_iter", "folds", "seed"}},
      {"remote", {"endpoint", "max_in_flight"}},
      {"synth",
       {"name", "kind", "n_utterances", "vocab_size", "sentence_len_min", "sentence_len_max",
        "seed", "channels", "noise_sigma"}},
      {"ablation", {"variants"}},
      {"scale", {"sizes"}},
      {"diverge", {"cmd_order", "cmd_normalize", "group_a", "group_b"}},
  };
  return schema;
}

std::vector<std::string> all_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [scope, names] : config_schema()) {
    if (scope.empty()) continue;
    keys.push_back(scope);
    for (const auto& name : names) keys.push_back(scope + "." + name);
  }
  keys.push_back("jobs");
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  return static_cast<std::size_t>(
      metrics::align(metrics::char_tokens(a), metrics::char_tokens(b)).errors());
}

void reject_unknown_keys(const json& obj, const std::string& scope) {
  const auto& schema = config_schema();
  const auto it = schema.find(scope);
  if (it == schema.end()) return;
  const auto& known = it->second;
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    std::string best;
    std::size_t best_dist = std::string::npos;
    for (const auto& candidate : known) {
      const std::size_t d = edit_distance(key, candidate);
      if (d < best_dist) {
        best_dist = d;
        best = candidate;
      }
    }
    std::string where = scope.empty() ? "top level" : "section '" + scope + "'";
    std::string msg = "unknown config key '" + key + "' at " + where;
    if (!best.empty() && best_dist <= best.size() / 2 + 1) {
      msg += "; did you mean '" + best + "'?";
    }
    throw ValidationError(msg);
  }
}

struct SynthChannelCfg {
  double sub_rate = 0.0;
  double ins_rate = 0.0;
  double del_rate = 0.0;
  std::optional<std::uint64_t> seed;
};

struct AblationVariantCfg {
  std::string name;
  bool use_similarity = true;
  int n_proxies = 1;
  bool mixed = false;
};

struct Config {
  // paths
  std::vector<std::string> benchmark_manifests;
  std::vector<std::string> wild_manifests;
  std::vector<std::string> calibration_manifests;
  std::optional<std::string> embedding_store;
  std::optional<std::string> ranking_path;
  std::vector<std::string> truth_logs;
  std::string output_dir = "out";
  std::optional<std::string> model_artifact;
  // experiment
  harness::ExperimentConfig experiment;
  // features
  bool use_similarity = true;
  std::vector<std::string> explicit_proxies;
  int n_proxies = 1;
  bool mixed_proxies = false;
  proxy::FeatureSpec::MetricKind metric_kind = proxy::FeatureSpec::MetricKind::kWord;
  metrics::Denominator proxy_denominator = metrics::Denominator::kReference;
  // search
  bool search_enabled = false;
  regression::SearchSpace search;
  // remote
  std::optional<std::string> remote_endpoint;
  // synth
  std::string synth_name = "synthetic";
  corpus::CorpusKind synth_kind = corpus::CorpusKind::kSynthetic;
  std::size_t synth_n = 1000;
  std::uint32_t synth_vocab = 100;
  std::uint32_t synth_len_min = 5;
  std::uint32_t synth_len_max = 15;
  std::uint64_t synth_seed = 1;
  std::map<std::string, SynthChannelCfg> synth_channels;
  std::optional<double> synth_noise_sigma;
  // ablation / scale / diverge
  std::vector<AblationVariantCfg> ablation_variants;
  std::vector<std::size_t> scale_sizes;
  std::size_t cmd_order = 5;
  bool cmd_normalize = false;
  std::string diverge_group_a;
  std::string diverge_group_b;
  int jobs = 1;

  std::string path;  // config file location, for relative paths
};

harness::TargetKind parse_target_kind(const std::string& s) {
  if (s == "word_count") return harness::TargetKind::kWordCount;
  if (s == "char_count") return harness::TargetKind::kCharCount;
  if (s == "wer") return harness::TargetKind::kWer;
  if (s == "cer") return harness::TargetKind::kCer;
  if (s == "sub_count") return harness::TargetKind::kSubCount;
  if (s == "ins_count") return harness::TargetKind::kInsCount;
  if (s == "del_count") return harness::TargetKind::kDelCount;
  throw ValidationError("experiment.target_kind: unknown value '" + s + "'");
}

Config load_config(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ValidationError("cannot open config: " + config_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("config is not valid JSON: " + std::string(e.what()));
  }
  reject_unknown_keys(doc, "");

  Config cfg;
  cfg.path = config_path;

  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    reject_unknown_keys(p, "paths");
    if (p.contains("benchmark_manifests")) {
      cfg.benchmark_manifests = p["benchmark_manifests"].get<std::vector<std::string>>();
    }
    if (p.contains("wild_manifests")) {
      cfg.wild_manifests = p["wild_manifests"].get<std::vector<std::string>>();
    }
    if (p.contains("calibration_manifests")) {
      cfg.calibration_manifests = p["calibration_manifests"].get<std::vector<std::string>>();
    }
    if (p.contains("embedding_store") && !p["embedding_store"].is_null()) {
      cfg.embedding_store = p["embedding_store"].get<std::string>();
    }
    if (p.contains("ranking") && !p["ranking"].is_null()) {
      cfg.ranking_path = p["ranking"].get<std::string>();
    }
    if (p.contains("truth_logs")) {
      cfg.truth_logs = p["truth_logs"].get<std::vector<std::string>>();
    }
    if (p.contains("output_dir")) cfg.output_dir = p["output_dir"].get<std::string>();
    if (p.contains("model_artifact") && !p["model_artifact"].is_null()) {
      cfg.model_artifact = p["model_artifact"].get<std::string>();
    }
  }

  if (doc.contains("experiment")) {
    const auto& e = doc["experiment"];
    reject_unknown_keys(e, "experiment");
    auto& exp = cfg.experiment;
    if (e.contains("source_model")) exp.source_model = e["source_model"].get<std::string>();
    if (e.contains("target_model")) exp.target_model = e["target_model"].get<std::string>();
    if (e.contains("target_kind")) {
      exp.target_kind = parse_target_kind(e["target_kind"].get<std::string>());
    }
    if (e.contains("norm_denominator")) {
      const auto v = e["norm_denominator"].get<std::string>();
      if (v == "hypothesis") exp.norm_denominator = metrics::Denominator::kHypothesis;
      else if (v == "reference") exp.norm_denominator = metrics::Denominator::kReference;
      else throw ValidationError("experiment.norm_denominator: unknown value '" + v + "'");
    }
    if (e.contains("seeds")) exp.seeds = e["seeds"].get<std::vector<std::uint64_t>>();
    if (e.contains("folds")) exp.folds = e["folds"].get<int>();
    if (e.contains("test_fraction")) exp.test_fraction = e["test_fraction"].get<double>();
    if (e.contains("train_size_cap") && !e["train_size_cap"].is_null()) {
      exp.train_size_cap = e["train_size_cap"].get<std::size_t>();
    }
  }

  if (doc.contains("features")) {
    const auto& f = doc["features"];
    reject_unknown_keys(f, "features");
    if (f.contains("use_similarity")) cfg.use_similarity = f["use_similarity"].get<bool>();
    if (f.contains("proxies")) cfg.explicit_proxies = f["proxies"].get<std::vector<std::string>>();
    if (f.contains("n_proxies")) cfg.n_proxies = f["n_proxies"].get<int>();
    if (f.contains("mixed_proxies")) cfg.mixed_proxies = f["mixed_proxies"].get<bool>();
    if (f.contains("metric_kind")) {
      const auto v = f["metric_kind"].get<std::string>();
      if (v == "word") cfg.metric_kind = proxy::FeatureSpec::MetricKind::kWord;
      else if (v == "char") cfg.metric_kind = proxy::FeatureSpec::MetricKind::kChar;
      else throw ValidationError("features.metric_kind: unknown value '" + v + "'");
    }
    if (f.contains("proxy_denominator")) {
      const auto v = f["proxy_denominator"].get<std::string>();
      if (v == "proxy") cfg.proxy_denominator = metrics::Denominator::kReference;
      else if (v == "hypothesis") cfg.proxy_denominator = metrics::Denominator::kHypothesis;
      else throw ValidationError("features.proxy_denominator: unknown value '" + v + "'");
    }
  }

  if (doc.contains("stack")) {
    const auto& s = doc["stack"];
    reject_unknown_keys(s, "stack");
    regression::ForestParams rf;
    regression::GbrParams gbr;
    regression::HgbParams hgb;
    rf.n_estimators = s.value("rf_n_estimators", 100);
    rf.tree.max_depth = s.value("rf_max_depth", 15);
    rf.tree.min_samples_split = s.value("rf_min_samples_split", 2);
    rf.tree.min_samples_leaf = s.value("rf_min_samples_leaf", 1);
    gbr.n_estimators = s.value("gbr_n_estimators", 100);
    gbr.learning_rate = s.value("gbr_learning_rate", 0.1);
    gbr.tree.max_depth = s.value("gbr_max_depth", 3);
    gbr.tree.min_impurity_decrease = s.value("gbr_min_impurity_decrease", 0.0);
    hgb.max_iter = s.value("hgb_max_iter", 100);
    hgb.learning_rate = s.value("hgb_learning_rate", 0.1);
    hgb.max_depth = s.value("hgb_max_depth", 7);
    const std::string loss = s.value("hgb_loss", std::string("poisson"));
    if (loss == "poisson") hgb.loss = regression::HgbLoss::kPoisson;
    else if (loss == "squared") hgb.loss = regression::HgbLoss::kSquared;
    else throw ValidationError("stack.hgb_loss: unknown value '" + loss + "'");
    auto& stack = cfg.experiment.stack;
    stack.bases = {regression::BaseSpec::make_forest(rf), regression::BaseSpec::make_gbr(gbr),
                   regression::BaseSpec::make_hgb(hgb)};
    stack.ridge_alpha = s.value("ridge_alpha", 1.0);
    stack.passthrough = s.value("passthrough", true);
    stack.folds = s.value("folds", 5);
  } else {
    auto& stack = cfg.experiment.stack;
    stack.bases = {regression::BaseSpec::make_forest({}), regression::BaseSpec::make_gbr({}),
                   regression::BaseSpec::make_hgb({})};
  }

  if (doc.contains("search")) {
    const auto& s = doc["search"];
    reject_unknown_keys(s, "search");
    cfg.search_enabled = s.value("enabled", false);
    cfg.search.n_iter = s.value("n_iter", 25);
    cfg.search.folds = s.value("folds", 5);
    cfg.search.seed = s.value("seed", 0);
  }

  if (doc.contains("remote")) {
    const auto& r = doc["remote"];
    reject_unknown_keys(r, "remote");
    if (r.contains("endpoint") && !r["endpoint"].is_null()) {
      cfg.remote_endpoint = r["endpoint"].get<std::string>();
    }
  }

  if (doc.contains("synth")) {
    const auto& s = doc["synth"];
    reject_unknown_keys(s, "synth");
    cfg.synth_name = s.value("name", std::string("synthetic"));
    const std::string kind = s.value("kind", std::string("synthetic"));
    if (kind == "benchmark") cfg.synth_kind = corpus::CorpusKind::kBenchmark;
    else if (kind == "wild") cfg.synth_kind = corpus::CorpusKind::kWild;
    else if (kind == "synthetic") cfg.synth_kind = corpus::CorpusKind::kSynthetic;
    else throw ValidationError("synth.kind: unknown value '" + kind + "'");
    cfg.synth_n = s.value("n_utterances", 1000);
    cfg.synth_vocab = s.value("vocab_size", 100);
    cfg.synth_len_min = s.value("sentence_len_min", 5);
    cfg.synth_len_max = s.value("sentence_len_max", 15);
    cfg.synth_seed = s.value("seed", 1);
    if (s.contains("noise_sigma") && !s["noise_sigma"].is_null()) {
      cfg.synth_noise_sigma = s["noise_sigma"].get<double>();
    }
    if (s.contains("channels")) {
      for (const auto& [model, ch] : s["channels"].items()) {
        SynthChannelCfg channel;
        channel.sub_rate = ch.value("sub_rate", 0.0);
        channel.ins_rate = ch.value("ins_rate", 0.0);
        channel.del_rate = ch.value("del_rate", 0.0);
        if (ch.contains("seed")) channel.seed = ch["seed"].get<std::uint64_t>();
        cfg.synth_channels[model] = channel;
      }
    }
  }

  if (doc.contains("ablation")) {
    const auto& a = doc["ablation"];
    reject_unknown_keys(a, "ablation");
    if (a.contains("variants")) {
      for (const auto& v : a["variants"]) {
        AblationVariantCfg variant;
        variant.name = v.at("name").get<std::string>();
        variant.use_similarity = v.value("use_similarity", true);
        variant.n_proxies = v.value("n_proxies", 1);
        variant.mixed = v.value("mixed", false);
        cfg.ablation_variants.push_back(std::move(variant));
      }
    }
  }

  if (doc.contains("scale")) {
    const auto& s = doc["scale"];
    reject_unknown_keys(s, "scale");
    if (s.contains("sizes")) cfg.scale_sizes = s["sizes"].get<std::vector<std::size_t>>();
  }

  if (doc.contains("diverge")) {
    const auto& d = doc["diverge"];
    reject_unknown_keys(d, "diverge");
    cfg.cmd_order = d.value("cmd_order", 5);
    cfg.cmd_normalize = d.value("cmd_normalize", false);
    cfg.diverge_group_a = d.value("group_a", std::string());
    cfg.diverge_group_b = d.value("group_b", std::string());
  }

  if (doc.contains("jobs")) cfg.jobs = doc["jobs"].get<int>();

  // Environment override for the seed suite.
  if (const char* env_seed = std::getenv("WERMETER_SEED")) {
    cfg.experiment.seeds = {std::stoull(env_seed)};
    cfg.search.seed = std::stoull(env_seed);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared loading helpers

std::vector<corpus::Corpus> load_corpora(const std::vector<std::string>& paths,
                                         corpus::CorpusKind kind) {
  std::vector<corpus::Corpus> corpora;
  for (const auto& p : paths) corpora.push_back(corpus::load_manifest(p, kind));
  return corpora;
}

embeddings::EmbeddingStore load_store_or_empty(const Config& cfg) {
  if (cfg.embedding_store) return embeddings::load_store(*cfg.embedding_store);
  return embeddings::EmbeddingStore{};
}

proxy::ModelRanking resolve_ranking(const Config& cfg,
                                    const std::vector<corpus::Corpus>& benchmarks) {
  if (cfg.ranking_path) return proxy::load_ranking(*cfg.ranking_path);
  // Profile on calibration manifests when given, else on the benchmarks.
  std::vector<corpus::Corpus> calibration =
      cfg.calibration_manifests.empty()
          ? benchmarks
          : load_corpora(cfg.calibration_manifests, corpus::CorpusKind::kBenchmark);
  if (cfg.calibration_manifests.empty() && !benchmarks.empty()) {
    std::cerr << "warning: profiling proxies on the evaluation benchmarks themselves\n";
  }
  std::set<std::string> models;
  for (const auto& c : calibration) {
    for (const auto& rec : c.records) {
      for (const auto& [model, hyp] : rec.hypotheses) models.insert(model);
    }
  }
  const auto overlap = harness::calibration_overlap(calibration, benchmarks);
  if (!cfg.calibration_manifests.empty() && !overlap.empty()) {
    std::cerr << "warning: calibration and evaluation corpora overlap:";
    for (const auto& name : overlap) std::cerr << ' ' << name;
    std::cerr << '\n';
  }
  return proxy::profile_models(calibration,
                               std::vector<std::string>(models.begin(), models.end()));
}

std::vector<std::string> proxies_excluding(const proxy::ModelRanking& ranking,
                                           const std::set<std::string>& excluded,
                                           std::size_t n, bool mixed) {
  proxy::ModelRanking filtered;
  for (const auto& e : ranking.entries) {
    if (!excluded.contains(e.model)) filtered.entries.push_back(e);
  }
  if (filtered.entries.size() < n) {
    throw ValidationError("not enough eligible proxy models in the ranking");
  }
  // Target already excluded; pass a name that cannot collide.
  const std::string sentinel = "\x01none";
  return mixed ? proxy::select_mixed_proxies(filtered, sentinel, n)
               : proxy::select_proxy(filtered, sentinel, n);
}

proxy::FeatureSpec resolve_feature_spec(const Config& cfg,
                                        const proxy::ModelRanking& ranking) {
  proxy::FeatureSpec spec;
  spec.use_similarity = cfg.use_similarity;
  spec.metric_kind = cfg.metric_kind;
  spec.proxy_denominator = cfg.proxy_denominator;
  if (!cfg.explicit_proxies.empty()) {
    spec.proxies = cfg.explicit_proxies;
  } else if (cfg.n_proxies > 0) {
    std::set<std::string> excluded{cfg.experiment.source_model};
    if (!cfg.experiment.target_model.empty()) excluded.insert(cfg.experiment.target_model);
    spec.proxies = proxies_excluding(ranking, excluded,
                                     static_cast<std::size_t>(cfg.n_proxies),
                                     cfg.mixed_proxies);
  }
  return spec;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

// Wall-clock and config snapshot live in a sidecar so data outputs stay
// byte-identical across runs.
void write_metadata(const Config& cfg, const std::string& command,
                    double wall_seconds, const std::map<std::string, std::string>& extra) {
  json meta;
  meta["command"] = command;
  meta["config"] = cfg.path;
  meta["wall_clock_s"] = wall_seconds;
  meta["seeds"] = cfg.experiment.seeds;
  for (const auto& [k, v] : extra) meta[k] = v;
  write_text(fs::path(cfg.output_dir) / (command + "_metadata.json"), meta.dump(2) + "\n");
}

harness::EvaluationReport run_over_seeds(
    const Config& cfg,
    const std::function<harness::EvaluationReport(std::uint64_t)>& one_seed) {
  harness::EvaluationReport report;
  for (const std::uint64_t seed : cfg.experiment.seeds) report.append(one_seed(seed));
  return report;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_validate(const Config& cfg) {
  std::vector<std::string> problems;
  auto check_file = [&](const std::string& label, const std::string& path) {
    if (!fs::exists(path)) problems.push_back(label + ": missing file '" + path + "'");
  };
  for (const auto& p : cfg.benchmark_manifests) check_file("paths.benchmark_manifests", p);
  for (const auto& p : cfg.wild_manifests) check_file("paths.wild_manifests", p);
  for (const auto& p : cfg.calibration_manifests) check_file("paths.calibration_manifests", p);
  for (const auto& p : cfg.truth_logs) check_file("paths.truth_logs", p);
  if (cfg.embedding_store) check_file("paths.embedding_store", *cfg.embedding_store);
  if (cfg.ranking_path) check_file("paths.ranking", *cfg.ranking_path);

  if (problems.empty()) {
    // Deeper checks only when files exist: manifests parse, store dims agree.
    try {
      const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
      load_corpora(cfg.wild_manifests, corpus::CorpusKind::kWild);
      if (cfg.embedding_store) {
        const auto store = embeddings::load_store(*cfg.embedding_store);
        for (const auto& c : benchmarks) {
          for (const auto& rec : c.records) {
            if (rec.speech_embedding_key && !store.contains(*rec.speech_embedding_key)) {
              problems.push_back("embedding key '" + *rec.speech_embedding_key +
                                 "' of record '" + rec.id + "' not in store");
            }
          }
        }
      }
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (!cfg.experiment.seeds.empty() && cfg.experiment.seeds.empty()) {
    problems.push_back("experiment.seeds must be nonempty");
  }
  for (const auto& p : problems) std::cerr << "error: " << p << '\n';
  std::cout << (problems.empty() ? "config ok" : "config invalid: " +
                                                     std::to_string(problems.size()) +
                                                     " problem(s)")
            << '\n';
  return problems.empty() ? 0 : 1;
}

int cmd_synth(const Config& cfg) {
  corpus::SynthChannelConfig base;
  base.vocab_size = cfg.synth_vocab;
  base.sentence_len_range = {cfg.synth_len_min, cfg.synth_len_max};
  base.seed = cfg.synth_seed;
  std::map<std::string, corpus::SynthChannelConfig> channels;
  std::size_t channel_index = 0;
  for (const auto& [model, ch] : cfg.synth_channels) {
    corpus::SynthChannelConfig c = base;
    c.sub_rate = ch.sub_rate;
    c.ins_rate = ch.ins_rate;
    c.del_rate = ch.del_rate;
    c.seed = ch.seed.value_or(cfg.synth_seed + 1000 + channel_index);
    channels[model] = c;
    ++channel_index;
  }
  if (channels.empty()) throw ValidationError("synth: no channels configured");

  auto synthetic = corpus::generate_synthetic(base, cfg.synth_n, channels, cfg.synth_name,
                                              cfg.synth_kind);
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  if (cfg.synth_noise_sigma) {
    const auto store =
        harness::build_similarity_store(synthetic, *cfg.synth_noise_sigma, cfg.synth_seed + 7);
    embeddings::save_store(store, (dir / (cfg.synth_name + ".emb")).string());
  }
  corpus::save_manifest(synthetic.corpus, (dir / (cfg.synth_name + ".jsonl")).string());
  std::ofstream truth_out(dir / (cfg.synth_name + ".truth.jsonl"));
  corpus::write_truth_log(synthetic.truth, truth_out);
  std::cout << "synth: wrote " << synthetic.corpus.size() << " utterances to " << cfg.output_dir
            << '\n';
  return 0;
}

int cmd_features(const Config& cfg) {
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto store = load_store_or_empty(cfg);
  const auto ranking = resolve_ranking(cfg, benchmarks);
  const auto spec = resolve_feature_spec(cfg, ranking);

  std::ostringstream out;
  out << "id,model";
  if (spec.use_similarity) out << ",similarity";
  for (std::size_t i = 0; i < spec.proxies.size(); ++i) out << ",proxy_" << spec.proxies[i];
  out << ",target\n";
  const std::string model = cfg.experiment.source_model;
  for (const auto& c : benchmarks) {
    for (const auto& rec : c.records) {
      const auto z = proxy::assemble_features(rec, model, spec, store);
      out << rec.id << ',' << model;
      for (double v : z) out << ',' << report::format_fixed(v, 6);
      if (rec.reference) {
        const auto stats =
            spec.metric_kind == proxy::FeatureSpec::MetricKind::kChar
                ? metrics::char_align(*rec.reference, rec.hypotheses.at(model))
                : metrics::word_align(*rec.reference, rec.hypotheses.at(model));
        out << ',' << stats.errors();
      } else {
        out << ',';
      }
      out << '\n';
    }
  }
  write_text(fs::path(cfg.output_dir) / "features.csv", out.str());
  std::cout << "features: wrote " << (fs::path(cfg.output_dir) / "features.csv").string()
            << '\n';
  return 0;
}

int cmd_train(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto store = load_store_or_empty(cfg);
  const auto ranking = resolve_ranking(cfg, benchmarks);
  harness::ExperimentConfig exp = cfg.experiment;
  exp.feature_spec = resolve_feature_spec(cfg, ranking);

  std::vector<const corpus::Corpus*> ptrs;
  for (const auto& c : benchmarks) ptrs.push_back(&c);
  const auto table =
      harness::build_feature_table(ptrs, exp.source_model, exp, exp.feature_spec, store);

  regression::StackSpec spec = exp.stack;
  if (cfg.search_enabled) {
    regression::SearchSpace space = cfg.search;
    const auto result = regression::random_search(space, table.data, cfg.jobs);
    spec = result.best;
    std::cerr << "search: best draw " << result.best_draw << " cv_mae "
              << report::format_fixed(result.cv_mae, 4) << '\n';
  }
  const std::uint64_t seed = cfg.experiment.seeds.front();
  const auto model = regression::StackedModel::fit(table.data, spec, seed);
  const std::string artifact =
      cfg.model_artifact.value_or((fs::path(cfg.output_dir) / "model.wms").string());
  fs::create_directories(fs::path(artifact).parent_path().empty()
                             ? "."
                             : fs::path(artifact).parent_path().string());
  model.save_file(artifact);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, "train", wall, {{"artifact", artifact}});
  std::cout << "train: saved model to " << artifact << '\n';
  return 0;
}

int cmd_predict(const Config& cfg) {
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto store = load_store_or_empty(cfg);
  const auto ranking = resolve_ranking(cfg, benchmarks);
  harness::ExperimentConfig exp = cfg.experiment;
  exp.feature_spec = resolve_feature_spec(cfg, ranking);
  if (!cfg.model_artifact) throw ValidationError("predict: paths.model_artifact is required");
  const auto model = regression::StackedModel::load_file(*cfg.model_artifact);

  std::ostringstream out;
  out << "id,model,prediction\n";
  for (const auto& c : benchmarks) {
    for (const auto& rec : c.records) {
      const auto z =
          proxy::assemble_features(rec, exp.source_model, exp.feature_spec, store);
      const double pred = model.predict_row(z.data(), z.size());
      out << rec.id << ',' << exp.source_model << ',' << report::format_fixed(pred, 6) << '\n';
    }
  }
  write_text(fs::path(cfg.output_dir) / "predictions.csv", out.str());
  std::cout << "predict: wrote " << (fs::path(cfg.output_dir) / "predictions.csv").string()
            << '\n';
  return 0;
}

int cmd_evaluate(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto wild = load_corpora(cfg.wild_manifests, corpus::CorpusKind::kWild);
  const auto store = load_store_or_empty(cfg);
  const auto ranking = resolve_ranking(cfg, benchmarks);
  harness::ExperimentConfig exp = cfg.experiment;
  exp.feature_spec = resolve_feature_spec(cfg, ranking);

  const auto report = run_over_seeds(cfg, [&](std::uint64_t seed) {
    return harness::leave_one_out_eval(exp, benchmarks, wild, store, seed);
  });
  write_text(fs::path(cfg.output_dir) / "evaluate.csv", report::to_csv(report));

  // Slash-style actual/approximated table over wild datasets (aggregated
  // across folds and seeds).
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_dataset;
  for (const auto& row : report.rows) {
    if (row.actual_rate_pct && row.approx_rate_pct) {
      by_dataset[row.dataset].first.push_back(*row.actual_rate_pct);
      by_dataset[row.dataset].second.push_back(*row.approx_rate_pct);
    }
  }
  std::vector<std::string> headers;
  report::SlashRow slash_row;
  slash_row.label = exp.source_model;
  for (const auto& [dataset, pair] : by_dataset) {
    headers.push_back(dataset);
    const auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    slash_row.actual_approx_pct.emplace_back(mean(pair.first), mean(pair.second));
  }
  write_text(fs::path(cfg.output_dir) / "evaluate.md",
             report::render_slash_table(headers, {slash_row}));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, "evaluate", wall, report.metadata);
  std::cout << "evaluate: " << report.rows.size() << " rows -> " << cfg.output_dir << '\n';
  return 0;
}

int cmd_ablate(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto wild = load_corpora(cfg.wild_manifests, corpus::CorpusKind::kWild);
  const auto store = load_store_or_empty(cfg);
  const auto ranking = resolve_ranking(cfg, benchmarks);

  std::vector<harness::AblationVariant> suite;
  std::set<std::string> excluded{cfg.experiment.source_model};
  if (!cfg.experiment.target_model.empty()) excluded.insert(cfg.experiment.target_model);
  std::vector<AblationVariantCfg> variant_cfgs = cfg.ablation_variants;
  if (variant_cfgs.empty()) {
    variant_cfgs = {{"Base", true, 1, false},
                    {"w/o S", false, 1, false},
                    {"w/o PR", true, 0, false}};
  }
  for (const auto& v : variant_cfgs) {
    harness::AblationVariant variant;
    variant.name = v.name;
    variant.feature_spec.use_similarity = v.use_similarity;
    variant.feature_spec.metric_kind = cfg.metric_kind;
    variant.feature_spec.proxy_denominator = cfg.proxy_denominator;
    if (v.n_proxies > 0) {
      variant.feature_spec.proxies = proxies_excluding(
          ranking, excluded, static_cast<std::size_t>(v.n_proxies), v.mixed);
    }
    suite.push_back(std::move(variant));
  }

  harness::ExperimentConfig exp = cfg.experiment;
  const auto report = harness::ablate(suite, exp, benchmarks, wild, store);
  write_text(fs::path(cfg.output_dir) / "ablate.csv", report::to_csv(report));
  std::vector<std::string> variant_order;
  for (const auto& v : suite) variant_order.push_back(v.name);
  write_text(fs::path(cfg.output_dir) / "ablate.md",
             report::render_ablation_table(report, variant_order,
                                           {"IID", "OOD-D", "OOD-M", "OOD-D+M"}));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, "ablate", wall, report.metadata);
  std::cout << "ablate: " << report.rows.size() << " rows -> " << cfg.output_dir << '\n';
  return 0;
}

int cmd_scale(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.scale_sizes.empty()) throw ValidationError("scale: scale.sizes is empty");
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto wild = load_corpora(cfg.wild_manifests, corpus::CorpusKind::kWild);
  const auto store = load_store_or_empty(cfg);
  const auto ranking = resolve_ranking(cfg, benchmarks);
  harness::ExperimentConfig exp = cfg.experiment;
  exp.feature_spec = resolve_feature_spec(cfg, ranking);

  const auto report = run_over_seeds(cfg, [&](std::uint64_t seed) {
    return harness::scaling_study(cfg.scale_sizes, exp, benchmarks, wild, store, seed);
  });
  write_text(fs::path(cfg.output_dir) / "scale.csv", report::to_csv(report));
  write_text(fs::path(cfg.output_dir) / "scale_plot.json", report::scaling_plot_json(report));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(cfg, "scale", wall, report.metadata);
  std::cout << "scale: " << report.rows.size() << " rows -> " << cfg.output_dir << '\n';
  return 0;
}

int cmd_diverge(const Config& cfg) {
  const auto benchmarks = load_corpora(cfg.benchmark_manifests, corpus::CorpusKind::kBenchmark);
  const auto wild = load_corpora(cfg.wild_manifests, corpus::CorpusKind::kWild);
  if (benchmarks.empty() || wild.empty()) {
    throw ValidationError("diverge: needs at least one benchmark and one wild manifest");
  }
  const auto store = load_store_or_empty(cfg);

  // Reference group: first benchmark (or the one named in diverge.group_a).
  const corpus::Corpus* group_a = &benchmarks.front();
  for (const auto& c : benchmarks) {
    if (!cfg.diverge_group_a.empty() && c.name == cfg.diverge_group_a) group_a = &c;
  }
  auto speech_vectors = [&](const corpus::Corpus& c) {
    std::vector<embeddings::EmbeddingVector> out;
    for (const auto& rec : c.records) {
      if (rec.speech_embedding_key) out.push_back(store.at(*rec.speech_embedding_key));
    }
    return out;
  };
  auto transcripts = [&](const corpus::Corpus& c) {
    std::vector<std::string> out;
    for (const auto& rec : c.records) {
      if (rec.reference) out.push_back(*rec.reference);
      else if (!rec.hypotheses.empty()) out.push_back(rec.hypotheses.begin()->second);
    }
    return out;
  };

  embeddings::CmdOptions cmd_opts;
  cmd_opts.order = cfg.cmd_order;
  cmd_opts.normalize_vectors = cfg.cmd_normalize;
  const auto base_vectors = speech_vectors(*group_a);
  const auto base_texts = transcripts(*group_a);

  std::ostringstream md;
  md << "| Dataset | CMD | TVO (%) |\n|---|---|---|\n";
  for (const auto& c : wild) {
    const double cmd_value = embeddings::cmd(base_vectors, speech_vectors(c), cmd_opts);
    const double tvo_value = embeddings::tvo(base_texts, transcripts(c));
    md << "| " << c.name << " | " << report::format_fixed(cmd_value, 3) << " | "
       << report::format_fixed(tvo_value, 1) << " |\n";
  }
  write_text(fs::path(cfg.output_dir) / "diverge.md", md.str());
  std::cout << "diverge: wrote " << (fs::path(cfg.output_dir) / "diverge.md").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wermeter: reference-free ASR quality estimation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> output_override;
  int jobs_override = 0;

  std::ostringstream footer;
  footer << "Config keys:\n";
  for (const auto& key : all_config_keys()) footer << "  " << key << '\n';
  footer << "Env: WERMETER_SEED overrides experiment.seeds.\n";
  app.footer(footer.str());

  const std::vector<std::string> commands = {"validate", "features", "train",
                                             "predict",  "evaluate", "ablate",
                                             "scale",    "diverge",  "synth"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "Path to JSON config")->required();
    sub->add_option("--seed", seed_override, "Override experiment.seeds with one seed");
    sub->add_option("--output-dir", output_override, "Override paths.output_dir");
    sub->add_option("--jobs", jobs_override, "Worker parallelism cap");
    subs[name] = sub;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = load_config(config_path);
    if (seed_override) cfg.experiment.seeds = {*seed_override};
    if (output_override) cfg.output_dir = *output_override;
    if (jobs_override > 0) cfg.jobs = jobs_override;
    max_jobs() = cfg.jobs;

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "validate") return cmd_validate(cfg);
    if (command == "features") return cmd_features(cfg);
    if (command == "train") return cmd_train(cfg);
    if (command == "predict") return cmd_predict(cfg);
    if (command == "evaluate") return cmd_evaluate(cfg);
    if (command == "ablate") return cmd_ablate(cfg);
    if (command == "scale") return cmd_scale(cfg);
    if (command == "diverge") return cmd_diverge(cfg);
    if (command == "synth") return cmd_synth(cfg);
    std::cerr << "unknown command\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
