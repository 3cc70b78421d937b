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

#include "wermeter/remote.hpp"

#include <chrono>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "wermeter/error.hpp"

namespace wermeter::remote {

namespace {

using nlohmann::json;

// Split "http://host:port/base" into client target and path prefix.
struct Endpoint {
  std::string host_port;
  std::string base_path;
};

Endpoint split_endpoint(const std::string& endpoint) {
  std::string rest = endpoint;
  const auto scheme = rest.find("://");
  std::string prefix = "http://";
  if (scheme != std::string::npos) {
    prefix = rest.substr(0, scheme + 3);
    rest = rest.substr(scheme + 3);
  }
  const auto slash = rest.find('/');
  Endpoint ep;
  if (slash == std::string::npos) {
    ep.host_port = prefix + rest;
  } else {
    ep.host_port = prefix + rest.substr(0, slash);
    ep.base_path = rest.substr(slash);
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  }
  return ep;
}

}  // namespace

FetchResult fetch_remote(const std::string& endpoint, PayloadKind kind,
                         const std::vector<std::pair<std::string, std::string>>& items,
                         embeddings::EmbeddingStore& store, const FetchOptions& opts) {
  const Endpoint ep = split_endpoint(endpoint);
  httplib::Client client(ep.host_port);
  client.set_read_timeout(30, 0);

  json body;
  body["kind"] = kind == PayloadKind::kText ? "text" : "speech";
  body["items"] = json::array();
  for (const auto& [key, payload] : items) {
    body["items"].push_back({{"key", key}, {"payload", payload}});
  }

  FetchResult result;
  httplib::Result res;
  int backoff_ms = opts.initial_backoff_ms;
  for (int attempt = 1;; ++attempt) {
    res = client.Post(ep.base_path + "/embed", body.dump(), "application/json");
    if (res && res->status >= 200 && res->status < 300) break;
    if (attempt >= opts.max_attempts) {
      const std::string status = res ? "HTTP " + std::to_string(res->status)
                                     : "connection failure";
      throw TransportError("remote encoder failed after " + std::to_string(attempt) +
                           " attempts: " + status);
    }
    ++result.retries;
    std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
    backoff_ms *= 2;
  }

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("remote encoder returned invalid JSON: ") + e.what());
  }

  std::size_t dim = 0;
  std::unordered_map<std::string, embeddings::EmbeddingVector> by_key;
  try {
    dim = reply.at("dim").get<std::size_t>();
    for (const auto& entry : reply.at("vectors")) {
      embeddings::EmbeddingVector vec;
      vec.key = entry.at("key").get<std::string>();
      for (const auto& v : entry.at("values")) vec.values.push_back(v.get<float>());
      by_key.emplace(vec.key, std::move(vec));
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("remote encoder reply malformed: ") + e.what());
  }
  if (store.dim() != 0 && dim != store.dim()) {
    throw FormatError("remote encoder dim " + std::to_string(dim) +
                      " disagrees with store dim " + std::to_string(store.dim()));
  }

  for (const auto& [key, payload] : items) {
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw TransportError("remote encoder reply missing key '" + key + "'");
    }
    if (it->second.dim() != dim) {
      throw FormatError("remote encoder vector '" + key + "' has dim " +
                        std::to_string(it->second.dim()) + ", expected " +
                        std::to_string(dim));
    }
    result.vectors.push_back(it->second);
    if (!store.contains(key)) store.insert(it->second);
  }
  return result;
}

}  // namespace wermeter::remote
