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

#ifndef WERMETER_REMOTE_HPP
#define WERMETER_REMOTE_HPP

#include <string>
#include <utility>
#include <vector>

#include "wermeter/embeddings.hpp"

namespace wermeter::remote {

enum class PayloadKind { kText, kSpeech };

struct FetchResult {
  std::vector<embeddings::EmbeddingVector> vectors;  // input order
  int retries = 0;
};

struct FetchOptions {
  int max_attempts = 3;
  int initial_backoff_ms = 100;  // doubles per retry
};

// POST {endpoint}/embed with {"kind","items":[{"key","payload"}]} and expect
// {"dim","vectors":[{"key","values"}]}. Retries transient failures with
// exponential backoff before giving up. Fetched vectors are cached into
// `store`; a dim disagreement with existing entries is a FormatError.
FetchResult fetch_remote(const std::string& endpoint, PayloadKind kind,
                         const std::vector<std::pair<std::string, std::string>>& items,
                         embeddings::EmbeddingStore& store, const FetchOptions& opts = {});

}  // namespace wermeter::remote

#endif  // WERMETER_REMOTE_HPP
