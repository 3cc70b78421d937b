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

#ifndef WERMETER_METRICS_HPP
#define WERMETER_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace wermeter::metrics {

// Counts from a minimum-cost alignment of (reference, hypothesis).
// Invariants: S + D + H = ref_len and S + I + H = hyp_len.
struct AlignmentStats {
  std::int64_t substitutions = 0;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t hits = 0;
  std::int64_t ref_len = 0;
  std::int64_t hyp_len = 0;

  std::int64_t errors() const { return substitutions + insertions + deletions; }
};

struct ErrorRates {
  double wer = 0.0;
  double cer = 0.0;
  std::int64_t word_errors = 0;
  std::int64_t char_errors = 0;
  // Set when a rate was computed against an empty reference (denominator
  // falls back to 1); reports surface this.
  bool empty_reference = false;
};

enum class Denominator { kReference, kHypothesis };

// Lowercase, strip punctuation except intra-word apostrophes, collapse
// whitespace. Idempotent; ASCII rules only.
std::string normalize(const std::string& text);

std::vector<std::string> tokenize(const std::string& normalized);

// Character stream of the space-joined normalized text: one token per
// character, inter-word single spaces included.
std::vector<std::string> char_tokens(const std::string& normalized);

// Unit-cost Levenshtein alignment. Tie-breaking is fixed: prefer a diagonal
// step (hit/substitution) over insert+delete, and deletion over insertion,
// so the S/I/D decomposition is reproducible. Total distance is unaffected.
AlignmentStats align(const std::vector<std::string>& ref_tokens,
                     const std::vector<std::string>& hyp_tokens);

// (S+I+D)/N with the empty-reference convention: N=0 and errors>0 gives
// rate = errors (denominator 1) rather than infinity.
double rate_from(const AlignmentStats& stats);

// Word- and character-level rates of a (reference, hypothesis) pair of raw
// strings; both are normalized first.
ErrorRates error_rates(const std::string& reference, const std::string& hypothesis);

// pWER/pCER: agreement of a hypothesis with a proxy transcript, no ground
// truth involved. The denominator defaults to the proxy side.
ErrorRates proxy_metrics(const std::string& hypothesis, const std::string& proxy,
                         Denominator denom = Denominator::kReference);

AlignmentStats word_align(const std::string& reference, const std::string& hypothesis);
AlignmentStats char_align(const std::string& reference, const std::string& hypothesis);

}  // namespace wermeter::metrics

#endif  // WERMETER_METRICS_HPP
