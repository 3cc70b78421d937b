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

#include "wermeter/metrics.hpp"

#include <cctype>
#include <cstddef>

namespace wermeter::metrics {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::string normalize(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    char keep = 0;
    if (is_word_char(c)) {
      keep = static_cast<char>(std::tolower(c));
    } else if (c == '\'') {
      // Apostrophe survives only between two word characters.
      const bool prev_ok = i > 0 && is_word_char(static_cast<unsigned char>(text[i - 1]));
      const bool next_ok =
          i + 1 < text.size() && is_word_char(static_cast<unsigned char>(text[i + 1]));
      if (prev_ok && next_ok) keep = '\'';
    } else if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (keep != 0) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(keep);
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& normalized) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : normalized) {
    if (c == ' ') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<std::string> char_tokens(const std::string& normalized) {
  std::vector<std::string> tokens;
  tokens.reserve(normalized.size());
  for (char c : normalized) tokens.emplace_back(1, c);
  return tokens;
}

AlignmentStats align(const std::vector<std::string>& ref_tokens,
                     const std::vector<std::string>& hyp_tokens) {
  const std::size_t n = ref_tokens.size();
  const std::size_t m = hyp_tokens.size();

  // cost[i][j] = edit distance between ref[0..i) and hyp[0..j).
  std::vector<std::vector<std::int32_t>> cost(n + 1, std::vector<std::int32_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<std::int32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<std::int32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int32_t diag =
          cost[i - 1][j - 1] + (ref_tokens[i - 1] == hyp_tokens[j - 1] ? 0 : 1);
      const std::int32_t del = cost[i - 1][j] + 1;
      const std::int32_t ins = cost[i][j - 1] + 1;
      std::int32_t best = diag;
      if (del < best) best = del;
      if (ins < best) best = ins;
      cost[i][j] = best;
    }
  }

  // Backtrace with the fixed preference order: diagonal, deletion, insertion.
  AlignmentStats stats;
  stats.ref_len = static_cast<std::int64_t>(n);
  stats.hyp_len = static_cast<std::int64_t>(m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool match = ref_tokens[i - 1] == hyp_tokens[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (match ? 0 : 1)) {
        if (match) {
          ++stats.hits;
        } else {
          ++stats.substitutions;
        }
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++stats.deletions;
      --i;
      continue;
    }
    ++stats.insertions;
    --j;
  }
  return stats;
}

double rate_from(const AlignmentStats& stats) {
  const std::int64_t errs = stats.errors();
  if (stats.ref_len == 0) {
    return errs == 0 ? 0.0 : static_cast<double>(errs);
  }
  return static_cast<double>(errs) / static_cast<double>(stats.ref_len);
}

AlignmentStats word_align(const std::string& reference, const std::string& hypothesis) {
  return align(tokenize(normalize(reference)), tokenize(normalize(hypothesis)));
}

AlignmentStats char_align(const std::string& reference, const std::string& hypothesis) {
  return align(char_tokens(normalize(reference)), char_tokens(normalize(hypothesis)));
}

ErrorRates error_rates(const std::string& reference, const std::string& hypothesis) {
  const AlignmentStats w = word_align(reference, hypothesis);
  const AlignmentStats c = char_align(reference, hypothesis);
  ErrorRates r;
  r.word_errors = w.errors();
  r.char_errors = c.errors();
  r.wer = rate_from(w);
  r.cer = rate_from(c);
  r.empty_reference = (w.ref_len == 0 && r.word_errors > 0) ||
                      (c.ref_len == 0 && r.char_errors > 0);
  return r;
}

ErrorRates proxy_metrics(const std::string& hypothesis, const std::string& proxy,
                         Denominator denom) {
  // Proxy plays the reference role in the alignment; the denominator switch
  // selects which side's length normalizes the distance.
  AlignmentStats w = word_align(proxy, hypothesis);
  AlignmentStats c = char_align(proxy, hypothesis);
  if (denom == Denominator::kHypothesis) {
    std::swap(w.ref_len, w.hyp_len);
    std::swap(w.insertions, w.deletions);
    std::swap(c.ref_len, c.hyp_len);
    std::swap(c.insertions, c.deletions);
  }
  ErrorRates r;
  r.word_errors = w.errors();
  r.char_errors = c.errors();
  r.wer = rate_from(w);
  r.cer = rate_from(c);
  r.empty_reference = (w.ref_len == 0 && r.word_errors > 0) ||
                      (c.ref_len == 0 && r.char_errors > 0);
  return r;
}

}  // namespace wermeter::metrics
