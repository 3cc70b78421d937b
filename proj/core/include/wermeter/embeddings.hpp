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

#ifndef WERMETER_EMBEDDINGS_HPP
#define WERMETER_EMBEDDINGS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wermeter::embeddings {

struct EmbeddingVector {
  std::string key;
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
};

// All entries share one dimension; keys are unique. Immutable once loaded.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& key) const { return entries_.contains(key); }

  // Throws FormatError on a dim mismatch, ValidationError on a duplicate key.
  void insert(EmbeddingVector vec);
  const EmbeddingVector& at(const std::string& key) const;

  const std::map<std::string, EmbeddingVector>& entries() const { return entries_; }

 private:
  std::size_t dim_ = 0;  // 0 until the first vector fixes it
  std::map<std::string, EmbeddingVector> entries_;
};

// Binary container: magic "EMB1" | u32 LE dim | records of
// (u16 LE key length, key bytes, dim x f32 LE). Lossless for f32.
void write_store(const EmbeddingStore& store, std::ostream& out);
EmbeddingStore read_store(std::istream& in);
EmbeddingStore load_store(const std::string& path);
void save_store(const EmbeddingStore& store, const std::string& path);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct CmdOptions {
  std::size_t order = 5;
  // When unset, bounds default to the global per-coordinate min/max of X u Y.
  bool has_bounds = false;
  double lower = 0.0;
  double upper = 1.0;
  bool normalize_vectors = false;  // L2-normalize samples before matching
};

// Central moment discrepancy of order K between two samples:
// ||E[X]-E[Y]|| / (hi-lo) + sum_{k=2..K} ||c_k(X)-c_k(Y)|| / (hi-lo)^k
// with coordinatewise central moments c_k.
double cmd(const std::vector<EmbeddingVector>& xs, const std::vector<EmbeddingVector>& ys,
           const CmdOptions& opts = {});

// Total vocabulary overlap: 100 * Jaccard over normalized word types.
double tvo(const std::vector<std::string>& transcripts_a,
           const std::vector<std::string>& transcripts_b);

}  // namespace wermeter::embeddings

#endif  // WERMETER_EMBEDDINGS_HPP
