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

#include "wermeter/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "wermeter/error.hpp"
#include "wermeter/metrics.hpp"

namespace wermeter::embeddings {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u16(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

// put_u32/get_u32 move the logical bit pattern byte-by-byte, so f32
// serialization is little-endian on any host.
void put_f32(std::ostream& out, float f) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

std::uint64_t offset_of(std::istream& in) {
  return static_cast<std::uint64_t>(in.tellg());
}

std::uint16_t get_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw FormatError("store truncated at byte offset " + std::to_string(offset_of(in)));
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("store truncated at byte offset " + std::to_string(offset_of(in)));
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void EmbeddingStore::insert(EmbeddingVector vec) {
  if (vec.values.empty()) throw ValidationError("embedding '" + vec.key + "' is empty");
  for (float v : vec.values) {
    if (!std::isfinite(v)) {
      throw ValidationError("embedding '" + vec.key + "' has non-finite values");
    }
  }
  if (dim_ == 0) {
    dim_ = vec.dim();
  } else if (vec.dim() != dim_) {
    throw FormatError("embedding '" + vec.key + "' has dim " + std::to_string(vec.dim()) +
                      ", store dim is " + std::to_string(dim_));
  }
  const std::string key = vec.key;
  if (!entries_.emplace(key, std::move(vec)).second) {
    throw ValidationError("duplicate embedding key '" + key + "'");
  }
}

const EmbeddingVector& EmbeddingStore::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ValidationError("missing embedding key '" + key + "'");
  return it->second;
}

void write_store(const EmbeddingStore& store, std::ostream& out) {
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(store.dim()));
  for (const auto& [key, vec] : store.entries()) {
    if (key.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("embedding key too long: " + key.substr(0, 32) + "...");
    }
    put_u16(out, static_cast<std::uint16_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    for (float v : vec.values) put_f32(out, v);
  }
}

EmbeddingStore read_store(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad store magic at byte offset 0");
  }
  const std::uint32_t dim = get_u32(in);
  if (dim == 0) throw FormatError("store dim is 0 at byte offset 4");
  EmbeddingStore store(dim);
  for (;;) {
    in.peek();
    if (in.eof()) break;
    const std::uint16_t key_len = get_u16(in);
    EmbeddingVector vec;
    vec.key.resize(key_len);
    in.read(vec.key.data(), key_len);
    if (!in) {
      throw FormatError("store truncated in key at byte offset " +
                        std::to_string(offset_of(in)));
    }
    vec.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) vec.values[i] = get_f32(in);
    store.insert(std::move(vec));
  }
  return store;
}

EmbeddingStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding store: " + path);
  return read_store(in);
}

void save_store(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open embedding store for writing: " + path);
  write_store(store, out);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("cosine: dim mismatch " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    na += static_cast<double>(a.values[i]) * a.values[i];
    nb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw ValidationError("cosine: zero-norm vector ('" + (na == 0.0 ? a.key : b.key) + "')");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cmd(const std::vector<EmbeddingVector>& xs, const std::vector<EmbeddingVector>& ys,
           const CmdOptions& opts) {
  if (xs.size() < 2 || ys.size() < 2) {
    throw ValidationError("cmd: each sample needs at least 2 vectors");
  }
  const std::size_t dim = xs.front().dim();
  for (const auto& v : xs) {
    if (v.dim() != dim) throw ValidationError("cmd: inconsistent dims in X");
  }
  for (const auto& v : ys) {
    if (v.dim() != dim) throw ValidationError("cmd: inconsistent dims in Y");
  }
  if (opts.order < 1) throw ValidationError("cmd: order must be >= 1");

  auto to_rows = [&](const std::vector<EmbeddingVector>& vs) {
    std::vector<std::vector<double>> rows(vs.size(), std::vector<double>(dim));
    for (std::size_t i = 0; i < vs.size(); ++i) {
      double norm = 1.0;
      if (opts.normalize_vectors) {
        double s = 0.0;
        for (float v : vs[i].values) s += static_cast<double>(v) * v;
        norm = std::sqrt(s);
        if (norm == 0.0) throw ValidationError("cmd: zero-norm vector with normalization on");
      }
      for (std::size_t j = 0; j < dim; ++j) rows[i][j] = vs[i].values[j] / norm;
    }
    return rows;
  };
  const auto X = to_rows(xs);
  const auto Y = to_rows(ys);

  double lo = opts.lower, hi = opts.upper;
  if (!opts.has_bounds) {
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (const auto* rows : {&X, &Y}) {
      for (const auto& r : *rows) {
        for (double v : r) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (lo == hi) hi = lo + 1.0;  // degenerate constant data
  }
  if (!(lo < hi)) throw ValidationError("cmd: bounds must satisfy lower < upper");
  const double span = hi - lo;

  auto mean_of = [&](const std::vector<std::vector<double>>& rows) {
    std::vector<double> m(dim, 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) m[j] += r[j];
    }
    for (double& v : m) v /= static_cast<double>(rows.size());
    return m;
  };
  auto central_moment = [&](const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& mean, std::size_t k) {
    std::vector<double> m(dim, 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) m[j] += std::pow(r[j] - mean[j], static_cast<double>(k));
    }
    for (double& v : m) v /= static_cast<double>(rows.size());
    return m;
  };
  auto l2_diff = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  };

  const auto mx = mean_of(X);
  const auto my = mean_of(Y);
  double result = l2_diff(mx, my) / span;
  for (std::size_t k = 2; k <= opts.order; ++k) {
    result += l2_diff(central_moment(X, mx, k), central_moment(Y, my, k)) /
              std::pow(span, static_cast<double>(k));
  }
  return result;
}

double tvo(const std::vector<std::string>& transcripts_a,
           const std::vector<std::string>& transcripts_b) {
  if (transcripts_a.empty() || transcripts_b.empty()) {
    throw ValidationError("tvo: transcript lists must be nonempty");
  }
  auto vocab_of = [](const std::vector<std::string>& texts) {
    std::set<std::string> vocab;
    for (const auto& t : texts) {
      for (auto& w : metrics::tokenize(metrics::normalize(t))) vocab.insert(std::move(w));
    }
    return vocab;
  };
  const auto va = vocab_of(transcripts_a);
  const auto vb = vocab_of(transcripts_b);
  if (va.empty() && vb.empty()) throw ValidationError("tvo: both vocabularies are empty");
  std::size_t inter = 0;
  for (const auto& w : va) {
    if (vb.contains(w)) ++inter;
  }
  const std::size_t uni = va.size() + vb.size() - inter;
  return 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace wermeter::embeddings
