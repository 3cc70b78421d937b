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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "wermeter/embeddings.hpp"
#include "wermeter/error.hpp"
#include "wermeter/rng.hpp"

using namespace wermeter;
using embeddings::EmbeddingStore;
using embeddings::EmbeddingVector;

TEST_CASE("store enforces one dimension and unique keys") {
  EmbeddingStore store;
  store.insert({"a", {1.0f, 2.0f}});
  CHECK(store.dim() == 2);
  CHECK_THROWS_AS(store.insert({"b", {1.0f, 2.0f, 3.0f}}), FormatError);
  CHECK_THROWS_AS(store.insert({"a", {3.0f, 4.0f}}), ValidationError);
  CHECK_THROWS_AS(store.insert({"c", {std::nanf(""), 0.0f}}), ValidationError);
  CHECK_THROWS_AS(store.at("missing"), ValidationError);
}

TEST_CASE("binary store round trip is bit exact") {
  EmbeddingStore store;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    EmbeddingVector v;
    v.key = "key/" + std::to_string(i);
    for (int d = 0; d < 7; ++d) {
      v.values.push_back(static_cast<float>(rng.normal() * 1e3));
    }
    store.insert(std::move(v));
  }
  std::ostringstream out(std::ios::binary);
  embeddings::write_store(store, out);
  std::istringstream in(out.str(), std::ios::binary);
  const EmbeddingStore back = embeddings::read_store(in);
  REQUIRE(back.size() == store.size());
  REQUIRE(back.dim() == store.dim());
  for (const auto& [key, vec] : store.entries()) {
    const auto& other = back.at(key);
    REQUIRE(other.values.size() == vec.values.size());
    for (std::size_t d = 0; d < vec.values.size(); ++d) {
      // Bit equality, not approximate equality.
      CHECK(std::memcmp(&other.values[d], &vec.values[d], sizeof(float)) == 0);
    }
  }

  // Re-serialization is byte-identical.
  std::ostringstream out2(std::ios::binary);
  embeddings::write_store(back, out2);
  CHECK(out2.str() == out.str());
}

TEST_CASE("corrupt store data is rejected with byte offsets") {
  SUBCASE("bad magic") {
    std::istringstream in(std::string("XXXX\0\0\0\0", 8), std::ios::binary);
    CHECK_THROWS_WITH_AS(embeddings::read_store(in), doctest::Contains("offset 0"),
                         FormatError);
  }
  SUBCASE("truncated record") {
    EmbeddingStore store;
    store.insert({"abc", {1.0f, 2.0f}});
    std::ostringstream out(std::ios::binary);
    embeddings::write_store(store, out);
    std::string bytes = out.str();
    bytes.resize(bytes.size() - 3);
    std::istringstream in(bytes, std::ios::binary);
    CHECK_THROWS_AS(embeddings::read_store(in), FormatError);
  }
}

TEST_CASE("cosine closed-form values") {
  const EmbeddingVector x{"x", {1.0f, 0.0f}};
  const EmbeddingVector y{"y", {1.0f, 1.0f}};
  const EmbeddingVector z{"z", {0.0f, 1.0f}};
  const EmbeddingVector neg{"n", {-1.0f, 0.0f}};
  CHECK(embeddings::cosine(x, x) == doctest::Approx(1.0));
  CHECK(embeddings::cosine(x, y) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(embeddings::cosine(x, z) == doctest::Approx(0.0));
  CHECK(embeddings::cosine(x, neg) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(embeddings::cosine(x, EmbeddingVector{"w", {1.0f, 2.0f, 3.0f}}),
                  ValidationError);
  CHECK_THROWS_AS(embeddings::cosine(x, EmbeddingVector{"w", {0.0f, 0.0f}}),
                  ValidationError);
}

TEST_CASE("cmd of a sample with itself is zero") {
  Rng rng(6);
  std::vector<EmbeddingVector> xs;
  for (int i = 0; i < 30; ++i) {
    EmbeddingVector v;
    v.key = std::to_string(i);
    for (int d = 0; d < 4; ++d) v.values.push_back(static_cast<float>(rng.normal()));
    xs.push_back(std::move(v));
  }
  CHECK(embeddings::cmd(xs, xs) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cmd hand-computed two-point-mass case") {
  // X = {0}, Y = {1} in 1-D with bounds [0, 1]: only the mean term is
  // nonzero (point masses have no higher central moments), so CMD = 1.
  const std::vector<EmbeddingVector> xs{{"a", {0.0f}}, {"b", {0.0f}}};
  const std::vector<EmbeddingVector> ys{{"c", {1.0f}}, {"d", {1.0f}}};
  embeddings::CmdOptions opts;
  opts.has_bounds = true;
  opts.lower = 0.0;
  opts.upper = 1.0;
  CHECK(embeddings::cmd(xs, ys, opts) == doctest::Approx(1.0));
}

TEST_CASE("cmd grows strictly with mean shift") {
  Rng rng(7);
  std::vector<EmbeddingVector> base;
  for (int i = 0; i < 200; ++i) {
    EmbeddingVector v;
    v.key = "b" + std::to_string(i);
    for (int d = 0; d < 3; ++d) v.values.push_back(static_cast<float>(rng.normal()));
    base.push_back(std::move(v));
  }
  embeddings::CmdOptions opts;
  opts.has_bounds = true;
  opts.lower = -10.0;
  opts.upper = 10.0;
  double prev = -1.0;
  for (const double shift : {0.5, 1.0, 2.0, 4.0}) {
    std::vector<EmbeddingVector> shifted = base;
    for (auto& v : shifted) {
      for (auto& x : v.values) x += static_cast<float>(shift);
    }
    const double value = embeddings::cmd(base, shifted, opts);
    CHECK(value > prev);
    prev = value;
  }
}

TEST_CASE("tvo closed-form values") {
  CHECK(embeddings::tvo({"a b c"}, {"c b a"}) == doctest::Approx(100.0));
  CHECK(embeddings::tvo({"a b"}, {"c d"}) == doctest::Approx(0.0));
  // types {a, b, c} vs {b, c, d}: intersection 2, union 4 -> 50.
  CHECK(embeddings::tvo({"a b c"}, {"b c d"}) == doctest::Approx(50.0));
  // Normalization applies before type counting.
  CHECK(embeddings::tvo({"Hello, WORLD"}, {"hello world!"}) == doctest::Approx(100.0));
}
