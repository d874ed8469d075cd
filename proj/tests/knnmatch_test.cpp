// tests/knnmatch_test.cpp
//
// Copyright 2026 The accentkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "accentkit/error.hpp"
#include "accentkit/knnmatch.hpp"
#include "doctest.h"
#include "synth.hpp"

using namespace accentkit;
using namespace accentkit::knn;

namespace {

FeatureMatrix Random(size_t rows, size_t cols, std::mt19937_64 &eng) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> v(rows * cols);
  for (float &x : v) x = g(eng);
  return FeatureMatrix(rows, cols, v);
}

// Sorts all pool similarities per frame; written independently of the
// library's top-k selection.
std::vector<std::vector<uint32_t>> OracleNeighbors(const FeatureMatrix &src,
                                                   const FeatureMatrix &pool, size_t k) {
  std::vector<std::vector<uint32_t>> out;
  for (size_t t = 0; t < src.rows(); ++t) {
    std::vector<double> sim(pool.rows());
    double ns = 0;
    for (size_t c = 0; c < src.cols(); ++c) ns += double(src(t, c)) * src(t, c);
    for (size_t j = 0; j < pool.rows(); ++j) {
      double dot = 0, np = 0;
      for (size_t c = 0; c < src.cols(); ++c) {
        dot += double(src(t, c)) * pool(j, c);
        np += double(pool(j, c)) * pool(j, c);
      }
      sim[j] = (ns == 0 || np == 0) ? -INFINITY : dot / (std::sqrt(ns) * std::sqrt(np));
    }
    std::vector<uint32_t> idx(pool.rows());
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](uint32_t a, uint32_t b) { return sim[a] > sim[b]; });
    idx.resize(k);
    out.push_back(idx);
  }
  return out;
}

std::vector<std::byte> Bytes(const std::string &s) {
  std::vector<std::byte> b(s.size());
  std::memcpy(b.data(), s.data(), s.size());
  return b;
}

}  // namespace

TEST_CASE("fmat layout") {
  FeatureMatrix m(2, 2, {1, 0, 0, 1});
  std::vector<std::byte> b = WriteFmat(m);
  REQUIRE(b.size() == kFmatHeaderBytes + 16);
  CHECK(std::memcmp(b.data(), "FMT1", 4) == 0);
  const unsigned char expect_dims[8] = {2, 0, 0, 0, 2, 0, 0, 0};
  CHECK(std::memcmp(b.data() + 4, expect_dims, 8) == 0);
  // 1.0f is 0x3F800000, little-endian
  const unsigned char one[4] = {0x00, 0x00, 0x80, 0x3F};
  CHECK(std::memcmp(b.data() + 12, one, 4) == 0);
  CHECK(std::memcmp(b.data() + 24, one, 4) == 0);
  CHECK(ReadFmat(b) == m);
}

TEST_CASE("fmat round trip is bitwise") {
  std::mt19937_64 eng(3);
  std::uniform_int_distribution<uint32_t> bits;
  for (int i = 0; i < 100; ++i) {
    size_t rows = i == 0 ? 0 : i == 1 ? 1 : eng() % 30;
    size_t cols = i == 1 ? 1 : 1 + eng() % 12;
    std::vector<float> v(rows * cols);
    for (float &x : v) {
      float f;
      do {
        uint32_t u = bits(eng);
        std::memcpy(&f, &u, 4);
      } while (!std::isfinite(f));
      x = f;
    }
    FeatureMatrix m(rows, cols, v);
    std::vector<std::byte> b = WriteFmat(m);
    CHECK(b.size() == kFmatHeaderBytes + 4 * rows * cols);
    FeatureMatrix r = ReadFmat(b);
    CHECK(r.rows() == rows);
    CHECK(r.cols() == cols);
    CHECK(std::memcmp(r.data().data(), m.data().data(), 4 * rows * cols) == 0);
    CHECK(WriteFmat(r) == b);
  }
}

TEST_CASE("fmat rejects bad input") {
  std::vector<std::byte> b = WriteFmat(FeatureMatrix(2, 2, {1, 2, 3, 4}));
  std::vector<std::byte> bad = b;
  std::memcpy(bad.data(), "XXXX", 4);
  CHECK_THROWS_WITH_AS(ReadFmat(bad), doctest::Contains("magic"), ValidationError);

  // Header claims 3x3 with 4 floats present.
  std::string t = "FMT1";
  t += std::string("\x03\x00\x00\x00\x03\x00\x00\x00", 8);
  t += std::string(16, '\0');
  try {
    ReadFmat(Bytes(t));
    FAIL("expected truncation error");
  } catch (const ValidationError &e) {
    std::string msg = e.what();
    CHECK(msg.find("36") != std::string::npos);
    CHECK(msg.find("16") != std::string::npos);
  }
  CHECK_THROWS_AS(ReadFmat(Bytes("FMT1\x01")), ValidationError);
  CHECK_THROWS_AS(ReadFmat(Bytes("")), ValidationError);

  std::vector<std::byte> longer = b;
  longer.push_back(std::byte{0});
  CHECK_THROWS_AS(ReadFmat(longer), ValidationError);

  std::vector<std::byte> nan = b;
  const unsigned char qnan[4] = {0x00, 0x00, 0xC0, 0x7F};
  std::memcpy(nan.data() + 12, qnan, 4);
  CHECK_THROWS_AS(ReadFmat(nan), ValidationError);

  CHECK_THROWS_AS(FeatureMatrix(1, 1, {NAN}), ValidationError);
  CHECK_THROWS_AS(FeatureMatrix(2, 2, {1, 2, 3}), ValidationError);
}

TEST_CASE("fmat files") {
  testing::TempDir dir;
  FeatureMatrix m(3, 2, {1, 2, 3, 4, 5, 6});
  WriteFmatFile(m, dir.File("m.fmat"));
  CHECK(ReadFmatFile(dir.File("m.fmat")) == m);
  CHECK_THROWS_AS(ReadFmatFile(dir.File("missing.fmat")), IoError);
}

TEST_CASE("build pool") {
  std::mt19937_64 eng(1);
  std::vector<FeatureMatrix> parts{Random(2, 4, eng), Random(3, 4, eng)};
  FeatureMatrix pool = BuildPool(parts);
  CHECK(pool.rows() == 5);
  CHECK(pool.cols() == 4);
  CHECK(pool(2, 1) == parts[1](0, 1));
  CHECK(pool(1, 3) == parts[0](1, 3));

  FeatureMatrix empty = BuildPool({});
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 0);

  std::vector<FeatureMatrix> mixed{Random(2, 4, eng), Random(2, 5, eng)};
  CHECK_THROWS_WITH_AS(BuildPool(mixed), doctest::Contains("1"), ValidationError);
}

TEST_CASE("knn convert examples") {
  FeatureMatrix src(1, 2, {1, 0});
  FeatureMatrix pool(2, 2, {1, 0, 0, 1});
  CHECK(KnnConvert(src, pool, {1}) == FeatureMatrix(1, 2, {1, 0}));
  CHECK(KnnConvert(src, pool, {2}) == FeatureMatrix(1, 2, {0.5f, 0.5f}));
  CHECK_THROWS_AS(KnnConvert(src, pool, {3}), ValidationError);
  CHECK_THROWS_AS(KnnConvert(src, pool, {0}), ValidationError);
  CHECK_THROWS_AS(KnnConvert(src, FeatureMatrix(), {1}), ValidationError);
  CHECK_THROWS_AS(KnnConvert(FeatureMatrix(1, 3, {1, 2, 3}), pool, {1}), ValidationError);
  CHECK(KnnConvert(FeatureMatrix(0, 2), pool, {1}).rows() == 0);
}

TEST_CASE("zero-norm frames") {
  FeatureMatrix pool(4, 2, {0, 0, 1, 0, 0, 1, -1, 0});
  FeatureMatrix src(2, 2, {0, 0, -1, 0.001f});
  auto nb = SelectNeighbors(src, pool, {2});
  CHECK(nb[0] == std::vector<uint32_t>{0, 1});
  // The zero pool row ranks last for a nonzero frame.
  auto all = SelectNeighbors(src, pool, {4});
  CHECK(all[1].back() == 0u);
  FeatureMatrix out = KnnConvert(src, pool, {2});
  CHECK(out(0, 0) == 0.5f);
  CHECK(out(0, 1) == 0.0f);
}

TEST_CASE("ties go to the lower pool index") {
  FeatureMatrix pool(4, 2, {0, 1, 2, 0, 1, 0, 3, 0});
  FeatureMatrix src(1, 2, {5, 0});
  CHECK(SelectNeighbors(src, pool, {2})[0] == std::vector<uint32_t>{1, 2});
  CHECK(SelectNeighbors(src, pool, {3})[0] == std::vector<uint32_t>{1, 2, 3});
  CHECK(SelectNeighbors(src, pool, {2, 1})[0] == std::vector<uint32_t>{1, 2});
}

TEST_CASE("knn convert matches the exhaustive oracle") {
  std::mt19937_64 eng(17);
  for (int inst = 0; inst < 30; ++inst) {
    FeatureMatrix src = Random(20, 8, eng), pool = Random(50, 8, eng);
    for (size_t k : {size_t(1), size_t(4)}) {
      auto oracle = OracleNeighbors(src, pool, k);
      CHECK(SelectNeighbors(src, pool, {k}) == oracle);
      FeatureMatrix out = KnnConvert(src, pool, {k});
      REQUIRE(out.rows() == 20);
      for (size_t t = 0; t < 20; ++t)
        for (size_t c = 0; c < 8; ++c) {
          double mean = 0;
          for (uint32_t j : oracle[t]) mean += pool(j, c);
          mean /= double(k);
          CHECK(std::abs(out(t, c) - mean) <= 1e-6);
        }
    }
  }
}

TEST_CASE("identity, hull and permutation properties") {
  std::mt19937_64 eng(23);
  for (int inst = 0; inst < 10; ++inst) {
    FeatureMatrix src = Random(15, 6, eng), extra = Random(25, 6, eng);
    std::vector<FeatureMatrix> parts{extra, src};
    FeatureMatrix pool = BuildPool(parts);
    CHECK(KnnConvert(src, pool, {1}) == src);

    FeatureMatrix out = KnnConvert(src, extra, {4});
    for (size_t c = 0; c < 6; ++c) {
      float lo = INFINITY, hi = -INFINITY;
      for (size_t j = 0; j < extra.rows(); ++j) {
        lo = std::min(lo, extra(j, c));
        hi = std::max(hi, extra(j, c));
      }
      for (size_t t = 0; t < out.rows(); ++t) {
        CHECK(out(t, c) >= lo);
        CHECK(out(t, c) <= hi);
      }
    }

    std::vector<size_t> perm(extra.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    FeatureMatrix shuffled(extra.rows(), extra.cols());
    for (size_t j = 0; j < perm.size(); ++j)
      for (size_t c = 0; c < 6; ++c) shuffled(j, c) = extra(perm[j], c);
    FeatureMatrix out2 = KnnConvert(src, shuffled, {4});
    for (size_t t = 0; t < out.rows(); ++t)
      for (size_t c = 0; c < 6; ++c) CHECK(out2(t, c) == doctest::Approx(out(t, c)).epsilon(1e-6));
  }
}

TEST_CASE("blocked and threaded paths equal the plain scan") {
  std::mt19937_64 eng(29);
  FeatureMatrix src = Random(97, 16, eng), pool = Random(300, 16, eng);
  // Duplicate rows force exact ties.
  for (size_t c = 0; c < 16; ++c) pool(200, c) = pool(10, c);
  for (size_t c = 0; c < 16; ++c) src(5, c) = pool(10, c);
  FeatureMatrix base = KnnConvert(src, pool, {4});
  auto base_nb = SelectNeighbors(src, pool, {4});
  for (size_t block : {size_t(1), size_t(7), size_t(64), size_t(1000)})
    for (size_t threads : {size_t(1), size_t(3), size_t(8)}) {
      KnnConfig cfg{4, block, threads};
      CHECK(SelectNeighbors(src, pool, cfg) == base_nb);
      CHECK(KnnConvert(src, pool, cfg) == base);
    }
  CHECK(base_nb[5][0] == 10u);
  CHECK(base_nb[5][1] == 200u);
}
