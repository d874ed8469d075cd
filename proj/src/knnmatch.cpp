// src/knnmatch.cpp
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

#include "accentkit/knnmatch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <thread>

#include "accentkit/error.hpp"

namespace accentkit::knn {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'T', '1'};
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void PutU32(std::vector<std::byte> &out, uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

uint32_t GetU32(std::span<const std::byte> b, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(std::to_integer<uint8_t>(b[off + i])) << (8 * i);
  return v;
}

std::vector<double> RowNorms(const FeatureMatrix &m) {
  std::vector<double> norms(m.rows());
  for (size_t r = 0; r < m.rows(); ++r) {
    double ss = 0.0;
    for (float v : m.row(r)) ss += static_cast<double>(v) * v;
    norms[r] = std::sqrt(ss);
  }
  return norms;
}

// Cosine similarity with the same summation order in every code path, so
// the blocked and unblocked scans produce bitwise-equal values.
inline double Similarity(std::span<const float> a, double norm_a,
                         std::span<const float> b, double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return kNegInf;
  double dot = 0.0;
  for (size_t c = 0; c < a.size(); ++c)
    dot += static_cast<double>(a[c]) * static_cast<double>(b[c]);
  return dot / (norm_a * norm_b);
}

std::vector<uint32_t> TopK(const std::vector<double> &sims, size_t k) {
  std::vector<uint32_t> idx(sims.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), [&](uint32_t x, uint32_t y) {
                      if (sims[x] != sims[y]) return sims[x] > sims[y];
                      return x < y;
                    });
  idx.resize(k);
  return idx;
}

// Neighbors for source frames [begin, end).
void SelectRange(const FeatureMatrix &source, const std::vector<double> &src_norms,
                 const FeatureMatrix &pool, const std::vector<double> &pool_norms,
                 const KnnConfig &cfg, size_t begin, size_t end,
                 std::vector<std::vector<uint32_t>> &out) {
  const size_t n_pool = pool.rows();
  std::vector<uint32_t> first_k(cfg.k);
  std::iota(first_k.begin(), first_k.end(), 0u);

  if (cfg.block_rows == 0) {
    std::vector<double> sims(n_pool);
    for (size_t t = begin; t < end; ++t) {
      if (src_norms[t] == 0.0) {
        out[t] = first_k;
        continue;
      }
      for (size_t j = 0; j < n_pool; ++j)
        sims[j] = Similarity(source.row(t), src_norms[t], pool.row(j), pool_norms[j]);
      out[t] = TopK(sims, cfg.k);
    }
    return;
  }

  // Tiled: a strip of source frames against a block of pool rows at a time.
  constexpr size_t kFrameTile = 16;
  std::vector<std::vector<double>> sims(kFrameTile, std::vector<double>(n_pool));
  for (size_t t0 = begin; t0 < end; t0 += kFrameTile) {
    const size_t t1 = std::min(end, t0 + kFrameTile);
    for (size_t j0 = 0; j0 < n_pool; j0 += cfg.block_rows) {
      const size_t j1 = std::min(n_pool, j0 + cfg.block_rows);
      for (size_t t = t0; t < t1; ++t)
        for (size_t j = j0; j < j1; ++j)
          sims[t - t0][j] =
              Similarity(source.row(t), src_norms[t], pool.row(j), pool_norms[j]);
    }
    for (size_t t = t0; t < t1; ++t)
      out[t] = src_norms[t] == 0.0 ? first_k : TopK(sims[t - t0], cfg.k);
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(size_t rows, size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {
  if (cols == 0 && rows != 0)
    throw ValidationError("feature matrix with rows must have cols >= 1");
}

FeatureMatrix::FeatureMatrix(size_t rows, size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (cols == 0 && rows != 0)
    throw ValidationError("feature matrix with rows must have cols >= 1");
  if (data_.size() != rows * cols)
    throw ValidationError("feature matrix data has " + std::to_string(data_.size()) +
                          " values, expected " + std::to_string(rows * cols));
  for (float v : data_)
    if (!std::isfinite(v)) throw ValidationError("feature matrix value is not finite");
}

std::vector<std::byte> WriteFmat(const FeatureMatrix &m) {
  if (m.rows() > std::numeric_limits<uint32_t>::max() ||
      m.cols() > std::numeric_limits<uint32_t>::max())
    throw ValidationError("matrix too large for FMAT");
  std::vector<std::byte> out;
  out.reserve(kFmatHeaderBytes + 4 * m.data().size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  PutU32(out, static_cast<uint32_t>(m.rows()));
  PutU32(out, static_cast<uint32_t>(m.cols()));
  for (float v : m.data()) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

FeatureMatrix ReadFmat(std::span<const std::byte> bytes) {
  if (bytes.size() >= 4) {
    for (int i = 0; i < 4; ++i)
      if (bytes[i] != static_cast<std::byte>(kMagic[i]))
        throw ValidationError("bad FMAT magic");
  }
  if (bytes.size() < kFmatHeaderBytes)
    throw ValidationError("truncated FMAT header: expected " +
                          std::to_string(kFmatHeaderBytes) + " bytes, got " +
                          std::to_string(bytes.size()));
  const uint64_t rows = GetU32(bytes, 4);
  const uint64_t cols = GetU32(bytes, 8);
  if (rows != 0 && cols == 0)
    throw ValidationError("FMAT header has rows but zero columns");
  const uint64_t expected = rows * cols * 4;
  const uint64_t actual = bytes.size() - kFmatHeaderBytes;
  if (actual < expected)
    throw ValidationError("truncated FMAT payload: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(actual));
  if (actual > expected)
    throw ValidationError("FMAT payload has " + std::to_string(actual - expected) +
                          " trailing bytes");
  std::vector<float> data(rows * cols);
  for (size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(GetU32(bytes, kFmatHeaderBytes + 4 * i));
    if (!std::isfinite(data[i]))
      throw ValidationError("non-finite FMAT value at index " + std::to_string(i));
  }
  return FeatureMatrix(rows, cols, std::move(data));
}

FeatureMatrix ReadFmatFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  try {
    return ReadFmat(std::as_bytes(std::span<const char>(raw)));
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void WriteFmatFile(const FeatureMatrix &m, const std::string &path) {
  std::vector<std::byte> bytes = WriteFmat(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

FeatureMatrix BuildPool(std::span<const FeatureMatrix> matrices) {
  if (matrices.empty()) return FeatureMatrix();
  const size_t cols = matrices.front().cols();
  size_t rows = 0;
  for (size_t i = 0; i < matrices.size(); ++i) {
    if (matrices[i].cols() != cols)
      throw ValidationError("pool matrix " + std::to_string(i) + " has " +
                            std::to_string(matrices[i].cols()) +
                            " columns, expected " + std::to_string(cols));
    rows += matrices[i].rows();
  }
  std::vector<float> data;
  data.reserve(rows * cols);
  for (const FeatureMatrix &m : matrices)
    data.insert(data.end(), m.data().begin(), m.data().end());
  return FeatureMatrix(rows, cols, std::move(data));
}

std::vector<std::vector<uint32_t>> SelectNeighbors(const FeatureMatrix &source,
                                                   const FeatureMatrix &pool,
                                                   const KnnConfig &cfg) {
  if (pool.rows() == 0) throw ValidationError("empty matching pool");
  if (cfg.k == 0) throw ValidationError("k must be at least 1");
  if (cfg.k > pool.rows())
    throw ValidationError("k = " + std::to_string(cfg.k) + " exceeds pool rows (" +
                          std::to_string(pool.rows()) + ")");
  if (source.rows() > 0 && source.cols() != pool.cols())
    throw ValidationError("dimension mismatch: source has " +
                          std::to_string(source.cols()) + " columns, pool has " +
                          std::to_string(pool.cols()));
  if (pool.rows() > std::numeric_limits<uint32_t>::max())
    throw ValidationError("pool too large");

  const std::vector<double> src_norms = RowNorms(source);
  const std::vector<double> pool_norms = RowNorms(pool);
  std::vector<std::vector<uint32_t>> out(source.rows());

  const size_t n = source.rows();
  const size_t workers = std::max<size_t>(1, std::min(cfg.threads, n));
  if (workers == 1) {
    SelectRange(source, src_norms, pool, pool_norms, cfg, 0, n, out);
    return out;
  }
  std::vector<std::thread> pool_threads;
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool_threads.emplace_back([&, b, e] {
      SelectRange(source, src_norms, pool, pool_norms, cfg, b, e, out);
    });
  }
  for (std::thread &t : pool_threads) t.join();
  return out;
}

FeatureMatrix KnnConvert(const FeatureMatrix &source, const FeatureMatrix &pool,
                         const KnnConfig &cfg) {
  const auto neighbors = SelectNeighbors(source, pool, cfg);
  FeatureMatrix out(source.rows(), pool.cols());
  std::vector<double> acc(pool.cols());
  for (size_t t = 0; t < source.rows(); ++t) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (uint32_t j : neighbors[t]) {
      std::span<const float> p = pool.row(j);
      for (size_t c = 0; c < acc.size(); ++c) acc[c] += p[c];
    }
    std::span<float> o = out.row(t);
    for (size_t c = 0; c < acc.size(); ++c)
      o[c] = static_cast<float>(acc[c] / static_cast<double>(neighbors[t].size()));
  }
  return out;
}

}  // namespace accentkit::knn
