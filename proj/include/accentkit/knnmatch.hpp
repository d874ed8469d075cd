// include/accentkit/knnmatch.hpp
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

// Frame-level kNN feature matching (kNN-VC style conversion) over
// externally extracted feature matrices, and the FMAT binary format.

#ifndef ACCENTKIT_KNNMATCH_HPP_
#define ACCENTKIT_KNNMATCH_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace accentkit::knn {

// Row-major frames x dims matrix stored in binary32. A 0x0 matrix is the
// empty pool; otherwise cols >= 1.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(size_t rows, size_t cols);
  // Throws ValidationError on size mismatch or non-finite values.
  FeatureMatrix(size_t rows, size_t cols, std::vector<float> data);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(size_t r) const {
    return std::span<const float>(data_).subspan(r * cols_, cols_);
  }
  std::span<float> row(size_t r) {
    return std::span<float>(data_).subspan(r * cols_, cols_);
  }
  float operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  float &operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }

  bool operator==(const FeatureMatrix &o) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<float> data_;
};

// FMAT: "FMT1", u32 LE rows, u32 LE cols, rows*cols binary32 LE, row-major.
inline constexpr size_t kFmatHeaderBytes = 12;

std::vector<std::byte> WriteFmat(const FeatureMatrix &m);
// Throws ValidationError on bad magic, truncated/oversized payload or a
// non-finite value.
FeatureMatrix ReadFmat(std::span<const std::byte> bytes);

FeatureMatrix ReadFmatFile(const std::string &path);
void WriteFmatFile(const FeatureMatrix &m, const std::string &path);

// Row-wise concatenation; [] gives the 0x0 pool.
FeatureMatrix BuildPool(std::span<const FeatureMatrix> matrices);

struct KnnConfig {
  size_t k = 4;
  // Pool rows per similarity tile; 0 scans the whole pool per frame. Tiling
  // never changes the selected neighbors.
  size_t block_rows = 0;
  // Worker threads over source frames; 1 = sequential.
  size_t threads = 1;
};

// Indices of the k most cosine-similar pool rows per source frame, most
// similar first; ties go to the lower pool index. Zero-norm frames have
// similarity -inf, and a zero source frame takes pool rows 0..k-1.
std::vector<std::vector<uint32_t>> SelectNeighbors(const FeatureMatrix &source,
                                                   const FeatureMatrix &pool,
                                                   const KnnConfig &cfg);

// Each output frame is the mean (accumulated in double) of the frame's k
// selected pool rows; output.rows() == source.rows().
FeatureMatrix KnnConvert(const FeatureMatrix &source, const FeatureMatrix &pool,
                         const KnnConfig &cfg);

}  // namespace accentkit::knn

#endif  // ACCENTKIT_KNNMATCH_HPP_
