// include/accentkit/eval/embeddings.hpp
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

#ifndef ACCENTKIT_EVAL_EMBEDDINGS_HPP_
#define ACCENTKIT_EVAL_EMBEDDINGS_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace accentkit::eval {

struct Embedding {
  std::string utt_id;
  std::string label;
  Eigen::VectorXd vec;
};

// Labeled embeddings of one fixed dimension.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  // Throws ValidationError on mixed dimensions, D == 0, non-finite values
  // or duplicate utt_id.
  explicit EmbeddingSet(std::vector<Embedding> entries);

  const std::vector<Embedding> &entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Eigen::Index dim() const { return dim_; }
  const Embedding *Find(std::string_view utt_id) const;

  // Distinct labels, sorted.
  std::vector<std::string> Labels() const;
  // All vectors stacked as rows, n x D.
  Eigen::MatrixXd AsMatrix() const;

 private:
  std::vector<Embedding> entries_;
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, size_t> by_id_;
};

// {"utt_id":s,"label":s,"vec":[x,...]} per line; D comes from line 1.
EmbeddingSet LoadEmbeddings(std::istream &in);
void WriteEmbeddings(const EmbeddingSet &set, std::ostream &out);

// a.b / (|a||b|) clamped to [-1, 1]. Throws on dimension mismatch or a
// zero-norm argument.
double Cosine(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

// Ordered (eval utt_id, reference utt_id) pairs; an eval id appears once.
using Pairing = std::vector<std::pair<std::string, std::string>>;

// Two whitespace-separated columns per line: eval_utt_id ref_utt_id.
Pairing LoadPairing(std::istream &in);

struct GtSimilarity {
  std::map<std::string, double> per_accent;  // keyed by reference label
  std::map<std::string, size_t> n_pairs;
  double overall = 0.0;  // unweighted mean over pairs
};

GtSimilarity GroundTruthSimilarity(const EmbeddingSet &eval_set,
                                   const EmbeddingSet &ref_set,
                                   const Pairing &pairing);
std::string GtSimilarityToJson(const GtSimilarity &g);

struct SimilarityMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
};

// Cosine similarity between per-label mean vectors, labels sorted.
SimilarityMatrix MeanEmbeddingSimilarity(const EmbeddingSet &set);

// CSV with a header row and a header column of labels; values printed with
// round-trip precision.
std::string SimilarityToCsv(const SimilarityMatrix &sim);
// Validates shape, symmetry (1e-12) and unit diagonal.
SimilarityMatrix ReadSimilarityCsv(std::istream &in);

}  // namespace accentkit::eval

#endif  // ACCENTKIT_EVAL_EMBEDDINGS_HPP_
