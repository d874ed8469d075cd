// include/accentkit/eval/cluster.hpp
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

#ifndef ACCENTKIT_EVAL_CLUSTER_HPP_
#define ACCENTKIT_EVAL_CLUSTER_HPP_

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "accentkit/eval/embeddings.hpp"

namespace accentkit::eval {

struct KMeansOptions {
  size_t restarts = 100;
  size_t max_iterations = 300;
};

struct KMeansResult {
  std::vector<int> assignment;
  double inertia = 0.0;
};

// Lloyd's algorithm from k-means++ seeds, best inertia over restarts.
KMeansResult KMeans(const Eigen::MatrixXd &points, size_t k, uint64_t seed,
                    const KMeansOptions &opts = {});

// Normalized spectral clustering of a cosine-similarity matrix. Negative
// similarities are clipped to zero affinity. Cluster ids are numbered by
// first appearance over the sorted labels, so the result does not depend
// on the input label order.
std::map<std::string, int> SpectralCluster(const SimilarityMatrix &sim,
                                           size_t n_clusters, uint64_t seed,
                                           const KMeansOptions &opts = {});

}  // namespace accentkit::eval

#endif  // ACCENTKIT_EVAL_CLUSTER_HPP_
