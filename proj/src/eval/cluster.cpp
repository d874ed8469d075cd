// src/eval/cluster.cpp
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

#include "accentkit/eval/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "accentkit/error.hpp"
#include "accentkit/rng.hpp"

namespace accentkit::eval {

namespace {

Eigen::MatrixXd KMeansPlusPlus(const Eigen::MatrixXd &pts, size_t k,
                               std::mt19937_64 &eng) {
  const Eigen::Index n = pts.rows();
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), pts.cols());
  centers.row(0) = pts.row(static_cast<Eigen::Index>(UniformIndex(eng, n)));
  Eigen::VectorXd d2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double r = UniformUnit(eng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(UniformIndex(eng, n));
    }
    centers.row(static_cast<Eigen::Index>(c)) = pts.row(pick);
    d2 = d2.cwiseMin(
        (pts.rowwise() - centers.row(static_cast<Eigen::Index>(c))).rowwise().squaredNorm());
  }
  return centers;
}

KMeansResult Lloyd(const Eigen::MatrixXd &pts, Eigen::MatrixXd centers,
                   size_t max_iterations) {
  const Eigen::Index n = pts.rows();
  const Eigen::Index k = centers.rows();
  KMeansResult res;
  res.assignment.assign(static_cast<size_t>(n), -1);
  for (size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d = (pts.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (res.assignment[static_cast<size_t>(i)] != best) {
        res.assignment[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
    std::vector<size_t> counts(static_cast<size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.assignment[static_cast<size_t>(i)]) += pts.row(i);
      ++counts[static_cast<size_t>(res.assignment[static_cast<size_t>(i)])];
    }
    // Empty clusters keep their previous center.
    for (Eigen::Index c = 0; c < k; ++c)
      if (counts[static_cast<size_t>(c)] > 0)
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<size_t>(c)]);
  }
  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res.inertia += (pts.row(i) - centers.row(res.assignment[static_cast<size_t>(i)]))
                       .squaredNorm();
  return res;
}

}  // namespace

KMeansResult KMeans(const Eigen::MatrixXd &points, size_t k, uint64_t seed,
                    const KMeansOptions &opts) {
  if (k == 0 || static_cast<Eigen::Index>(k) > points.rows())
    throw ValidationError("k-means: k = " + std::to_string(k) + " out of range for " +
                          std::to_string(points.rows()) + " points");
  std::mt19937_64 eng(SplitMix64(seed));
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  const size_t restarts = std::max<size_t>(1, opts.restarts);
  for (size_t r = 0; r < restarts; ++r) {
    KMeansResult res = Lloyd(points, KMeansPlusPlus(points, k, eng), opts.max_iterations);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

std::map<std::string, int> SpectralCluster(const SimilarityMatrix &sim,
                                           size_t n_clusters, uint64_t seed,
                                           const KMeansOptions &opts) {
  const auto m = static_cast<Eigen::Index>(sim.labels.size());
  if (sim.values.rows() != m || sim.values.cols() != m)
    throw ValidationError("similarity matrix shape does not match its labels");
  if (n_clusters < 1 || static_cast<Eigen::Index>(n_clusters) > m)
    throw ValidationError("n_clusters = " + std::to_string(n_clusters) +
                          " out of range [1, " + std::to_string(m) + "]");

  // Work in sorted-label order.
  std::vector<Eigen::Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return sim.labels[static_cast<size_t>(a)] < sim.labels[static_cast<size_t>(b)];
  });
  for (size_t i = 1; i < order.size(); ++i)
    if (sim.labels[static_cast<size_t>(order[i])] ==
        sim.labels[static_cast<size_t>(order[i - 1])])
      throw ValidationError("duplicate label " + sim.labels[static_cast<size_t>(order[i])]);

  Eigen::MatrixXd affinity(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      affinity(i, j) = i == j ? 0.0 : std::max(0.0, sim.values(order[static_cast<size_t>(i)],
                                                                order[static_cast<size_t>(j)]));
  affinity = 0.5 * (affinity + affinity.transpose());

  Eigen::VectorXd inv_sqrt_deg(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double deg = affinity.row(i).sum();
    inv_sqrt_deg[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  const Eigen::MatrixXd laplacian =
      Eigen::MatrixXd::Identity(m, m) -
      inv_sqrt_deg.asDiagonal() * affinity * inv_sqrt_deg.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian);
  if (es.info() != Eigen::Success)
    throw ValidationError("spectral clustering: eigendecomposition failed");
  Eigen::MatrixXd embed = es.eigenvectors().leftCols(static_cast<Eigen::Index>(n_clusters));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }

  const KMeansResult km = KMeans(embed, n_clusters, seed, opts);

  std::map<std::string, int> out;
  std::map<int, int> canonical;
  for (Eigen::Index i = 0; i < m; ++i) {
    const int raw = km.assignment[static_cast<size_t>(i)];
    auto it = canonical.emplace(raw, static_cast<int>(canonical.size())).first;
    out[sim.labels[static_cast<size_t>(order[static_cast<size_t>(i)])]] = it->second;
  }
  return out;
}

}  // namespace accentkit::eval
