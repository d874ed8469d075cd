// include/accentkit/eval/backend.hpp
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

// PCA, the shared-covariance Gaussian backend, trial scoring and the
// detection cost function.

#ifndef ACCENTKIT_EVAL_BACKEND_HPP_
#define ACCENTKIT_EVAL_BACKEND_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "accentkit/eval/embeddings.hpp"

namespace accentkit::eval {

inline constexpr size_t kDefaultPcaDim = 18;

struct PcaModel {
  Eigen::VectorXd mean;         // D
  Eigen::MatrixXd basis;        // d x D, orthonormal rows
  Eigen::VectorXd eigenvalues;  // d, descending, >= 0

  Eigen::Index dim() const { return basis.rows(); }
  Eigen::VectorXd Project(const Eigen::VectorXd &x) const {
    return basis * (x - mean);
  }
};

// Top-d principal axes of the sample covariance (n - 1 denominator). Each
// basis row is signed so that its first nonzero component is positive.
// Requires n >= 2 and d <= min(n - 1, D); all-identical rows throw "rank 0".
PcaModel FitPca(const Eigen::MatrixXd &x, size_t d);

// Multiclass Gaussian classifier with per-class means and one pooled
// covariance, in PCA space.
class GaussianBackend {
 public:
  // shared_cov = within_cov + reg_lambda * I. Throws ValidationError if the
  // result is not symmetric (1e-9) or not positive-definite.
  GaussianBackend(PcaModel pca, std::vector<std::string> classes,
                  std::vector<Eigen::VectorXd> class_means,
                  const Eigen::MatrixXd &within_cov, double reg_lambda);

  const PcaModel &pca() const { return pca_; }
  const std::vector<std::string> &classes() const { return classes_; }
  const std::vector<Eigen::VectorXd> &class_means() const { return means_; }
  const Eigen::MatrixXd &shared_cov() const { return cov_; }
  double reg_lambda() const { return reg_lambda_; }

  // log N(Px; mu_a, Sigma) per class.
  std::vector<double> LogLikelihoods(const Eigen::VectorXd &x) const;
  // loglik_a - log(mean over b != a of exp(loglik_b)), per class.
  std::vector<double> ScoreLlr(const Eigen::VectorXd &x) const;

 private:
  PcaModel pca_;
  std::vector<std::string> classes_;
  std::vector<Eigen::VectorXd> means_;
  Eigen::MatrixXd cov_;
  double reg_lambda_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double log_norm_ = 0.0;  // -0.5 * (d log 2pi + log det Sigma)
};

// PCA on every reference vector, class means in PCA space, within-class
// scatter over n - K. reg_lambda defaults to 1e-6 * trace(S) / d.
GaussianBackend FitBackend(const EmbeddingSet &ref, size_t d,
                           std::optional<double> reg_lambda = std::nullopt);

struct Trial {
  std::string utt_id;
  std::string intended;
  std::vector<double> llr;  // aligned with TrialScores::accents
};

struct TrialScores {
  std::vector<std::string> accents;
  std::vector<Trial> trials;
};

// Scores every eval embedding; its label is the intended accent and must be
// one of the backend classes.
TrialScores ScoreTrials(const GaussianBackend &backend, const EmbeddingSet &eval_set);

// {"utt_id":s,"intended":s,"llr":{accent:x,...}} per line
void WriteTrialScores(const TrialScores &scores, std::ostream &out);
TrialScores ReadTrialScores(std::istream &in);

struct DcfConfig {
  std::vector<double> operating_points = {0.1, 0.5};
};

struct OperatingPointCost {
  double p_target = 0.0;
  double threshold = 0.0;
  double p_miss = 0.0;
  double p_fa = 0.0;
  double c_norm = 0.0;
};

struct AccentDcf {
  size_t n_target = 0;
  size_t n_nontarget = 0;
  std::vector<OperatingPointCost> points;
  double dcf = 0.0;  // mean of c_norm over points
};

struct DcfReport {
  std::map<std::string, AccentDcf> per_accent;
  double average = 0.0;  // unweighted over accents
};

// One-vs-rest actual DCF per accent with the Bayes threshold
// log((1 - p) / p), c_miss = c_fa = 1, normalized by min(p, 1 - p).
DcfReport Dcf(const TrialScores &scores, const DcfConfig &cfg = {});
// {"accent":{"dcf":x,...},...,"average":x}
std::string DcfToJson(const DcfReport &report);

}  // namespace accentkit::eval

#endif  // ACCENTKIT_EVAL_BACKEND_HPP_
