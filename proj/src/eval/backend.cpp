// src/eval/backend.cpp
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

#include "accentkit/eval/backend.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "accentkit/error.hpp"
#include "json.hpp"

namespace accentkit::eval {

namespace {

using nlohmann::json;

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

PcaModel FitPca(const Eigen::MatrixXd &x, size_t d) {
  const Eigen::Index n = x.rows(), dim = x.cols();
  if (n < 2) throw ValidationError("PCA needs at least 2 rows, got " + std::to_string(n));
  if (d == 0) throw ValidationError("PCA target dimension must be at least 1");
  const auto max_d = static_cast<size_t>(std::min<Eigen::Index>(n - 1, dim));
  if (d > max_d)
    throw ValidationError("PCA target dimension " + std::to_string(d) +
                          " too large (max " + std::to_string(max_d) + " for " +
                          std::to_string(n) + " x " + std::to_string(dim) + " data)");
  if (!x.allFinite()) throw ValidationError("PCA input is not finite");

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  if (!(cov.trace() > 0.0)) throw ValidationError("PCA input has rank 0");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw ValidationError("PCA eigendecomposition failed");
  const auto di = static_cast<Eigen::Index>(d);
  model.basis.resize(di, dim);
  model.eigenvalues.resize(di);
  for (Eigen::Index i = 0; i < di; ++i) {
    const Eigen::Index src = dim - 1 - i;  // ascending order from Eigen
    Eigen::VectorXd v = es.eigenvectors().col(src);
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (std::abs(v[c]) > 1e-12) {
        if (v[c] < 0.0) v = -v;
        break;
      }
    }
    model.basis.row(i) = v.transpose();
    model.eigenvalues[i] = std::max(0.0, es.eigenvalues()[src]);
  }
  return model;
}

GaussianBackend::GaussianBackend(PcaModel pca, std::vector<std::string> classes,
                                 std::vector<Eigen::VectorXd> class_means,
                                 const Eigen::MatrixXd &within_cov, double reg_lambda)
    : pca_(std::move(pca)),
      classes_(std::move(classes)),
      means_(std::move(class_means)),
      reg_lambda_(reg_lambda) {
  const Eigen::Index d = pca_.dim();
  if (classes_.size() < 2) throw ValidationError("backend needs at least 2 classes");
  if (classes_.size() != means_.size())
    throw ValidationError("backend: class names and means differ in count");
  if (std::set<std::string>(classes_.begin(), classes_.end()).size() != classes_.size())
    throw ValidationError("backend: duplicate class name");
  for (size_t k = 0; k < means_.size(); ++k)
    if (means_[k].size() != d)
      throw ValidationError("backend: mean of class " + classes_[k] +
                            " has wrong dimension");
  if (within_cov.rows() != d || within_cov.cols() != d)
    throw ValidationError("backend: covariance must be " + std::to_string(d) + " x " +
                          std::to_string(d));
  if (!std::isfinite(reg_lambda) || reg_lambda < 0.0)
    throw ValidationError("backend: reg_lambda must be finite and >= 0");
  cov_ = within_cov;
  cov_.diagonal().array() += reg_lambda;
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("backend: covariance is not symmetric");
  chol_.compute(cov_);
  if (chol_.info() != Eigen::Success)
    throw ValidationError("backend: covariance is not positive-definite");
  const double log_det =
      2.0 * chol_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (!std::isfinite(log_det))
    throw ValidationError("backend: covariance is not positive-definite");
  log_norm_ = -0.5 * (static_cast<double>(d) * kLog2Pi + log_det);
}

std::vector<double> GaussianBackend::LogLikelihoods(const Eigen::VectorXd &x) const {
  if (x.size() != pca_.mean.size())
    throw ValidationError("backend: input dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(pca_.mean.size()));
  const Eigen::VectorXd y = pca_.Project(x);
  std::vector<double> ll(means_.size());
  for (size_t k = 0; k < means_.size(); ++k) {
    const Eigen::VectorXd z = chol_.matrixL().solve(y - means_[k]);
    ll[k] = log_norm_ - 0.5 * z.squaredNorm();
  }
  return ll;
}

std::vector<double> GaussianBackend::ScoreLlr(const Eigen::VectorXd &x) const {
  const std::vector<double> ll = LogLikelihoods(x);
  const size_t k = ll.size();
  const double log_others = std::log(static_cast<double>(k - 1));
  std::vector<double> llr(k);
  for (size_t a = 0; a < k; ++a) {
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < k; ++b)
      if (b != a) mx = std::max(mx, ll[b]);
    double sum = 0.0;
    for (size_t b = 0; b < k; ++b)
      if (b != a) sum += std::exp(ll[b] - mx);
    llr[a] = ll[a] - (mx + std::log(sum) - log_others);
  }
  return llr;
}

GaussianBackend FitBackend(const EmbeddingSet &ref, size_t d,
                           std::optional<double> reg_lambda) {
  const std::vector<std::string> classes = ref.Labels();
  if (classes.size() < 2)
    throw ValidationError("backend needs at least 2 classes, got " +
                          std::to_string(classes.size()));
  std::map<std::string, size_t> index;
  for (size_t k = 0; k < classes.size(); ++k) index[classes[k]] = k;
  std::vector<size_t> counts(classes.size(), 0);
  for (const Embedding &e : ref.entries()) ++counts[index[e.label]];
  for (size_t k = 0; k < classes.size(); ++k)
    if (counts[k] < 2)
      throw ValidationError("class " + classes[k] + " has " + std::to_string(counts[k]) +
                            " entries; at least 2 are required");

  PcaModel pca = FitPca(ref.AsMatrix(), d);
  const auto di = static_cast<Eigen::Index>(d);
  std::vector<Eigen::VectorXd> projected;
  projected.reserve(ref.size());
  std::vector<Eigen::VectorXd> means(classes.size(), Eigen::VectorXd::Zero(di));
  for (const Embedding &e : ref.entries()) {
    projected.push_back(pca.Project(e.vec));
    means[index[e.label]] += projected.back();
  }
  for (size_t k = 0; k < classes.size(); ++k) means[k] /= static_cast<double>(counts[k]);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(di, di);
  for (size_t i = 0; i < ref.size(); ++i) {
    const Eigen::VectorXd c = projected[i] - means[index[ref.entries()[i].label]];
    scatter.noalias() += c * c.transpose();
  }
  scatter /= static_cast<double>(ref.size() - classes.size());
  scatter = 0.5 * (scatter + scatter.transpose());
  const double lambda = reg_lambda.value_or(1e-6 * scatter.trace() / static_cast<double>(d));
  return GaussianBackend(std::move(pca), classes, std::move(means), scatter, lambda);
}

TrialScores ScoreTrials(const GaussianBackend &backend, const EmbeddingSet &eval_set) {
  TrialScores scores;
  scores.accents = backend.classes();
  const std::set<std::string> known(scores.accents.begin(), scores.accents.end());
  scores.trials.reserve(eval_set.size());
  for (const Embedding &e : eval_set.entries()) {
    if (!known.count(e.label))
      throw ValidationError("trial " + e.utt_id + ": intended accent " + e.label +
                            " is not an enrolled class");
    scores.trials.push_back({e.utt_id, e.label, backend.ScoreLlr(e.vec)});
  }
  return scores;
}

void WriteTrialScores(const TrialScores &scores, std::ostream &out) {
  for (const Trial &t : scores.trials) {
    nlohmann::ordered_json j;
    j["utt_id"] = t.utt_id;
    j["intended"] = t.intended;
    json llr = json::object();
    for (size_t a = 0; a < scores.accents.size(); ++a) llr[scores.accents[a]] = t.llr[a];
    j["llr"] = std::move(llr);
    out << j.dump() << '\n';
  }
}

TrialScores ReadTrialScores(std::istream &in) {
  TrialScores scores;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ValidationError(where + "malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("utt_id") || !j["utt_id"].is_string() ||
        !j.contains("intended") || !j["intended"].is_string() || !j.contains("llr") ||
        !j["llr"].is_object() || j["llr"].empty())
      throw ValidationError(where + "expected {\"utt_id\":s,\"intended\":s,\"llr\":{...}}");
    const json &llr = j["llr"];
    if (scores.accents.empty()) {
      for (auto it = llr.begin(); it != llr.end(); ++it) scores.accents.push_back(it.key());
    } else if (llr.size() != scores.accents.size()) {
      throw ValidationError(where + "llr accents differ from line 1");
    }
    Trial t;
    t.utt_id = j["utt_id"].get<std::string>();
    t.intended = j["intended"].get<std::string>();
    for (const std::string &a : scores.accents) {
      auto it = llr.find(a);
      if (it == llr.end()) throw ValidationError(where + "llr is missing accent " + a);
      if (!it->is_number()) throw ValidationError(where + "llr." + a + " is not a number");
      t.llr.push_back(it->get<double>());
    }
    if (std::find(scores.accents.begin(), scores.accents.end(), t.intended) ==
        scores.accents.end())
      throw ValidationError(where + "intended accent " + t.intended + " has no llr");
    scores.trials.push_back(std::move(t));
  }
  return scores;
}

DcfReport Dcf(const TrialScores &scores, const DcfConfig &cfg) {
  if (cfg.operating_points.empty()) throw ValidationError("no DCF operating points");
  for (double p : cfg.operating_points)
    if (!(p > 0.0 && p < 1.0))
      throw ValidationError("operating point " + std::to_string(p) + " not in (0, 1)");
  if (scores.accents.empty()) throw ValidationError("no accents to score");

  DcfReport report;
  double total = 0.0;
  for (size_t a = 0; a < scores.accents.size(); ++a) {
    const std::string &accent = scores.accents[a];
    if (accent == "average")
      throw ValidationError("accent name \"average\" is reserved in the DCF report");
    AccentDcf ad;
    std::vector<double> target, nontarget;
    for (const Trial &t : scores.trials) {
      if (t.llr.size() != scores.accents.size())
        throw ValidationError("trial " + t.utt_id + " has the wrong number of LLRs");
      const double s = t.llr[a];
      if (std::isnan(s)) throw ValidationError("trial " + t.utt_id + " has a NaN LLR");
      (t.intended == accent ? target : nontarget).push_back(s);
    }
    ad.n_target = target.size();
    ad.n_nontarget = nontarget.size();
    if (target.empty()) throw ValidationError("accent " + accent + " has no target trials");
    if (nontarget.empty())
      throw ValidationError("accent " + accent + " has no non-target trials");
    double sum = 0.0;
    for (double p : cfg.operating_points) {
      OperatingPointCost pt;
      pt.p_target = p;
      pt.threshold = std::log((1.0 - p) / p);
      const auto misses = std::count_if(target.begin(), target.end(),
                                        [&](double s) { return s < pt.threshold; });
      const auto fas = std::count_if(nontarget.begin(), nontarget.end(),
                                     [&](double s) { return s >= pt.threshold; });
      pt.p_miss = static_cast<double>(misses) / static_cast<double>(target.size());
      pt.p_fa = static_cast<double>(fas) / static_cast<double>(nontarget.size());
      pt.c_norm = (p * pt.p_miss + (1.0 - p) * pt.p_fa) / std::min(p, 1.0 - p);
      sum += pt.c_norm;
      ad.points.push_back(pt);
    }
    ad.dcf = sum / static_cast<double>(cfg.operating_points.size());
    total += ad.dcf;
    report.per_accent.emplace(accent, std::move(ad));
  }
  report.average = total / static_cast<double>(scores.accents.size());
  return report;
}

std::string DcfToJson(const DcfReport &report) {
  json j = json::object();
  for (const auto &[accent, ad] : report.per_accent) {
    json points = json::array();
    for (const OperatingPointCost &pt : ad.points)
      points.push_back({{"p_target", pt.p_target},
                        {"threshold", pt.threshold},
                        {"p_miss", pt.p_miss},
                        {"p_fa", pt.p_fa},
                        {"c_norm", pt.c_norm}});
    j[accent] = {{"dcf", ad.dcf},
                 {"n_target", ad.n_target},
                 {"n_nontarget", ad.n_nontarget},
                 {"points", std::move(points)}};
  }
  j["average"] = report.average;
  return j.dump();
}

}  // namespace accentkit::eval
