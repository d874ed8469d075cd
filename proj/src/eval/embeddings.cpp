// src/eval/embeddings.cpp
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

#include "accentkit/eval/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "accentkit/error.hpp"
#include "json.hpp"

namespace accentkit::eval {

namespace {

using nlohmann::json;

std::string LinePrefix(size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

EmbeddingSet::EmbeddingSet(std::vector<Embedding> entries)
    : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Embedding &e = entries_[i];
    if (i == 0) dim_ = e.vec.size();
    if (e.vec.size() == 0)
      throw ValidationError("embedding " + e.utt_id + ": empty vector");
    if (e.vec.size() != dim_)
      throw ValidationError("embedding " + e.utt_id + ": dimension " +
                            std::to_string(e.vec.size()) + ", expected " +
                            std::to_string(dim_));
    if (!e.vec.allFinite())
      throw ValidationError("embedding " + e.utt_id + ": non-finite component");
    if (!by_id_.emplace(e.utt_id, i).second)
      throw ValidationError("duplicate embedding utt_id " + e.utt_id);
  }
}

const Embedding *EmbeddingSet::Find(std::string_view utt_id) const {
  auto it = by_id_.find(std::string(utt_id));
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> EmbeddingSet::Labels() const {
  std::set<std::string> s;
  for (const Embedding &e : entries_) s.insert(e.label);
  return {s.begin(), s.end()};
}

Eigen::MatrixXd EmbeddingSet::AsMatrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(entries_.size()), dim_);
  for (size_t i = 0; i < entries_.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = entries_[i].vec.transpose();
  return m;
}

EmbeddingSet LoadEmbeddings(std::istream &in) {
  std::vector<Embedding> entries;
  std::string line;
  size_t line_no = 0;
  Eigen::Index dim = -1;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ValidationError(LinePrefix(line_no) + "malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("utt_id") || !j["utt_id"].is_string() ||
        !j.contains("label") || !j["label"].is_string() || !j.contains("vec") ||
        !j["vec"].is_array())
      throw ValidationError(LinePrefix(line_no) +
                            "expected {\"utt_id\":s,\"label\":s,\"vec\":[...]}");
    Embedding e;
    e.utt_id = j["utt_id"].get<std::string>();
    e.label = j["label"].get<std::string>();
    const json &v = j["vec"];
    if (v.empty()) throw ValidationError(LinePrefix(line_no) + "empty vector");
    if (dim < 0) dim = static_cast<Eigen::Index>(v.size());
    if (static_cast<Eigen::Index>(v.size()) != dim)
      throw ValidationError(LinePrefix(line_no) + "dimension mismatch: got " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(dim));
    e.vec.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const json &x = v[static_cast<size_t>(i)];
      if (!x.is_number())
        throw ValidationError(LinePrefix(line_no) + "vec[" + std::to_string(i) +
                              "] is not a number");
      e.vec[i] = x.get<double>();
      if (!std::isfinite(e.vec[i]))
        throw ValidationError(LinePrefix(line_no) + "vec[" + std::to_string(i) +
                              "] is not finite");
    }
    if (!seen.insert(e.utt_id).second)
      throw ValidationError(LinePrefix(line_no) + "duplicate utt_id " + e.utt_id);
    entries.push_back(std::move(e));
  }
  return EmbeddingSet(std::move(entries));
}

void WriteEmbeddings(const EmbeddingSet &set, std::ostream &out) {
  for (const Embedding &e : set.entries()) {
    nlohmann::ordered_json j;
    j["utt_id"] = e.utt_id;
    j["label"] = e.label;
    j["vec"] = std::vector<double>(e.vec.data(), e.vec.data() + e.vec.size());
    out << j.dump() << '\n';
  }
}

double Cosine(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  if (a.size() != b.size())
    throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero-norm vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Pairing LoadPairing(std::istream &in) {
  Pairing pairs;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string eval_id, ref_id, extra;
    if (!(ls >> eval_id)) continue;
    if (!(ls >> ref_id) || (ls >> extra))
      throw ValidationError(LinePrefix(line_no) + "expected <eval-utt-id> <ref-utt-id>");
    if (!seen.insert(eval_id).second)
      throw ValidationError(LinePrefix(line_no) + "eval utt_id " + eval_id +
                            " paired twice");
    pairs.emplace_back(std::move(eval_id), std::move(ref_id));
  }
  return pairs;
}

GtSimilarity GroundTruthSimilarity(const EmbeddingSet &eval_set,
                                   const EmbeddingSet &ref_set,
                                   const Pairing &pairing) {
  if (pairing.empty()) throw ValidationError("empty pairing");
  GtSimilarity g;
  std::map<std::string, double> sums;
  double total = 0.0;
  for (const auto &[eval_id, ref_id] : pairing) {
    const Embedding *e = eval_set.Find(eval_id);
    if (!e) throw ValidationError("pairing references unknown eval utt_id " + eval_id);
    const Embedding *r = ref_set.Find(ref_id);
    if (!r) throw ValidationError("pairing references unknown reference utt_id " + ref_id);
    const double c = Cosine(e->vec, r->vec);
    sums[r->label] += c;
    ++g.n_pairs[r->label];
    total += c;
  }
  for (const auto &[label, s] : sums)
    g.per_accent[label] = s / static_cast<double>(g.n_pairs[label]);
  g.overall = total / static_cast<double>(pairing.size());
  return g;
}

std::string GtSimilarityToJson(const GtSimilarity &g) {
  json j;
  j["overall"] = g.overall;
  j["per_accent"] = json::object();
  for (const auto &[label, m] : g.per_accent)
    j["per_accent"][label] = {{"mean", m}, {"n_pairs", g.n_pairs.at(label)}};
  return j.dump();
}

SimilarityMatrix MeanEmbeddingSimilarity(const EmbeddingSet &set) {
  SimilarityMatrix sim;
  sim.labels = set.Labels();
  if (sim.labels.empty()) throw ValidationError("empty embedding set");
  const auto n = static_cast<Eigen::Index>(sim.labels.size());
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index[sim.labels[static_cast<size_t>(i)]] = i;

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n, set.dim());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  for (const Embedding &e : set.entries()) {
    Eigen::Index i = index[e.label];
    means.row(i) += e.vec.transpose();
    counts[i] += 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    means.row(i) /= counts[i];
    if (means.row(i).norm() == 0.0)
      throw ValidationError("mean embedding of label " +
                            sim.labels[static_cast<size_t>(i)] + " has zero norm");
  }
  sim.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sim.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = Cosine(means.row(i).transpose(), means.row(j).transpose());
      sim.values(i, j) = c;
      sim.values(j, i) = c;
    }
  }
  return sim;
}

std::string SimilarityToCsv(const SimilarityMatrix &sim) {
  std::string out = "label";
  for (const std::string &l : sim.labels) {
    if (l.find_first_of(",\"\n\r") != std::string::npos)
      throw ValidationError("label " + l + " cannot be written to CSV");
    out += "," + l;
  }
  out += "\n";
  for (size_t i = 0; i < sim.labels.size(); ++i) {
    out += sim.labels[i];
    for (size_t j = 0; j < sim.labels.size(); ++j)
      out += "," + FormatDouble(sim.values(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j)));
    out += "\n";
  }
  return out;
}

SimilarityMatrix ReadSimilarityCsv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("similarity CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = SplitCsv(line);
  if (header.size() < 2) throw ValidationError("similarity CSV: no labels in header");
  SimilarityMatrix sim;
  sim.labels.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(sim.labels.size());
  sim.values.resize(n, n);
  Eigen::Index row = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= n) throw ValidationError(LinePrefix(line_no) + "too many rows");
    std::vector<std::string> cells = SplitCsv(line);
    if (static_cast<Eigen::Index>(cells.size()) != n + 1)
      throw ValidationError(LinePrefix(line_no) + "expected " + std::to_string(n + 1) +
                            " cells");
    if (cells[0] != sim.labels[static_cast<size_t>(row)])
      throw ValidationError(LinePrefix(line_no) + "row label " + cells[0] +
                            " does not match column label " +
                            sim.labels[static_cast<size_t>(row)]);
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::string &s = cells[static_cast<size_t>(c + 1)];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ValidationError(LinePrefix(line_no) + "bad value " + s);
      sim.values(row, c) = v;
    }
    ++row;
  }
  if (row != n) throw ValidationError("similarity CSV: expected " + std::to_string(n) + " rows");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(sim.values(i, i) - 1.0) > 1e-12)
      throw ValidationError("similarity CSV: diagonal entry for " +
                            sim.labels[static_cast<size_t>(i)] + " is not 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(sim.values(i, j) - sim.values(j, i)) > 1e-12)
        throw ValidationError("similarity CSV: matrix is not symmetric");
      if (sim.values(i, j) < -1.0 - 1e-12 || sim.values(i, j) > 1.0 + 1e-12)
        throw ValidationError("similarity CSV: value outside [-1, 1]");
    }
  }
  return sim;
}

}  // namespace accentkit::eval
