// src/eval/scores.cpp
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

#include "accentkit/eval/scores.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accentkit/error.hpp"
#include "json.hpp"

namespace accentkit::eval {

std::string NormalizeTranscript(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    char kept = 0;
    if (u >= 'A' && u <= 'Z') kept = static_cast<char>(u - 'A' + 'a');
    else if ((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u == '\'' || u >= 0x80)
      kept = ch;  // bytes >= 0x80 belong to UTF-8 letters
    else if (u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\f' || u == '\v')
      pending_space = true;
    if (kept) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(kept);
    }
  }
  return out;
}

std::vector<std::string> SplitWords(std::string_view normalized) {
  std::vector<std::string> words;
  std::istringstream ss{std::string(normalized)};
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

WerResult Wer(std::string_view reference, std::string_view hypothesis) {
  const std::vector<std::string> ref = SplitWords(NormalizeTranscript(reference));
  const std::vector<std::string> hyp = SplitWords(NormalizeTranscript(hypothesis));
  if (ref.empty()) throw ValidationError("WER reference is empty after normalization");

  const size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<size_t>> dist(n + 1, std::vector<size_t>(m + 1));
  for (size_t i = 0; i <= n; ++i) dist[i][0] = i;
  for (size_t j = 0; j <= m; ++j) dist[0][j] = j;
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      dist[i][j] = std::min({dist[i - 1][j] + 1, dist[i][j - 1] + 1,
                             dist[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});

  WerResult r;
  r.n_ref_words = n;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && dist[i][j] == dist[i - 1][j - 1]) {
      --i;
      --j;
    } else if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
      ++r.deletions;
      --i;
    } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
      ++r.substitutions;
      --i;
      --j;
    } else {
      ++r.insertions;
      --j;
    }
  }
  r.wer = static_cast<double>(r.edits()) / static_cast<double>(n);
  return r;
}

std::string WerToJson(const WerResult &w) {
  nlohmann::ordered_json j;
  j["wer"] = w.wer;
  j["substitutions"] = w.substitutions;
  j["deletions"] = w.deletions;
  j["insertions"] = w.insertions;
  j["n_ref_words"] = w.n_ref_words;
  return j.dump();
}

MosSummary MosCi(std::span<const double> scores) {
  if (scores.size() < 2)
    throw ValidationError("MOS confidence interval needs at least 2 scores, got " +
                          std::to_string(scores.size()));
  double sum = 0.0;
  for (double s : scores) {
    if (!(s >= 1.0 && s <= 5.0))
      throw ValidationError("opinion score " + std::to_string(s) + " outside [1, 5]");
    sum += s;
  }
  MosSummary out;
  out.n = scores.size();
  if (std::all_of(scores.begin(), scores.end(),
                  [&](double s) { return s == scores.front(); })) {
    out.mean = scores.front();
    return out;
  }
  out.mean = sum / static_cast<double>(out.n);
  double ss = 0.0;
  for (double s : scores) ss += (s - out.mean) * (s - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  out.ci95_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

std::string MosToJson(const MosSummary &m) {
  nlohmann::ordered_json j;
  j["mean"] = m.mean;
  j["ci95_halfwidth"] = m.ci95_halfwidth;
  j["n"] = m.n;
  return j.dump();
}

}  // namespace accentkit::eval
