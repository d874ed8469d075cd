// include/accentkit/eval/scores.hpp
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

// Word error rate and opinion-score aggregation.

#ifndef ACCENTKIT_EVAL_SCORES_HPP_
#define ACCENTKIT_EVAL_SCORES_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace accentkit::eval {

// Lowercase, keep letters/digits/apostrophes, collapse whitespace.
std::string NormalizeTranscript(std::string_view text);
std::vector<std::string> SplitWords(std::string_view normalized);

struct WerResult {
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t n_ref_words = 0;
  double wer = 0.0;

  size_t edits() const { return substitutions + deletions + insertions; }
};

// Word-level Levenshtein alignment. On the backtrace a match is taken when
// possible, otherwise deletion > substitution > insertion.
// Throws ValidationError if the normalized reference is empty.
WerResult Wer(std::string_view reference, std::string_view hypothesis);
std::string WerToJson(const WerResult &w);

struct MosSummary {
  size_t n = 0;
  double mean = 0.0;
  double ci95_halfwidth = 0.0;  // 1.96 * s / sqrt(n)
};

// Throws ValidationError for n < 2 or a score outside [1, 5].
MosSummary MosCi(std::span<const double> scores);
std::string MosToJson(const MosSummary &m);

}  // namespace accentkit::eval

#endif  // ACCENTKIT_EVAL_SCORES_HPP_
