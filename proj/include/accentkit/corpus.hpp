// include/accentkit/corpus.hpp
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

// Corpus ingestion and curation: manifests, geolocation predictions, the
// three accent-label selection strategies, per-accent statistics, label
// precision, balanced batch planning and augmentation planning.

#ifndef ACCENTKIT_CORPUS_HPP_
#define ACCENTKIT_CORPUS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "accentkit/georegion.hpp"

namespace accentkit::corpus {

struct UtteranceRecord {
  std::string utt_id;
  std::string speaker_id;
  std::string audio_path;
  std::string text;
  std::string self_accent;  // empty = unlabeled
  double duration_sec = 0.0;

  bool labeled() const { return !self_accent.empty(); }
};

class Manifest {
 public:
  Manifest() = default;
  // Throws ValidationError on duplicate utt_id or a bad duration.
  explicit Manifest(std::vector<UtteranceRecord> records);

  const std::vector<UtteranceRecord> &records() const { return records_; }
  size_t size() const { return records_.size(); }
  const UtteranceRecord *Find(std::string_view utt_id) const;
  // Record indices per speaker, in manifest order.
  const std::map<std::string, std::vector<size_t>> &by_speaker() const {
    return by_speaker_;
  }

 private:
  std::vector<UtteranceRecord> records_;
  std::unordered_map<std::string, size_t> by_id_;
  std::map<std::string, std::vector<size_t>> by_speaker_;
};

// TSV with header utt_id, speaker_id, audio_path, text, self_accent,
// duration_sec (any column order). Errors cite the 1-based line number.
Manifest LoadManifest(std::istream &in);
void WriteManifest(const Manifest &m, std::ostream &out);

using GeoPredictions = std::unordered_map<std::string, geo::Coordinate>;

// JSONL, one {"utt_id":s,"lat":x,"lon":y} per line. Blank lines skipped.
GeoPredictions LoadGeoPredictions(std::istream &in);

enum class Strategy { kUnfiltered, kFiltered, kUnlabeled };

std::string_view StrategyName(Strategy s);
Strategy ParseStrategy(std::string_view name);

struct Provenance {
  bool self_label_used = false;
  std::optional<std::string> geo_accent;
};

struct SelectionEntry {
  std::string utt_id;
  std::string accent;
  Provenance provenance;
};

struct SkipReport {
  size_t no_prediction = 0;
  size_t no_region_for_label = 0;
  size_t rejected = 0;
};

struct Selection {
  Strategy strategy = Strategy::kUnlabeled;
  std::vector<SelectionEntry> entries;  // manifest order
  SkipReport skipped;
};

// UNFILTERED keeps every self-labeled record. FILTERED keeps a self-labeled
// record only if its prediction falls in one of that accent's own boxes.
// UNLABELED ignores self labels and assigns the first matching region.
// Self labels resolve to region names through RegionSet::Resolve.
Selection Select(const Manifest &manifest, const GeoPredictions &preds,
                 const geo::RegionSet &regions, Strategy strategy);

// One JSON object per entry:
//   {"utt_id":s,"accent":s,"strategy":s,"self_label_used":b,"geo_accent":s|null}
void WriteSelection(const Selection &sel, std::ostream &out);
Selection ReadSelection(std::istream &in);
std::string SkipReportToJson(const SkipReport &r);

struct AccentStats {
  double total_seconds = 0.0;
  size_t n_utterances = 0;
  size_t n_speakers = 0;

  double hours() const { return total_seconds / 3600.0; }
};

using CorpusStats = std::map<std::string, AccentStats>;

// Accents with no entries are absent. Throws ValidationError naming a
// selection utt_id missing from the manifest.
CorpusStats Stats(const Selection &sel, const Manifest &manifest);
// {"accent":{"hours":x,"n_speakers":n,"n_utterances":n},...}
std::string StatsToJson(const CorpusStats &stats);

// utt_id -> reference accent label.
using ReferenceLabels = std::unordered_map<std::string, std::string>;

struct PrecisionCount {
  size_t matched = 0;
  size_t referenced = 0;
  // nullopt when no entry of this accent has a reference label
  std::optional<double> value() const {
    if (referenced == 0) return std::nullopt;
    return static_cast<double>(matched) / static_cast<double>(referenced);
  }
};

using PrecisionReport = std::map<std::string, PrecisionCount>;

// Throws ValidationError unless `found` is an UNLABELED selection.
PrecisionReport LabelPrecision(const Selection &found,
                               const ReferenceLabels &reference);
// {"accent":{"matched":n,"precision":x|null,"referenced":n},...}
std::string PrecisionToJson(const PrecisionReport &report);

// Self-reported labels resolved to region names; unresolvable nonempty
// labels are kept as written (trimmed) and can never match.
ReferenceLabels SelfReferenceLabels(const Manifest &manifest,
                                    const geo::RegionSet &regions);
// TSV, two columns utt_id<TAB>accent, no header.
ReferenceLabels LoadReferenceLabels(std::istream &in);

struct PlannedUtterance {
  std::string utt_id;
  std::string accent;
};

struct EpochPlan {
  uint64_t seed = 0;
  size_t batch_size = 0;
  std::vector<std::string> accents;                   // sorted
  std::vector<std::vector<PlannedUtterance>> batches;  // accent-major inside
};

// Up-samples smaller accents so every batch holds batch_size / A entries of
// each of the A accents. Each accent's entries are drawn as successive
// seeded permutations; the epoch ends once the largest accent has been
// consumed exactly once.
EpochPlan BalancedBatches(const Selection &sel, size_t batch_size,
                          uint64_t seed);
// {"batch":i,"utt_id":s,"accent":s} per line
void WriteEpochPlan(const EpochPlan &plan, std::ostream &out);

enum class AugmentMethod { kNone, kKnnVc, kPitchShift };

std::string_view AugmentMethodName(AugmentMethod m);
AugmentMethod ParseAugmentMethod(std::string_view name);

inline constexpr double kMaxPitchSteps = 4.0;

struct AugmentDecision {
  std::string utt_id;
  AugmentMethod method = AugmentMethod::kNone;
  std::optional<std::string> donor_speaker_id;  // kKnnVc
  std::optional<double> fractional_steps;       // kPitchShift, [-4, 4]
};

struct AugmentPlan {
  uint64_t seed = 0;
  std::vector<AugmentDecision> decisions;
};

// Draws are keyed on (seed, utt_id), so a given utterance's decision does
// not depend on what else is in the selection.
AugmentPlan MakeAugmentPlan(const Selection &sel,
                            std::span<const std::string> donor_speakers,
                            AugmentMethod method, uint64_t seed);
void WriteAugmentPlan(const AugmentPlan &plan, std::ostream &out);

}  // namespace accentkit::corpus

#endif  // ACCENTKIT_CORPUS_HPP_
