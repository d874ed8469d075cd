// src/corpus.cpp
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

#include "accentkit/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "accentkit/error.hpp"
#include "accentkit/rng.hpp"
#include "json.hpp"

namespace accentkit::corpus {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::array<const char *, 6> kColumns = {
    "utt_id", "speaker_id", "audio_path", "text", "self_accent",
    "duration_sec"};

std::string LinePrefix(size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

void StripCr(std::string &line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string ValidateDuration(double d) {
  if (!std::isfinite(d)) return "non-finite duration";
  if (d < 0.0) return "negative duration";
  return {};
}

std::string Quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

std::string Trim(std::string_view s) {
  const char *ws = " \t\r\n\f\v";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(ws) - b + 1));
}

}  // namespace

Manifest::Manifest(std::vector<UtteranceRecord> records)
    : records_(std::move(records)) {
  by_id_.reserve(records_.size());
  for (size_t i = 0; i < records_.size(); ++i) {
    const UtteranceRecord &r = records_[i];
    if (r.utt_id.empty())
      throw ValidationError("record " + std::to_string(i) + ": empty utt_id");
    if (std::string err = ValidateDuration(r.duration_sec); !err.empty())
      throw ValidationError("utt_id " + Quote(r.utt_id) + ": " + err);
    if (!by_id_.emplace(r.utt_id, i).second)
      throw ValidationError("duplicate utt_id " + Quote(r.utt_id));
    by_speaker_[r.speaker_id].push_back(i);
  }
}

const UtteranceRecord *Manifest::Find(std::string_view utt_id) const {
  auto it = by_id_.find(std::string(utt_id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

Manifest LoadManifest(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("line 1: missing header");
  StripCr(line);
  std::vector<std::string_view> header = SplitTabs(line);
  std::array<size_t, kColumns.size()> col{};
  for (size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end())
      throw ValidationError(LinePrefix(1) + "missing column " + kColumns[c]);
    col[c] = static_cast<size_t>(it - header.begin());
  }

  std::vector<UtteranceRecord> records;
  std::unordered_set<std::string> seen;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty()) continue;
    std::vector<std::string_view> f = SplitTabs(line);
    if (f.size() != header.size())
      throw ValidationError(LinePrefix(line_no) + "expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(f.size()));
    UtteranceRecord r;
    r.utt_id = f[col[0]];
    r.speaker_id = f[col[1]];
    r.audio_path = f[col[2]];
    r.text = f[col[3]];
    r.self_accent = f[col[4]];
    if (geo::FoldLabel(r.self_accent).empty()) r.self_accent.clear();
    if (r.utt_id.empty())
      throw ValidationError(LinePrefix(line_no) + "empty utt_id");
    if (!seen.insert(r.utt_id).second)
      throw ValidationError(LinePrefix(line_no) + "duplicate utt_id " +
                            Quote(r.utt_id));
    std::string_view dur = f[col[5]];
    const char *end = dur.data() + dur.size();
    auto [ptr, ec] = std::from_chars(dur.data(), end, r.duration_sec);
    if (ec != std::errc() || ptr != end || dur.empty())
      throw ValidationError(LinePrefix(line_no) + "non-numeric duration " +
                            Quote(dur));
    if (std::string err = ValidateDuration(r.duration_sec); !err.empty())
      throw ValidationError(LinePrefix(line_no) + err + " " + Quote(dur));
    records.push_back(std::move(r));
  }
  return Manifest(std::move(records));
}

void WriteManifest(const Manifest &m, std::ostream &out) {
  for (size_t c = 0; c < kColumns.size(); ++c)
    out << (c ? "\t" : "") << kColumns[c];
  out << '\n';
  for (const UtteranceRecord &r : m.records()) {
    out << r.utt_id << '\t' << r.speaker_id << '\t' << r.audio_path << '\t'
        << r.text << '\t' << r.self_accent << '\t'
        << json(r.duration_sec).dump() << '\n';
  }
}

GeoPredictions LoadGeoPredictions(std::istream &in) {
  GeoPredictions preds;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ValidationError(LinePrefix(line_no) + "malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("utt_id") || !j["utt_id"].is_string() ||
        !j.contains("lat") || !j["lat"].is_number() || !j.contains("lon") ||
        !j["lon"].is_number())
      throw ValidationError(LinePrefix(line_no) +
                            "expected {\"utt_id\":s,\"lat\":x,\"lon\":y}");
    std::string id = j["utt_id"].get<std::string>();
    try {
      geo::Coordinate c(j["lat"].get<double>(), j["lon"].get<double>());
      if (!preds.emplace(id, c).second)
        throw ValidationError("duplicate utt_id " + Quote(id));
    } catch (const ValidationError &e) {
      throw ValidationError(LinePrefix(line_no) + e.what());
    }
  }
  return preds;
}

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kUnfiltered: return "unfiltered";
    case Strategy::kFiltered: return "filtered";
    case Strategy::kUnlabeled: return "unlabeled";
  }
  return "unknown";
}

Strategy ParseStrategy(std::string_view name) {
  std::string key = geo::FoldLabel(name);
  if (key == "unfiltered") return Strategy::kUnfiltered;
  if (key == "filtered") return Strategy::kFiltered;
  if (key == "unlabeled") return Strategy::kUnlabeled;
  throw ValidationError("unknown strategy " + Quote(name));
}

Selection Select(const Manifest &manifest, const GeoPredictions &preds,
                 const geo::RegionSet &regions, Strategy strategy) {
  Selection sel;
  sel.strategy = strategy;
  for (const UtteranceRecord &r : manifest.records()) {
    switch (strategy) {
      case Strategy::kUnfiltered: {
        if (!r.labeled()) break;
        std::string accent =
            regions.Resolve(r.self_accent).value_or(Trim(r.self_accent));
        sel.entries.push_back({r.utt_id, std::move(accent), {true, std::nullopt}});
        break;
      }
      case Strategy::kFiltered: {
        if (!r.labeled()) break;
        std::optional<std::string> accent = regions.Resolve(r.self_accent);
        if (!accent) {
          ++sel.skipped.no_region_for_label;
          break;
        }
        auto p = preds.find(r.utt_id);
        if (p == preds.end()) {
          ++sel.skipped.no_prediction;
          break;
        }
        const geo::Region *region = regions.Find(*accent);
        bool inside = std::any_of(
            region->boxes.begin(), region->boxes.end(),
            [&](const geo::BoundingBox &b) { return geo::Contains(b, p->second); });
        if (!inside) {
          ++sel.skipped.rejected;
          break;
        }
        sel.entries.push_back(
            {r.utt_id, *accent, {true, geo::Assign(regions, p->second).accent}});
        break;
      }
      case Strategy::kUnlabeled: {
        auto p = preds.find(r.utt_id);
        if (p == preds.end()) {
          ++sel.skipped.no_prediction;
          break;
        }
        geo::Assignment a = geo::Assign(regions, p->second);
        if (!a.accent) {
          ++sel.skipped.rejected;
          break;
        }
        sel.entries.push_back({r.utt_id, *a.accent, {false, a.accent}});
        break;
      }
    }
  }
  return sel;
}

void WriteSelection(const Selection &sel, std::ostream &out) {
  for (const SelectionEntry &e : sel.entries) {
    ordered_json j;
    j["utt_id"] = e.utt_id;
    j["accent"] = e.accent;
    j["strategy"] = StrategyName(sel.strategy);
    j["self_label_used"] = e.provenance.self_label_used;
    j["geo_accent"] = e.provenance.geo_accent ? json(*e.provenance.geo_accent)
                                              : json(nullptr);
    out << j.dump() << '\n';
  }
}

Selection ReadSelection(std::istream &in) {
  Selection sel;
  std::optional<Strategy> strategy;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ValidationError(LinePrefix(line_no) + "malformed JSON: " + e.what());
    }
    auto str = [&](const char *key) -> std::string {
      if (!j.is_object() || !j.contains(key) || !j[key].is_string())
        throw ValidationError(LinePrefix(line_no) + key + ": expected a string");
      return j[key].get<std::string>();
    };
    SelectionEntry e;
    e.utt_id = str("utt_id");
    e.accent = str("accent");
    if (e.accent.empty())
      throw ValidationError(LinePrefix(line_no) + "accent: empty");
    Strategy s = ParseStrategy(str("strategy"));
    if (strategy && *strategy != s)
      throw ValidationError(LinePrefix(line_no) + "mixed strategies in one selection");
    strategy = s;
    if (!seen.insert(e.utt_id).second)
      throw ValidationError(LinePrefix(line_no) + "duplicate utt_id " +
                            Quote(e.utt_id));
    e.provenance.self_label_used = s != Strategy::kUnlabeled;
    if (auto it = j.find("self_label_used"); it != j.end() && it->is_boolean())
      e.provenance.self_label_used = it->get<bool>();
    if (auto it = j.find("geo_accent"); it != j.end() && it->is_string())
      e.provenance.geo_accent = it->get<std::string>();
    sel.entries.push_back(std::move(e));
  }
  if (strategy) sel.strategy = *strategy;
  return sel;
}

std::string SkipReportToJson(const SkipReport &r) {
  ordered_json j;
  j["no_prediction"] = r.no_prediction;
  j["no_region_for_label"] = r.no_region_for_label;
  j["rejected"] = r.rejected;
  return j.dump();
}

CorpusStats Stats(const Selection &sel, const Manifest &manifest) {
  CorpusStats stats;
  std::map<std::string, std::unordered_set<std::string>> speakers;
  for (const SelectionEntry &e : sel.entries) {
    const UtteranceRecord *r = manifest.Find(e.utt_id);
    if (!r)
      throw ValidationError("selection utt_id " + Quote(e.utt_id) +
                            " not found in manifest");
    AccentStats &s = stats[e.accent];
    s.total_seconds += r->duration_sec;
    ++s.n_utterances;
    speakers[e.accent].insert(r->speaker_id);
  }
  for (auto &[accent, s] : stats) s.n_speakers = speakers[accent].size();
  return stats;
}

std::string StatsToJson(const CorpusStats &stats) {
  json j = json::object();
  for (const auto &[accent, s] : stats) {
    j[accent] = {{"hours", s.hours()},
                 {"n_utterances", s.n_utterances},
                 {"n_speakers", s.n_speakers}};
  }
  return j.dump();
}

PrecisionReport LabelPrecision(const Selection &found,
                               const ReferenceLabels &reference) {
  if (found.strategy != Strategy::kUnlabeled)
    throw ValidationError("label precision needs an unlabeled-strategy selection, got " +
                          std::string(StrategyName(found.strategy)));
  PrecisionReport report;
  for (const SelectionEntry &e : found.entries) {
    PrecisionCount &c = report[e.accent];
    auto it = reference.find(e.utt_id);
    if (it == reference.end()) continue;
    ++c.referenced;
    if (it->second == e.accent) ++c.matched;
  }
  return report;
}

std::string PrecisionToJson(const PrecisionReport &report) {
  json j = json::object();
  for (const auto &[accent, c] : report) {
    std::optional<double> v = c.value();
    j[accent] = {{"precision", v ? json(*v) : json(nullptr)},
                 {"matched", c.matched},
                 {"referenced", c.referenced}};
  }
  return j.dump();
}

ReferenceLabels SelfReferenceLabels(const Manifest &manifest,
                                    const geo::RegionSet &regions) {
  ReferenceLabels ref;
  for (const UtteranceRecord &r : manifest.records()) {
    if (!r.labeled()) continue;
    ref.emplace(r.utt_id,
                regions.Resolve(r.self_accent).value_or(Trim(r.self_accent)));
  }
  return ref;
}

ReferenceLabels LoadReferenceLabels(std::istream &in) {
  ReferenceLabels ref;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty()) continue;
    std::vector<std::string_view> f = SplitTabs(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty())
      throw ValidationError(LinePrefix(line_no) + "expected utt_id<TAB>accent");
    if (!ref.emplace(std::string(f[0]), std::string(f[1])).second)
      throw ValidationError(LinePrefix(line_no) + "duplicate utt_id " +
                            Quote(f[0]));
  }
  return ref;
}

EpochPlan BalancedBatches(const Selection &sel, size_t batch_size,
                          uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_accent;
  for (const SelectionEntry &e : sel.entries) by_accent[e.accent].push_back(e.utt_id);
  if (by_accent.empty()) throw ValidationError("selection has no accents");
  const size_t n_accents = by_accent.size();
  if (batch_size == 0 || batch_size % n_accents != 0)
    throw ValidationError("batch size " + std::to_string(batch_size) +
                          " is not divisible by the number of accents (" +
                          std::to_string(n_accents) + ")");
  const size_t per_accent = batch_size / n_accents;
  size_t largest = 0;
  for (const auto &[accent, ids] : by_accent) largest = std::max(largest, ids.size());
  const size_t n_batches = (largest + per_accent - 1) / per_accent;

  EpochPlan plan;
  plan.seed = seed;
  plan.batch_size = batch_size;
  plan.batches.assign(n_batches, {});
  for (auto &batch : plan.batches) batch.reserve(batch_size);
  for (const auto &[accent, ids] : by_accent) {
    plan.accents.push_back(accent);
    std::mt19937_64 eng = KeyedEngine(seed, accent);
    std::vector<std::string> order = ids;
    size_t pos = order.size();
    for (size_t b = 0; b < n_batches; ++b) {
      for (size_t k = 0; k < per_accent; ++k) {
        if (pos == order.size()) {
          SeededShuffle(order, eng);
          pos = 0;
        }
        plan.batches[b].push_back({order[pos++], accent});
      }
    }
  }
  return plan;
}

void WriteEpochPlan(const EpochPlan &plan, std::ostream &out) {
  for (size_t b = 0; b < plan.batches.size(); ++b) {
    for (const PlannedUtterance &u : plan.batches[b]) {
      ordered_json j;
      j["batch"] = b;
      j["utt_id"] = u.utt_id;
      j["accent"] = u.accent;
      out << j.dump() << '\n';
    }
  }
}

std::string_view AugmentMethodName(AugmentMethod m) {
  switch (m) {
    case AugmentMethod::kNone: return "none";
    case AugmentMethod::kKnnVc: return "knn_vc";
    case AugmentMethod::kPitchShift: return "pitchshift";
  }
  return "unknown";
}

AugmentMethod ParseAugmentMethod(std::string_view name) {
  std::string key = geo::FoldLabel(name);
  if (key == "none") return AugmentMethod::kNone;
  if (key == "knn_vc" || key == "knn-vc") return AugmentMethod::kKnnVc;
  if (key == "pitchshift") return AugmentMethod::kPitchShift;
  throw ValidationError("unknown augmentation method " + Quote(name));
}

AugmentPlan MakeAugmentPlan(const Selection &sel,
                            std::span<const std::string> donor_speakers,
                            AugmentMethod method, uint64_t seed) {
  if (method == AugmentMethod::kKnnVc && donor_speakers.empty())
    throw ValidationError("knn_vc augmentation needs at least one donor speaker");
  AugmentPlan plan;
  plan.seed = seed;
  plan.decisions.reserve(sel.entries.size());
  for (const SelectionEntry &e : sel.entries) {
    AugmentDecision d;
    d.utt_id = e.utt_id;
    d.method = method;
    std::mt19937_64 eng = KeyedEngine(seed, e.utt_id);
    if (method == AugmentMethod::kKnnVc) {
      d.donor_speaker_id = donor_speakers[UniformIndex(eng, donor_speakers.size())];
    } else if (method == AugmentMethod::kPitchShift) {
      d.fractional_steps = -kMaxPitchSteps + 2.0 * kMaxPitchSteps * UniformUnit(eng);
    }
    plan.decisions.push_back(std::move(d));
  }
  return plan;
}

void WriteAugmentPlan(const AugmentPlan &plan, std::ostream &out) {
  for (const AugmentDecision &d : plan.decisions) {
    ordered_json j;
    j["utt_id"] = d.utt_id;
    j["method"] = AugmentMethodName(d.method);
    if (d.donor_speaker_id) j["donor_speaker_id"] = *d.donor_speaker_id;
    if (d.fractional_steps) j["fractional_steps"] = *d.fractional_steps;
    out << j.dump() << '\n';
  }
}

}  // namespace accentkit::corpus
