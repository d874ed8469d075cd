// include/accentkit/service.hpp
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

// Read-only HTTP stats service over one immutable dataset snapshot.
//
//   GET  /regions         the loaded region config, verbatim
//   POST /query           body = region config; per-accent stats of the
//                         unlabeled-strategy selection under those regions
//   GET  /heatmap?cell=x  prediction counts on a lat/lon grid
//   GET  /healthz         {"status":"ok"}

#ifndef ACCENTKIT_SERVICE_HPP_
#define ACCENTKIT_SERVICE_HPP_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <cstdint>

#include "accentkit/corpus.hpp"
#include "accentkit/georegion.hpp"

namespace accentkit::service {

inline constexpr double kDefaultHeatmapCell = 1.0;

// {"accent":{"hours":x,"n_speakers":n,"n_utterances":n,
//            "precision_vs_self":x|null},...}
// Selection is UNLABELED; precision is against the self-reported labels
// resolved through the same region set.
std::string QueryReport(const corpus::Manifest &manifest,
                        const corpus::GeoPredictions &preds,
                        const geo::RegionSet &regions);

// Per-record view of an immutable dataset that answers QueryReport without
// building the intermediate selection. Results are identical to the naive
// pipeline, including the order in which durations are summed.
class QueryIndex {
 public:
  QueryIndex(const corpus::Manifest &manifest, const corpus::GeoPredictions &preds);
  std::string Report(const geo::RegionSet &regions) const;

 private:
  static constexpr uint32_t kNoLabel = UINT32_MAX;
  struct Row {
    geo::Coordinate where;
    double seconds;
    uint32_t speaker;
    uint32_t label;  // index into labels_, or kNoLabel
  };
  std::vector<Row> rows_;  // manifest order; records with a prediction only
  std::vector<std::string> labels_;
  size_t n_speakers_ = 0;
};

struct RegionSnapshot {
  std::string config_text;
  geo::RegionSet regions;
};

struct HeatBin {
  double lat = 0.0;  // lower cell edge
  double lon = 0.0;
  size_t count = 0;
};

// Grid histogram of predicted coordinates, sorted by (lat, lon).
std::vector<HeatBin> Histogram(const corpus::GeoPredictions &preds, double cell);
std::string HeatmapToJson(double cell, const std::vector<HeatBin> &bins);

class ServiceState {
 public:
  // Throws ValidationError if the region config does not parse.
  ServiceState(corpus::Manifest manifest, corpus::GeoPredictions preds,
               std::string region_config_text);

  const corpus::Manifest &manifest() const { return manifest_; }
  const corpus::GeoPredictions &predictions() const { return preds_; }

  std::shared_ptr<const RegionSnapshot> regions() const;
  // Parses first; the visible snapshot changes only on success.
  void ReplaceRegions(std::string config_text);

  const std::vector<HeatBin> &default_heatmap() const { return default_bins_; }
  const QueryIndex &query_index() const { return index_; }

 private:
  corpus::Manifest manifest_;
  corpus::GeoPredictions preds_;
  std::vector<HeatBin> default_bins_;
  QueryIndex index_;
  mutable std::mutex regions_mu_;
  std::shared_ptr<const RegionSnapshot> regions_;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Routing and handlers without the transport; `query` holds URL parameters.
Response Handle(const ServiceState &state, const std::string &method,
                const std::string &path,
                const std::map<std::string, std::string> &query,
                const std::string &body);

// httplib binding of Handle(). Requests are served concurrently; every
// handler only reads `state`, which must outlive the server.
class HttpServer {
 public:
  explicit HttpServer(const ServiceState &state);
  ~HttpServer();
  HttpServer(const HttpServer &) = delete;
  HttpServer &operator=(const HttpServer &) = delete;

  // port 0 picks a free port. Returns the bound port; throws IoError.
  int Bind(const std::string &host, int port);
  // Blocks until Stop().
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace accentkit::service

#endif  // ACCENTKIT_SERVICE_HPP_
