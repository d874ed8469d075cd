// src/service.cpp
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

#include "accentkit/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "accentkit/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace accentkit::service {

namespace {

using nlohmann::json;

Response JsonError(int status, const std::string &message) {
  return {status, json{{"error", message}}.dump()};
}

}  // namespace

std::string QueryReport(const corpus::Manifest &manifest,
                        const corpus::GeoPredictions &preds,
                        const geo::RegionSet &regions) {
  const corpus::Selection sel =
      corpus::Select(manifest, preds, regions, corpus::Strategy::kUnlabeled);
  const corpus::CorpusStats stats = corpus::Stats(sel, manifest);
  const corpus::PrecisionReport prec =
      corpus::LabelPrecision(sel, corpus::SelfReferenceLabels(manifest, regions));
  json out = json::object();
  for (const auto &[accent, s] : stats) {
    std::optional<double> p = prec.at(accent).value();
    out[accent] = {{"hours", s.hours()},
                   {"n_utterances", s.n_utterances},
                   {"n_speakers", s.n_speakers},
                   {"precision_vs_self", p ? json(*p) : json(nullptr)}};
  }
  return out.dump();
}

QueryIndex::QueryIndex(const corpus::Manifest &manifest,
                       const corpus::GeoPredictions &preds) {
  std::unordered_map<std::string, uint32_t> speakers, labels;
  rows_.reserve(manifest.size());
  for (const corpus::UtteranceRecord &r : manifest.records()) {
    auto p = preds.find(r.utt_id);
    if (p == preds.end()) continue;
    const uint32_t spk =
        speakers.emplace(r.speaker_id, static_cast<uint32_t>(speakers.size())).first->second;
    uint32_t label = kNoLabel;
    if (r.labeled()) {
      auto [it, fresh] = labels.emplace(r.self_accent, static_cast<uint32_t>(labels_.size()));
      if (fresh) labels_.push_back(r.self_accent);
      label = it->second;
    }
    rows_.push_back({p->second, r.duration_sec, spk, label});
  }
  n_speakers_ = speakers.size();
}

std::string QueryIndex::Report(const geo::RegionSet &regions) const {
  const std::vector<geo::Region> &rs = regions.regions();
  const size_t k = rs.size();
  // Self labels resolve once per distinct string.
  std::vector<int> resolved(labels_.size(), -1);
  for (size_t i = 0; i < labels_.size(); ++i) {
    std::optional<std::string> name = regions.Resolve(labels_[i]);
    if (!name) continue;
    for (size_t a = 0; a < k; ++a)
      if (rs[a].accent == *name) resolved[i] = static_cast<int>(a);
  }
  std::vector<corpus::AccentStats> stats(k);
  std::vector<corpus::PrecisionCount> prec(k);
  std::vector<std::vector<bool>> seen(k);
  for (const Row &row : rows_) {
    size_t a = 0;
    for (; a < k; ++a) {
      const auto &boxes = rs[a].boxes;
      if (std::any_of(boxes.begin(), boxes.end(),
                      [&](const geo::BoundingBox &b) { return geo::Contains(b, row.where); }))
        break;
    }
    if (a == k) continue;
    corpus::AccentStats &s = stats[a];
    s.total_seconds += row.seconds;
    ++s.n_utterances;
    if (seen[a].empty()) seen[a].assign(n_speakers_, false);
    if (!seen[a][row.speaker]) {
      seen[a][row.speaker] = true;
      ++s.n_speakers;
    }
    if (row.label != kNoLabel) {
      ++prec[a].referenced;
      if (resolved[row.label] == static_cast<int>(a)) ++prec[a].matched;
    }
  }
  json out = json::object();
  for (size_t a = 0; a < k; ++a) {
    if (stats[a].n_utterances == 0) continue;
    std::optional<double> p = prec[a].value();
    out[rs[a].accent] = {{"hours", stats[a].hours()},
                         {"n_utterances", stats[a].n_utterances},
                         {"n_speakers", stats[a].n_speakers},
                         {"precision_vs_self", p ? json(*p) : json(nullptr)}};
  }
  return out.dump();
}

std::vector<HeatBin> Histogram(const corpus::GeoPredictions &preds, double cell) {
  if (!std::isfinite(cell) || cell <= 0.0)
    throw ValidationError("heatmap cell must be a positive number");
  std::map<std::pair<int64_t, int64_t>, size_t> counts;
  for (const auto &[id, c] : preds) {
    const auto i = static_cast<int64_t>(std::floor(c.lat() / cell));
    const auto j = static_cast<int64_t>(std::floor(c.lon() / cell));
    ++counts[{i, j}];
  }
  std::vector<HeatBin> bins;
  bins.reserve(counts.size());
  for (const auto &[key, n] : counts)
    bins.push_back({static_cast<double>(key.first) * cell,
                    static_cast<double>(key.second) * cell, n});
  return bins;
}

std::string HeatmapToJson(double cell, const std::vector<HeatBin> &bins) {
  json j;
  j["cell"] = cell;
  j["bins"] = json::array();
  for (const HeatBin &b : bins)
    j["bins"].push_back({{"lat", b.lat}, {"lon", b.lon}, {"count", b.count}});
  return j.dump();
}

ServiceState::ServiceState(corpus::Manifest manifest, corpus::GeoPredictions preds,
                           std::string region_config_text)
    : manifest_(std::move(manifest)),
      preds_(std::move(preds)),
      index_(manifest_, preds_) {
  ReplaceRegions(std::move(region_config_text));
  default_bins_ = Histogram(preds_, kDefaultHeatmapCell);
}

std::shared_ptr<const RegionSnapshot> ServiceState::regions() const {
  std::lock_guard<std::mutex> lock(regions_mu_);
  return regions_;
}

void ServiceState::ReplaceRegions(std::string config_text) {
  auto snap = std::make_shared<RegionSnapshot>();
  snap->regions = geo::ParseRegions(config_text);
  snap->config_text = std::move(config_text);
  std::lock_guard<std::mutex> lock(regions_mu_);
  regions_ = std::move(snap);
}

Response Handle(const ServiceState &state, const std::string &method,
                const std::string &path,
                const std::map<std::string, std::string> &query,
                const std::string &body) {
  if (path == "/healthz" && method == "GET") return {200, R"({"status":"ok"})"};
  if (path == "/regions" && method == "GET") return {200, state.regions()->config_text};
  if (path == "/query" && method == "POST") {
    geo::RegionSet regions;
    try {
      regions = geo::ParseRegions(body);
    } catch (const ValidationError &e) {
      return JsonError(400, e.what());
    }
    return {200, state.query_index().Report(regions)};
  }
  if (path == "/heatmap" && method == "GET") {
    double cell = kDefaultHeatmapCell;
    if (auto it = query.find("cell"); it != query.end()) {
      const std::string &s = it->second;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cell);
      if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(cell) ||
          cell <= 0.0)
        return JsonError(400, "cell: expected a positive number, got \"" + s + "\"");
    }
    if (cell == kDefaultHeatmapCell)
      return {200, HeatmapToJson(cell, state.default_heatmap())};
    return {200, HeatmapToJson(cell, Histogram(state.predictions(), cell))};
  }
  if (path == "/healthz" || path == "/regions" || path == "/query" || path == "/heatmap")
    return JsonError(405, "method " + method + " not allowed on " + path);
  return JsonError(404, "no route for " + path);
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const ServiceState &state) : impl_(std::make_unique<Impl>()) {
  auto bind = [&state](const char *method) {
    return [&state, method](const httplib::Request &req, httplib::Response &res) {
      std::map<std::string, std::string> query;
      for (const auto &[k, v] : req.params) query.emplace(k, v);
      Response r = Handle(state, method, req.path, query, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
  };
  httplib::Server &server = impl_->server;
  server.Get("/healthz", bind("GET"));
  server.Get("/regions", bind("GET"));
  server.Get("/heatmap", bind("GET"));
  server.Post("/query", bind("POST"));
  server.set_error_handler([](const httplib::Request &req, httplib::Response &res) {
    if (!res.body.empty()) return;
    Response r = JsonError(res.status, res.status == 404 ? "no route for " + req.path
                                                         : "request failed");
    res.set_content(r.body, r.content_type);
  });
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string &host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::Run() {
  if (!impl_->server.listen_after_bind()) throw IoError("HTTP server failed");
}

void HttpServer::Stop() { impl_->server.stop(); }

}  // namespace accentkit::service
