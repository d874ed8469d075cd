// tests/service_cli_test.cpp
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

#include <chrono>
#include <random>
#include <sstream>
#include <thread>

// Eigen must come before httplib.h, whose <resolv.h> defines _res.
#include "synth.hpp"

#include "accentkit/cli.hpp"
#include "accentkit/corpus.hpp"
#include "accentkit/error.hpp"
#include "accentkit/knnmatch.hpp"
#include "accentkit/service.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

using namespace accentkit;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

// Writes the dataset files a CLI run or the service needs.
struct DatasetFiles {
  testing::TempDir dir;
  std::string manifest, geo, regions;
  explicit DatasetFiles(const testing::Dataset &d, const std::string &regions_text) {
    std::ostringstream m, g;
    corpus::WriteManifest(d.manifest, m);
    for (const auto &r : d.manifest.records()) {
      auto it = d.preds.find(r.utt_id);
      if (it == d.preds.end()) continue;
      g << json{{"utt_id", r.utt_id}, {"lat", it->second.lat()}, {"lon", it->second.lon()}}
               .dump()
        << "\n";
    }
    manifest = dir.Write("m.tsv", m.str());
    geo = dir.Write("g.jsonl", g.str());
    regions = dir.Write("r.json", regions_text);
  }
};

// select + stats + precision through the CLI, merged into the /query shape.
std::string ComposedCli(const DatasetFiles &f) {
  const std::string sel = f.dir.File("sel.jsonl");
  CliRun s = Run({"select", "--strategy", "unlabeled", "--manifest", f.manifest, "--geo", f.geo,
                  "--regions", f.regions, "--out", sel});
  REQUIRE(s.code == 0);
  CliRun st = Run({"stats", "--selection", sel, "--manifest", f.manifest});
  REQUIRE(st.code == 0);
  CliRun pr = Run({"precision", "--selection", sel, "--manifest", f.manifest, "--regions",
                   f.regions});
  REQUIRE(pr.code == 0);
  json stats = json::parse(st.out), prec = json::parse(pr.out), out = json::object();
  for (auto it = stats.begin(); it != stats.end(); ++it) {
    json row = it.value();
    row["precision_vs_self"] = prec.at(it.key()).at("precision");
    out[it.key()] = row;
  }
  return out.dump();
}

}  // namespace

TEST_CASE("handlers") {
  testing::Dataset d = testing::MakeDataset(300, 1);
  service::ServiceState state(d.manifest, d.preds, testing::kTestRegions);
  auto get = [&](const std::string &path, std::map<std::string, std::string> q = {}) {
    return service::Handle(state, "GET", path, q, "");
  };
  CHECK(get("/healthz").body == R"({"status":"ok"})");
  CHECK(get("/regions").body == testing::kTestRegions);
  CHECK(get("/nope").status == 404);
  CHECK(service::Handle(state, "GET", "/query", {}, "").status == 405);

  service::Response q = service::Handle(state, "POST", "/query", {}, testing::kTestRegions);
  CHECK(q.status == 200);
  geo::RegionSet rs = geo::ParseRegions(testing::kTestRegions);
  CHECK(q.body == service::QueryReport(d.manifest, d.preds, rs));
  json body = json::parse(q.body);
  CHECK(body.contains("US"));
  CHECK(body["US"].contains("precision_vs_self"));

  CHECK(service::Handle(state, "POST", "/query", {}, R"({"regions":[]})").body == "{}");
  service::Response bad = service::Handle(
      state, "POST", "/query", {},
      R"({"regions":[{"accent":"US","boxes":[{"lat_min":9,"lat_max":1,"lon_west":0,"lon_east":1}]}]})");
  CHECK(bad.status == 400);
  CHECK(json::parse(bad.body)["error"].get<std::string>().find("regions[0]") !=
        std::string::npos);
  CHECK(service::Handle(state, "POST", "/query", {}, "{").status == 400);

  json heat = json::parse(get("/heatmap").body);
  CHECK(heat["cell"] == 1.0);
  size_t total = 0;
  for (const auto &b : heat["bins"]) total += b["count"].get<size_t>();
  CHECK(total == d.preds.size());
  json coarse = json::parse(get("/heatmap", {{"cell", "10"}}).body);
  CHECK(coarse["cell"] == 10.0);
  CHECK(coarse["bins"].size() < heat["bins"].size());
  CHECK(get("/heatmap", {{"cell", "-1"}}).status == 400);
  CHECK(get("/heatmap", {{"cell", "abc"}}).status == 400);
}

TEST_CASE("query with a box around one accent's predictions matches CLI stats") {
  testing::Dataset d = testing::MakeDataset(400, 2);
  const char *india_only =
      R"({"regions":[{"accent":"India","boxes":[{"lat_min":5,"lat_max":35,"lon_west":68,"lon_east":97}]}]})";
  DatasetFiles f(d, india_only);
  service::ServiceState state(d.manifest, d.preds, india_only);
  json q = json::parse(service::Handle(state, "POST", "/query", {}, india_only).body);
  CliRun s = Run({"select", "--strategy", "unlabeled", "--manifest", f.manifest, "--geo",
                  f.geo, "--regions", f.regions, "--out", f.dir.File("s.jsonl")});
  REQUIRE(s.code == 0);
  CliRun st = Run({"stats", "--selection", f.dir.File("s.jsonl"), "--manifest", f.manifest});
  json stats = json::parse(st.out);
  CHECK(q["India"]["hours"] == stats["India"]["hours"]);
  CHECK(q["India"]["n_speakers"] == stats["India"]["n_speakers"]);
}

TEST_CASE("indexed query equals the naive pipeline") {
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> ulat(-90, 90), ulon(-180, 180);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    testing::Dataset d = testing::MakeDataset(2000, 100 + seed);
    service::QueryIndex index(d.manifest, d.preds);
    geo::RegionSet fixed = geo::ParseRegions(testing::kTestRegions);
    CHECK(index.Report(fixed) == service::QueryReport(d.manifest, d.preds, fixed));
    // Random overlapping and wrapping boxes, named like the self labels.
    std::vector<geo::Region> regions;
    const char *names[] = {"India", "US", "Canada", "Klingon", "NewZealand"};
    for (const char *name : names) {
      if (eng() % 4 == 0) continue;
      std::vector<geo::BoundingBox> boxes;
      for (int b = 0; b < 3; ++b) {
        double a = ulat(eng), c = ulat(eng);
        boxes.emplace_back(std::min(a, c), std::max(a, c), ulon(eng), ulon(eng));
      }
      regions.push_back({name, boxes});
    }
    bool has_us = std::any_of(regions.begin(), regions.end(),
                              [](const geo::Region &r) { return r.accent == "US"; });
    geo::RegionSet rs = has_us ? geo::RegionSet(regions, {{"United States English", "US"}})
                               : geo::RegionSet(regions);
    CHECK(index.Report(rs) == service::QueryReport(d.manifest, d.preds, rs));
  }
}

TEST_CASE("query on one million utterances answers within 2 s") {
  testing::Dataset d = testing::MakeDataset(1000000, 9);
  service::QueryIndex index(d.manifest, d.preds);
  geo::RegionSet rs = geo::ParseRegions(testing::kTestRegions);
  const auto t0 = std::chrono::steady_clock::now();
  std::string report = index.Report(rs);
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(s < 2.0);
  CHECK(report.size() > 2);
}

TEST_CASE("region snapshot replacement") {
  testing::Dataset d = testing::MakeDataset(50, 3);
  service::ServiceState state(d.manifest, d.preds, testing::kTestRegions);
  auto before = state.regions();
  CHECK_THROWS_AS(state.ReplaceRegions("{"), ValidationError);
  CHECK(state.regions() == before);
  state.ReplaceRegions(R"({"regions":[]})");
  CHECK(state.regions()->config_text == R"({"regions":[]})");
  CHECK(before->config_text == testing::kTestRegions);  // old snapshot intact
  CHECK_THROWS_AS(service::ServiceState(d.manifest, d.preds, "[]"), ValidationError);
}

TEST_CASE("http round trip with concurrent clients") {
  testing::Dataset d = testing::MakeDataset(1000, 4);
  service::ServiceState state(d.manifest, d.preds, testing::kTestRegions);
  service::HttpServer server(state);
  const int port = server.Bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread runner([&] { server.Run(); });

  const std::string expected = service::Handle(state, "POST", "/query", {},
                                               testing::kTestRegions).body;
  std::vector<std::thread> clients;
  std::vector<int> ok(8, 0);
  for (int c = 0; c < 8; ++c)
    clients.emplace_back([&, c] {
      httplib::Client cli("127.0.0.1", port);
      for (int i = 0; i < 5; ++i) {
        auto r = cli.Post("/query", testing::kTestRegions, "application/json");
        if (r && r->status == 200 && r->body == expected) ++ok[c];
      }
    });
  for (auto &t : clients) t.join();
  for (int v : ok) CHECK(v == 5);

  httplib::Client cli("127.0.0.1", port);
  auto h = cli.Get("/healthz");
  REQUIRE(h);
  CHECK(h->body == R"({"status":"ok"})");
  auto r = cli.Get("/regions");
  REQUIRE(r);
  CHECK(r->body == testing::kTestRegions);
  auto hm = cli.Get("/heatmap?cell=5");
  REQUIRE(hm);
  CHECK(json::parse(hm->body)["cell"] == 5.0);
  auto nf = cli.Get("/missing");
  REQUIRE(nf);
  CHECK(nf->status == 404);
  CHECK(json::parse(nf->body).contains("error"));
  auto bad = cli.Post("/query", "{", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  server.Stop();
  runner.join();
  // Dataset untouched by requests.
  CHECK(state.manifest().size() == 1000);
}

TEST_CASE("cli and service agree") {
  for (uint64_t seed : {5u, 6u}) {
    testing::Dataset d = testing::MakeDataset(1000, seed);
    DatasetFiles f(d, testing::kTestRegions);
    service::ServiceState state(d.manifest, d.preds, testing::kTestRegions);
    std::string q = service::Handle(state, "POST", "/query", {}, testing::kTestRegions).body;
    CHECK(json::parse(q).dump() == ComposedCli(f));
  }
}

TEST_CASE("cli exit codes") {
  CHECK(Run({}).code == 1);
  CHECK(Run({"frobnicate"}).code == 1);
  CliRun unknown_flag = Run({"wer", "--ref", "a", "--hyp", "b", "--colour"});
  CHECK(unknown_flag.code == 1);
  CHECK(unknown_flag.err.find("Usage") != std::string::npos);
  CHECK(Run({"wer", "--ref", "a"}).code == 1);
  CHECK(Run({"--help"}).code == 0);
  CHECK(Run({"stats", "--selection", "/nonexistent/s.jsonl", "--manifest", "/x"}).code == 2);
  CHECK(Run({"mos", "--scores", "4"}).code == 1);
  CHECK(Run({"mos", "--scores", "4,x"}).code == 1);
  CHECK(Run({"select", "--strategy", "sideways", "--manifest", "a", "--geo", "b", "--regions",
             "c"}).code == 1);
  testing::TempDir dir;
  std::string bad = dir.Write("bad.tsv", "utt_id\tspeaker_id\n");
  CliRun r = Run({"stats", "--selection", dir.Write("s.jsonl", ""), "--manifest", bad});
  CHECK(r.code == 1);
  CHECK(r.err.find("missing column") != std::string::npos);
  CHECK(Run({"wer", "--ref", "a", "--hyp", "b", "--out", "/nonexistent/dir/o.json"}).code == 2);
}

TEST_CASE("cli wer, mos and dcf examples") {
  CliRun w = Run({"wer", "--ref", "the cat sat", "--hyp", "the cat"});
  CHECK(w.code == 0);
  CHECK(w.out.rfind("{\"wer\":0.3333", 0) == 0);
  CHECK(json::parse(w.out)["deletions"] == 1);

  CliRun m = Run({"mos", "--scores", "1,5"});
  CHECK(m.code == 0);
  CHECK(json::parse(m.out)["mean"] == 3.0);

  testing::TempDir dir;
  std::string trials = dir.Write(
      "t.jsonl",
      "{\"utt_id\":\"t1\",\"intended\":\"a\",\"llr\":{\"a\":2,\"b\":-3}}\n"
      "{\"utt_id\":\"t2\",\"intended\":\"a\",\"llr\":{\"a\":-1,\"b\":1}}\n"
      "{\"utt_id\":\"t3\",\"intended\":\"b\",\"llr\":{\"a\":-3,\"b\":2}}\n"
      "{\"utt_id\":\"t4\",\"intended\":\"b\",\"llr\":{\"a\":1,\"b\":-1}}\n");
  CliRun dcf = Run({"eval-dcf", "--trials", trials});
  REQUIRE(dcf.code == 0);
  CHECK(json::parse(dcf.out)["average"] == 1.0);
  CliRun half = Run({"eval-dcf", "--trials", trials, "--p-target", "0.5"});
  CHECK(json::parse(half.out)["a"]["points"].size() == 1);
  CHECK(Run({"eval-dcf", "--trials", trials, "--p-target", "1.5"}).code == 1);
  CHECK(Run({"eval-dcf"}).code == 1);
}

TEST_CASE("cli embedding pipeline") {
  testing::TempDir dir;
  std::ostringstream ref, ev;
  eval::WriteEmbeddings(testing::GaussianClasses(3, 40, 20, 10.0, 1, "r"), ref);
  eval::WriteEmbeddings(testing::GaussianClasses(3, 20, 20, 10.0, 2, "e"), ev);
  std::string rp = dir.Write("ref.jsonl", ref.str()), ep = dir.Write("eval.jsonl", ev.str());

  CliRun dcf = Run({"eval-dcf", "--ref", rp, "--eval", ep, "--pca-dim", "10", "--trials-out",
                    dir.File("trials.jsonl")});
  REQUIRE(dcf.code == 0);
  CHECK(json::parse(dcf.out)["average"].get<double>() < 0.05);
  CliRun again = Run({"eval-dcf", "--trials", dir.File("trials.jsonl")});
  CHECK(json::parse(again.out) == json::parse(dcf.out));

  std::string pairs;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 20; ++i)
      pairs += "e" + std::to_string(c) + "_" + std::to_string(i) + " r" + std::to_string(c) +
               "_" + std::to_string(i) + "\n";
  CliRun gt = Run({"eval-gt-sim", "--eval", ep, "--ref", rp, "--pairs",
                   dir.Write("pairs.txt", pairs)});
  REQUIRE(gt.code == 0);
  CHECK(json::parse(gt.out)["overall"].get<double>() > 0.5);

  CliRun sim = Run({"sim-matrix", "--embeddings", rp, "--out", dir.File("sim.csv")});
  REQUIRE(sim.code == 0);
  CHECK(testing::ReadFile(dir.File("sim.csv")).rfind("label,acc0,acc1,acc2\n", 0) == 0);
  CliRun cl = Run({"cluster", "--sim", dir.File("sim.csv"), "--n-clusters", "3", "--seed", "4"});
  REQUIRE(cl.code == 0);
  CHECK(json::parse(cl.out) == json::parse(R"({"acc0":0,"acc1":1,"acc2":2})"));
}

TEST_CASE("cli corpus planning and knn") {
  testing::Dataset d = testing::MakeDataset(120, 8);
  DatasetFiles f(d, testing::kTestRegions);
  std::string sel = f.dir.File("sel.jsonl");
  CliRun s = Run({"select", "--strategy", "filtered", "--manifest", f.manifest, "--geo", f.geo,
                  "--regions", f.regions, "--out", sel});
  REQUIRE(s.code == 0);
  CHECK(json::parse(s.err)["skipped"]["rejected"].get<int>() > 0);

  CliRun b1 = Run({"batches", "--selection", sel, "--batch-size", "8", "--seed", "3"});
  CliRun b2 = Run({"batches", "--selection", sel, "--batch-size", "8", "--seed", "3"});
  REQUIRE(b1.code == 0);
  CHECK(b1.out == b2.out);
  CHECK(Run({"batches", "--selection", sel, "--batch-size", "7"}).code == 1);

  std::string donors = f.dir.Write("donors.txt", "d1\nd2\n");
  CliRun a = Run({"augment-plan", "--selection", sel, "--method", "knn_vc", "--donors", donors,
                  "--seed", "1"});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("\"d") != std::string::npos);
  CHECK(Run({"augment-plan", "--selection", sel, "--method", "knn_vc"}).code == 1);

  knn::WriteFmatFile(knn::FeatureMatrix(1, 2, {1, 0}), f.dir.File("src.fmat"));
  knn::WriteFmatFile(knn::FeatureMatrix(1, 2, {1, 0}), f.dir.File("p1.fmat"));
  knn::WriteFmatFile(knn::FeatureMatrix(1, 2, {0, 1}), f.dir.File("p2.fmat"));
  CliRun k = Run({"knn-convert", "--source", f.dir.File("src.fmat"), "--pool",
                  f.dir.File("p1.fmat"), "--pool", f.dir.File("p2.fmat"), "--k", "2", "--out",
                  f.dir.File("out.fmat")});
  REQUIRE(k.code == 0);
  CHECK(knn::ReadFmatFile(f.dir.File("out.fmat")) == knn::FeatureMatrix(1, 2, {0.5f, 0.5f}));
  CHECK(Run({"knn-convert", "--source", f.dir.File("src.fmat"), "--pool",
             f.dir.File("p1.fmat"), "--k", "2"}).code == 1);
  CHECK(Run({"knn-convert", "--source", f.dir.File("none.fmat"), "--pool",
             f.dir.File("p1.fmat")}).code == 2);
}
