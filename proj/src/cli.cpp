// src/cli.cpp
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

#include "accentkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "accentkit/acceval.hpp"
#include "accentkit/corpus.hpp"
#include "accentkit/error.hpp"
#include "accentkit/georegion.hpp"
#include "accentkit/knnmatch.hpp"
#include "accentkit/service.hpp"
#include "json.hpp"

namespace accentkit::cli {

namespace {

std::ifstream OpenIn(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::string ReadText(const std::string &path) {
  std::ifstream in = OpenIn(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

// Runs `fn` against --out (or `fallback` when empty or "-"), with input
// errors from `fn` prefixed by nothing and stream failures mapped to IoError.
void WithOutput(const std::string &path, std::ostream &fallback,
                const std::function<void(std::ostream &)> &fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    fallback.flush();
    if (!fallback) throw IoError("write to standard output failed");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  fn(out);
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

template <class Fn>
auto Load(const std::string &path, Fn &&parse) {
  std::ifstream in = OpenIn(path);
  try {
    return parse(in);
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

geo::RegionSet LoadRegions(const std::string &path) {
  std::string text = ReadText(path);
  try {
    return geo::ParseRegions(text);
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<double> ParseScores(const std::string &text) {
  std::vector<double> out;
  std::string tok;
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), ',', ' ');
  std::istringstream ss(norm);
  while (ss >> tok) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ValidationError("not a number: " + tok);
    out.push_back(v);
  }
  return out;
}

std::pair<std::string, int> ParseBind(const std::string &bind) {
  const size_t colon = bind.rfind(':');
  if (colon == std::string::npos) throw ValidationError("--bind expects host:port");
  const std::string host = bind.substr(0, colon), port_s = bind.substr(colon + 1);
  int port = 0;
  auto [ptr, ec] = std::from_chars(port_s.data(), port_s.data() + port_s.size(), port);
  if (ec != std::errc() || ptr != port_s.data() + port_s.size() || port < 0 || port > 65535)
    throw ValidationError("--bind: bad port " + port_s);
  return {host, port};
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"accentkit: accent corpus curation and accented-speech evaluation"};
  app.name("accentkit");
  app.require_subcommand(1);

  std::string out_path;
  auto add_out = [&](CLI::App *sub) {
    sub->add_option("--out", out_path, "Output path (default: standard output)");
  };

  // select
  std::string strategy, manifest_path, geo_path, regions_path;
  auto *select = app.add_subcommand("select", "Select accent-labeled utterances");
  select->add_option("--strategy", strategy, "unfiltered | filtered | unlabeled")->required();
  select->add_option("--manifest", manifest_path, "Manifest TSV")->required();
  select->add_option("--geo", geo_path, "Geolocation predictions JSONL")->required();
  select->add_option("--regions", regions_path, "Region config JSON")->required();
  add_out(select);

  // stats
  std::string selection_path;
  auto *stats = app.add_subcommand("stats", "Per-accent hours, utterances and speakers");
  stats->add_option("--selection", selection_path, "Selection JSONL")->required();
  stats->add_option("--manifest", manifest_path, "Manifest TSV")->required();
  add_out(stats);

  // precision
  std::string reference_path;
  auto *precision = app.add_subcommand("precision", "Precision of found accent labels");
  precision->add_option("--selection", selection_path, "Unlabeled-strategy selection JSONL")
      ->required();
  precision->add_option("--manifest", manifest_path, "Manifest TSV (self labels)")->required();
  precision->add_option("--regions", regions_path, "Region config JSON (label aliases)")
      ->required();
  precision->add_option("--reference", reference_path,
                        "Reference labels TSV utt_id<TAB>accent (default: self labels)");
  add_out(precision);

  // batches
  size_t batch_size = 0;
  uint64_t seed = 0;
  auto *batches = app.add_subcommand("batches", "Plan accent-balanced batches for one epoch");
  batches->add_option("--selection", selection_path, "Selection JSONL")->required();
  batches->add_option("--batch-size", batch_size, "Batch size")->required();
  batches->add_option("--seed", seed, "Random seed");
  add_out(batches);

  // augment-plan
  std::string method = "none", donors_path;
  auto *augment = app.add_subcommand("augment-plan", "Plan per-utterance timbre augmentation");
  augment->add_option("--selection", selection_path, "Selection JSONL")->required();
  augment->add_option("--method", method, "none | knn_vc | pitchshift");
  augment->add_option("--donors", donors_path, "Donor speaker ids, one per line");
  augment->add_option("--seed", seed, "Random seed");
  add_out(augment);

  // knn-convert
  std::string source_path;
  std::vector<std::string> pool_paths;
  knn::KnnConfig knn_cfg;
  auto *knn_convert = app.add_subcommand("knn-convert", "kNN feature-matching conversion");
  knn_convert->add_option("--source", source_path, "Source features (FMAT)")->required();
  knn_convert->add_option("--pool", pool_paths, "Donor feature files (FMAT), repeatable")
      ->required();
  knn_convert->add_option("--k", knn_cfg.k, "Neighbors per frame");
  knn_convert->add_option("--block-rows", knn_cfg.block_rows, "Pool rows per tile (0 = off)");
  knn_convert->add_option("--threads", knn_cfg.threads, "Worker threads");
  add_out(knn_convert);

  // eval-gt-sim
  std::string eval_path, ref_path, pairs_path;
  auto *gt_sim = app.add_subcommand("eval-gt-sim", "Cosine similarity to ground truth");
  gt_sim->add_option("--eval", eval_path, "Synthetic embeddings JSONL")->required();
  gt_sim->add_option("--ref", ref_path, "Ground-truth embeddings JSONL")->required();
  gt_sim->add_option("--pairs", pairs_path, "Pairs file: eval_utt_id ref_utt_id")->required();
  add_out(gt_sim);

  // eval-dcf
  std::string trials_path, trials_out;
  size_t pca_dim = eval::kDefaultPcaDim;
  double reg_lambda = -1.0;
  std::vector<double> p_targets = {0.1, 0.5};
  auto *eval_dcf = app.add_subcommand("eval-dcf", "Gaussian backend + detection cost");
  eval_dcf->add_option("--trials", trials_path, "Precomputed trial scores JSONL");
  eval_dcf->add_option("--ref", ref_path, "Enrollment (ground-truth) embeddings JSONL");
  eval_dcf->add_option("--eval", eval_path, "Test (synthetic) embeddings JSONL");
  eval_dcf->add_option("--pca-dim", pca_dim, "PCA dimension");
  eval_dcf->add_option("--reg-lambda", reg_lambda, "Covariance ridge (< 0: default)");
  eval_dcf->add_option("--p-target", p_targets, "Operating points, repeatable");
  eval_dcf->add_option("--trials-out", trials_out, "Write trial scores JSONL here");
  add_out(eval_dcf);

  // sim-matrix
  std::string embeddings_path;
  auto *sim_matrix = app.add_subcommand("sim-matrix", "Cosine similarity of label means (CSV)");
  sim_matrix->add_option("--embeddings", embeddings_path, "Embeddings JSONL")->required();
  add_out(sim_matrix);

  // cluster
  std::string sim_path;
  size_t n_clusters = 7;
  eval::KMeansOptions kmeans;
  auto *cluster = app.add_subcommand("cluster", "Spectral clustering of a similarity matrix");
  cluster->add_option("--sim", sim_path, "Similarity matrix CSV")->required();
  cluster->add_option("--n-clusters", n_clusters, "Number of clusters");
  cluster->add_option("--seed", seed, "Random seed");
  cluster->add_option("--restarts", kmeans.restarts, "k-means restarts");
  add_out(cluster);

  // wer
  std::string ref_text, hyp_text;
  auto *wer = app.add_subcommand("wer", "Word error rate of one hypothesis");
  wer->add_option("--ref", ref_text, "Reference transcript")->required();
  wer->add_option("--hyp", hyp_text, "Hypothesis transcript")->required();
  add_out(wer);

  // mos
  std::string scores_text, scores_path;
  auto *mos = app.add_subcommand("mos", "Mean opinion score with 95% CI");
  mos->add_option("--scores", scores_text, "Comma-separated scores");
  mos->add_option("--scores-file", scores_path, "File of whitespace-separated scores");
  add_out(mos);

  // serve
  std::string bind = "127.0.0.1:8080";
  auto *serve = app.add_subcommand("serve", "Serve the read-only stats API");
  serve->add_option("--manifest", manifest_path, "Manifest TSV")->required();
  serve->add_option("--geo", geo_path, "Geolocation predictions JSONL")->required();
  serve->add_option("--regions", regions_path, "Default region config JSON")->required();
  serve->add_option("--bind", bind, "host:port");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*select) {
      const corpus::Strategy s = corpus::ParseStrategy(strategy);
      const corpus::Manifest m = Load(manifest_path, corpus::LoadManifest);
      const corpus::GeoPredictions preds = Load(geo_path, corpus::LoadGeoPredictions);
      const geo::RegionSet regions = LoadRegions(regions_path);
      const corpus::Selection sel = corpus::Select(m, preds, regions, s);
      WithOutput(out_path, out, [&](std::ostream &o) { corpus::WriteSelection(sel, o); });
      err << "{\"skipped\":" << corpus::SkipReportToJson(sel.skipped) << "}\n";
    } else if (*stats) {
      const corpus::Selection sel = Load(selection_path, corpus::ReadSelection);
      const corpus::Manifest m = Load(manifest_path, corpus::LoadManifest);
      const corpus::CorpusStats st = corpus::Stats(sel, m);
      WithOutput(out_path, out, [&](std::ostream &o) { o << corpus::StatsToJson(st) << '\n'; });
    } else if (*precision) {
      const corpus::Selection sel = Load(selection_path, corpus::ReadSelection);
      const corpus::Manifest m = Load(manifest_path, corpus::LoadManifest);
      const geo::RegionSet regions = LoadRegions(regions_path);
      const corpus::ReferenceLabels ref =
          reference_path.empty() ? corpus::SelfReferenceLabels(m, regions)
                                 : Load(reference_path, corpus::LoadReferenceLabels);
      const corpus::PrecisionReport report = corpus::LabelPrecision(sel, ref);
      WithOutput(out_path, out,
                 [&](std::ostream &o) { o << corpus::PrecisionToJson(report) << '\n'; });
    } else if (*batches) {
      const corpus::Selection sel = Load(selection_path, corpus::ReadSelection);
      const corpus::EpochPlan plan = corpus::BalancedBatches(sel, batch_size, seed);
      WithOutput(out_path, out, [&](std::ostream &o) { corpus::WriteEpochPlan(plan, o); });
    } else if (*augment) {
      const corpus::AugmentMethod am = corpus::ParseAugmentMethod(method);
      const corpus::Selection sel = Load(selection_path, corpus::ReadSelection);
      std::vector<std::string> donors;
      if (!donors_path.empty()) {
        std::ifstream in = OpenIn(donors_path);
        std::string d;
        while (in >> d) donors.push_back(d);
      }
      const corpus::AugmentPlan plan = corpus::MakeAugmentPlan(sel, donors, am, seed);
      WithOutput(out_path, out, [&](std::ostream &o) { corpus::WriteAugmentPlan(plan, o); });
    } else if (*knn_convert) {
      const knn::FeatureMatrix source = knn::ReadFmatFile(source_path);
      std::vector<knn::FeatureMatrix> parts;
      for (const std::string &p : pool_paths) parts.push_back(knn::ReadFmatFile(p));
      const knn::FeatureMatrix pool = knn::BuildPool(parts);
      const knn::FeatureMatrix converted = knn::KnnConvert(source, pool, knn_cfg);
      const std::vector<std::byte> bytes = knn::WriteFmat(converted);
      WithOutput(out_path, out, [&](std::ostream &o) {
        o.write(reinterpret_cast<const char *>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
      });
    } else if (*gt_sim) {
      const eval::EmbeddingSet e = Load(eval_path, eval::LoadEmbeddings);
      const eval::EmbeddingSet r = Load(ref_path, eval::LoadEmbeddings);
      const eval::Pairing pairs = Load(pairs_path, eval::LoadPairing);
      const eval::GtSimilarity g = eval::GroundTruthSimilarity(e, r, pairs);
      WithOutput(out_path, out,
                 [&](std::ostream &o) { o << eval::GtSimilarityToJson(g) << '\n'; });
    } else if (*eval_dcf) {
      eval::TrialScores trials;
      if (!trials_path.empty()) {
        if (!ref_path.empty() || !eval_path.empty())
          throw ValidationError("give either --trials or --ref/--eval, not both");
        trials = Load(trials_path, eval::ReadTrialScores);
      } else {
        if (ref_path.empty() || eval_path.empty())
          throw ValidationError("eval-dcf needs --trials, or both --ref and --eval");
        const eval::EmbeddingSet r = Load(ref_path, eval::LoadEmbeddings);
        const eval::EmbeddingSet e = Load(eval_path, eval::LoadEmbeddings);
        const eval::GaussianBackend backend = eval::FitBackend(
            r, pca_dim, reg_lambda < 0.0 ? std::nullopt : std::optional<double>(reg_lambda));
        trials = eval::ScoreTrials(backend, e);
        if (!trials_out.empty())
          WithOutput(trials_out, out,
                     [&](std::ostream &o) { eval::WriteTrialScores(trials, o); });
      }
      const eval::DcfReport report = eval::Dcf(trials, {p_targets});
      WithOutput(out_path, out, [&](std::ostream &o) { o << eval::DcfToJson(report) << '\n'; });
    } else if (*sim_matrix) {
      const eval::EmbeddingSet e = Load(embeddings_path, eval::LoadEmbeddings);
      const eval::SimilarityMatrix sim = eval::MeanEmbeddingSimilarity(e);
      WithOutput(out_path, out, [&](std::ostream &o) { o << eval::SimilarityToCsv(sim); });
    } else if (*cluster) {
      const eval::SimilarityMatrix sim = Load(sim_path, eval::ReadSimilarityCsv);
      const std::map<std::string, int> ids =
          eval::SpectralCluster(sim, n_clusters, seed, kmeans);
      WithOutput(out_path, out,
                 [&](std::ostream &o) { o << nlohmann::json(ids).dump() << '\n'; });
    } else if (*wer) {
      const eval::WerResult w = eval::Wer(ref_text, hyp_text);
      WithOutput(out_path, out, [&](std::ostream &o) { o << eval::WerToJson(w) << '\n'; });
    } else if (*mos) {
      std::vector<double> scores = ParseScores(scores_text);
      if (!scores_path.empty()) {
        const std::vector<double> more = ParseScores(ReadText(scores_path));
        scores.insert(scores.end(), more.begin(), more.end());
      }
      const eval::MosSummary m = eval::MosCi(scores);
      WithOutput(out_path, out, [&](std::ostream &o) { o << eval::MosToJson(m) << '\n'; });
    } else if (*serve) {
      const auto [host, port] = ParseBind(bind);
      service::ServiceState state(Load(manifest_path, corpus::LoadManifest),
                                  Load(geo_path, corpus::LoadGeoPredictions),
                                  ReadText(regions_path));
      service::HttpServer server(state);
      const int bound = server.Bind(host, port);
      err << "serving on " << host << ":" << bound << std::endl;
      server.Run();
    }
  } catch (const IoError &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace accentkit::cli
