// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Artifacts land in ./acceptance_work.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "actionret/config.hpp"
#include "actionret/evaluation.hpp"
#include "actionret/fusion.hpp"
#include "actionret/geometry.hpp"
#include "actionret/reranking.hpp"
#include "actionret/retrieval.hpp"
#include "actionret/training.hpp"
#include "gradcheck_util.hpp"
#include "rerank_reference.hpp"

using namespace actionret;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1

double ap_bruteforce(const std::vector<int>& rel, int total) {
  double acc = 0;
  for (size_t r = 0; r < rel.size(); ++r) {
    if (!rel[r]) continue;
    int hits = 0;
    for (size_t q = 0; q <= r; ++q) hits += rel[q];
    acc += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return acc / total;
}

void criterion_metric_oracles() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(20250801);
  for (int inst = 0; inst < 200; ++inst) {
    int m = rng.uniform_int(4, 50);
    int n = rng.uniform_int(2, 5);

    // random embeddings -> ranked lists
    EmbeddingStore store;
    store.dim = 6;
    for (int i = 0; i < m; ++i) {
      store.ids.push_back("s" + std::to_string(i));
      store.labels.push_back(rng.uniform_int(0, n - 1));
      std::vector<double> v(6);
      double norm = 0;
      for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(std::max(norm, 1e-30));
      for (double x : v) store.matrix.push_back(static_cast<float>(x / norm));
    }
    RankAllResult ranked = rank_all(store);

    // brute-force retrieval evaluator
    double ap_sum = 0;
    int included = 0, h1 = 0, h5 = 0;
    for (const auto& list : ranked.lists) {
      int q = store.labels[static_cast<size_t>(list.query_index)];
      std::vector<int> rel;
      int total = 0;
      for (int idx : list.order) {
        int r = store.labels[static_cast<size_t>(idx)] == q ? 1 : 0;
        rel.push_back(r);
        total += r;
      }
      if (total == 0) continue;
      ap_sum += ap_bruteforce(rel, total);
      ++included;
      if (rel[0]) ++h1;
      for (size_t r = 0; r < rel.size() && r < 5; ++r) {
        if (rel[r]) {
          ++h5;
          break;
        }
      }
      // direct AP cross-check on this list
      double got = average_precision(rel, total);
      require(std::abs(got - ap_bruteforce(rel, total)) < 1e-10, "average_precision mismatch");
    }
    if (included == 0) continue;
    RetrievalMetrics got = retrieval_map(ranked.lists, store.labels);
    require(std::abs(got.map - ap_sum / included) < 1e-10, "retrieval mAP mismatch");
    require(std::abs(got.rank1 - static_cast<double>(h1) / included) < 1e-10, "rank1 mismatch");
    require(std::abs(got.rank5 - static_cast<double>(h5) / included) < 1e-10, "rank5 mismatch");

    // classification mAP vs brute force
    Tensor<double> scores({m, n});
    for (auto& v : scores.data) v = rng.uniform(0, 1);
    double bf_sum = 0;
    int bf_classes = 0;
    for (int c = 0; c < n; ++c) {
      int total = 0;
      for (int lab : store.labels) total += lab == c ? 1 : 0;
      if (total == 0) continue;
      std::vector<int> order(static_cast<size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return scores.at2(a, c) > scores.at2(b, c); });
      std::vector<int> rel;
      for (int idx : order) rel.push_back(store.labels[static_cast<size_t>(idx)] == c ? 1 : 0);
      bf_sum += ap_bruteforce(rel, total);
      ++bf_classes;
    }
    if (bf_classes > 0) {
      require(std::abs(classification_map(scores, store.labels) - bf_sum / bf_classes) < 1e-10,
              "classification mAP mismatch");
    }
  }
  double secs = elapsed_s(t0);
  require(secs < 10.0, "metric oracle runtime " + std::to_string(secs) + "s exceeds 10s");
}

// ---------------------------------------------------------------- criterion 2

double iou_lattice(const BoundingBox& a, const BoundingBox& b, double h) {
  double lo_x = std::min(a.x_min, b.x_min), hi_x = std::max(a.x_max, b.x_max);
  double lo_y = std::min(a.y_min, b.y_min), hi_y = std::max(a.y_max, b.y_max);
  int nx = static_cast<int>(std::ceil((hi_x - lo_x) / h)) + 1;
  int ny = static_cast<int>(std::ceil((hi_y - lo_y) / h)) + 1;
  int64_t inter = 0, uni = 0;
  for (int iy = 0; iy < ny; ++iy) {
    double cy = lo_y + (iy + 0.5) * h;
    bool ay = cy > a.y_min && cy < a.y_max;
    bool by = cy > b.y_min && cy < b.y_max;
    if (!ay && !by) continue;
    for (int ix = 0; ix < nx; ++ix) {
      double cx = lo_x + (ix + 0.5) * h;
      bool in_a = ay && cx > a.x_min && cx < a.x_max;
      bool in_b = by && cx > b.x_min && cx < b.x_max;
      if (in_a && in_b) ++inter;
      if (in_a || in_b) ++uni;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void criterion_geometry_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(424242);
  const int n_pairs = 1000;
  std::vector<BoundingBox> as, bs;
  auto snap = [](double v) { return std::round(v * 100.0) / 100.0; };
  for (int i = 0; i < n_pairs; ++i) {
    double ax = snap(rng.uniform(0, 6)), ay = snap(rng.uniform(0, 6));
    double aw = snap(rng.uniform(0.05, 3)), ah = snap(rng.uniform(0.05, 3));
    double bx = snap(rng.uniform(0, 6)), by = snap(rng.uniform(0, 6));
    double bw = snap(rng.uniform(0.05, 3)), bh = snap(rng.uniform(0.05, 3));
    as.emplace_back(ax, ay, ax + aw, ay + ah);
    bs.emplace_back(bx, by, bx + bw, by + bh);
  }
  std::vector<double> lattice(n_pairs), closed(n_pairs);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_pairs; ++i) {
    lattice[static_cast<size_t>(i)] = iou_lattice(as[static_cast<size_t>(i)], bs[static_cast<size_t>(i)], 0.01);
    // independent closed-form area computation
    const BoundingBox& a = as[static_cast<size_t>(i)];
    const BoundingBox& b = bs[static_cast<size_t>(i)];
    double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    double uni = (a.x_max - a.x_min) * (a.y_max - a.y_min) +
                 (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
    closed[static_cast<size_t>(i)] = inter / uni;
  }
  for (int i = 0; i < n_pairs; ++i) {
    double got = iou(as[static_cast<size_t>(i)], bs[static_cast<size_t>(i)]);
    require(std::abs(got - lattice[static_cast<size_t>(i)]) < 1e-3,
            "iou disagrees with lattice oracle at pair " + std::to_string(i));
    require(std::abs(got - closed[static_cast<size_t>(i)]) < 1e-12,
            "iou disagrees with closed form at pair " + std::to_string(i));
  }
  double secs = elapsed_s(t0);
  require(secs < 10.0, "geometry oracle runtime " + std::to_string(secs) + "s exceeds 10s");
}

// ---------------------------------------------------------------- criterion 3

void criterion_positional_embedding() {
  auto v = positional_embedding(1, 4);
  require(std::abs(v[0] - std::sin(1.0)) < 1e-9, "pos[0] != sin(1)");
  require(std::abs(v[1] - std::cos(1.0)) < 1e-9, "pos[1] != cos(1)");
  require(std::abs(v[2] - std::sin(0.01)) < 1e-9, "pos[2] != sin(0.01)");
  require(std::abs(v[3] - std::cos(0.01)) < 1e-9, "pos[3] != cos(0.01)");
  require(std::abs(v[0] - 0.841471) < 1e-6, "pos[0] reference value");
  require(std::abs(v[1] - 0.540302) < 1e-6, "pos[1] reference value");
  require(std::abs(v[2] - 0.010000) < 1e-4, "pos[2] reference value");
  require(std::abs(v[3] - 0.999950) < 1e-6, "pos[3] reference value");

  for (int d : {4, 8, 64}) {
    for (int t = 0; t < 64; ++t) {
      auto p = positional_embedding(t, d);
      // full independent evaluation
      double sq = 0;
      for (int i = 0; i < d / 2; ++i) {
        double w = std::pow(10000.0, -2.0 * i / d);
        require(std::abs(p[static_cast<size_t>(2 * i)] - std::sin(w * t)) < 1e-9, "sin component");
        require(std::abs(p[static_cast<size_t>(2 * i + 1)] - std::cos(w * t)) < 1e-9, "cos component");
        sq += p[static_cast<size_t>(2 * i)] * p[static_cast<size_t>(2 * i)] +
              p[static_cast<size_t>(2 * i + 1)] * p[static_cast<size_t>(2 * i + 1)];
      }
      require(std::abs(sq - d / 2.0) < 1e-9, "squared norm != D/2");
    }
  }
}

// ---------------------------------------------------------------- criterion 4

void criterion_gradient_check() {
  auto t0 = std::chrono::steady_clock::now();
  ModelConfig mc;
  mc.backbone.feature_dim = 8;
  mc.backbone.stage_channels = {4, 6, 8};
  mc.fusion.feature_dim = 8;
  mc.fusion.num_contextual = 2;  // k=2
  mc.fusion.blocks = 2;          // N=2
  mc.fusion.heads = 2;
  mc.fusion.dropout = 0.0;
  mc.n_classes = 3;
  mc.input_size = 32;
  ActionModel<double> model(mc, 1234);
  Rng rng(77);
  auto batch = gradcheck::random_batch(3, mc.input_size, rng);
  Tensor<double> targets = gradcheck::one_hot_targets(3, 3, rng);
  Rng pix(99);
  auto res = gradcheck::check_model(model, batch, targets, 100, pix);
  double secs = elapsed_s(t0);
  require(res.max_rel_error < 1e-4,
          "max relative gradient error " + std::to_string(res.max_rel_error) + " at " +
              res.worst_param);
  require(secs < 60.0, "gradient check runtime " + std::to_string(secs) + "s exceeds 60s");
}

// ---------------------------------------------------------------- criterion 5

void criterion_token_invariants() {
  const int d = 8, k = 3;
  FusionConfig cfg;
  cfg.feature_dim = d;
  cfg.num_contextual = k;
  cfg.blocks = 2;
  cfg.heads = 2;
  cfg.dropout = 0.0;
  cfg.positional_enabled = false;
  cfg.type_enabled = true;

  Rng rng(31);
  Tensor<double> typ({3, d});
  for (auto& v : typ.data) v = rng.normal(0.0, 0.02);
  BoundingBox anchor(10, 10, 30, 30);

  // token count under 0, fewer-than-k, and more-than-k proposals
  for (int n_props : {0, 1, 8}) {
    ProposalSet props;
    for (int i = 0; i < n_props; ++i) {
      double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
      props.proposals.push_back(
          ScoredProposal{BoundingBox(x, y, x + 8, y + 8), rng.uniform(0.6, 1.0)});
    }
    auto boxes = select_contextual_regions(props, anchor, 0.5, k, 64, 64);
    require(static_cast<int>(boxes.size()) == k, "selection did not return exactly k boxes");
    std::vector<double> fa(d), fg(d);
    std::vector<std::vector<double>> fl;
    for (int i = 0; i < k; ++i) fl.push_back(std::vector<double>(static_cast<size_t>(d), 0.1 * i));
    TokenSequence<double> seq = assemble_tokens(fa, fg, fl, typ, cfg);
    require(seq.count() == k + 2, "token count != k+2");
  }

  // permutation invariance with positions disabled
  FusionEncoder<double> enc(cfg);
  Rng init(17);
  enc.init(init);
  std::vector<double> fa(d), fg(d);
  for (auto& v : fa) v = rng.uniform(-1, 1);
  for (auto& v : fg) v = rng.uniform(-1, 1);
  std::vector<std::vector<double>> fl;
  for (int i = 0; i < k; ++i) {
    std::vector<double> v(static_cast<size_t>(d));
    for (auto& x : v) x = rng.uniform(-1, 1);
    fl.push_back(v);
  }
  std::vector<std::vector<double>> fl_perm{fl[1], fl[2], fl[0]};
  auto o1 = enc.fuse(assemble_tokens(fa, fg, fl, typ, cfg));
  auto o2 = enc.fuse(assemble_tokens(fa, fg, fl_perm, typ, cfg));
  double max_diff = 0;
  for (int j = 0; j < d; ++j) {
    max_diff = std::max(max_diff, std::abs(o1[static_cast<size_t>(j)] - o2[static_cast<size_t>(j)]));
  }
  require(max_diff < 1e-9, "permutation changed the embedding by " + std::to_string(max_diff));
}

// ---------------------------------------------------------------- criterion 6

Tensor<double> random_metric_matrix(int m, Rng& rng) {
  std::vector<std::vector<double>> pts(static_cast<size_t>(m), std::vector<double>(4));
  for (auto& p : pts) {
    for (auto& x : p) x = rng.uniform(-1, 1);
  }
  Tensor<double> d({m, m});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double acc = 0;
      for (int p = 0; p < 4; ++p) {
        double diff = pts[static_cast<size_t>(i)][static_cast<size_t>(p)] -
                      pts[static_cast<size_t>(j)][static_cast<size_t>(p)];
        acc += diff * diff;
      }
      d.at2(i, j) = i == j ? 0.0 : std::sqrt(acc);
    }
  }
  return d;
}

std::vector<int> argsort_row_excl(const Tensor<double>& d, int row) {
  std::vector<int> order;
  for (int j = 0; j < d.dim(1); ++j) {
    if (j != row) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return d.at2(row, a) < d.at2(row, b); });
  return order;
}

void criterion_reranking() {
  Rng rng(9090);
  // lambda=1 preserves orderings on 50 random matrices
  for (int trial = 0; trial < 50; ++trial) {
    int m = rng.uniform_int(4, 30);
    Tensor<double> d = random_metric_matrix(m, rng);
    RerankParams params;
    params.k1 = rng.uniform_int(2, 8);
    params.k2 = std::max(1, params.k1 / 2);
    params.lambda = 1.0;
    Tensor<double> out = k_reciprocal_rerank(d, params);
    for (int i = 0; i < m; ++i) {
      require(argsort_row_excl(d, i) == argsort_row_excl(out, i),
              "lambda=1 changed an ordering");
    }
  }

  // hand-traced two-pair case
  {
    std::vector<std::vector<double>> pts = {{0, 0}, {0.1, 0}, {5, 5}, {5.1, 5}};
    Tensor<double> d({4, 4});
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        double dx = pts[static_cast<size_t>(i)][0] - pts[static_cast<size_t>(j)][0];
        double dy = pts[static_cast<size_t>(i)][1] - pts[static_cast<size_t>(j)][1];
        d.at2(i, j) = std::sqrt(dx * dx + dy * dy);
      }
    }
    RerankParams params;
    params.k1 = 2;
    params.k2 = 1;
    params.lambda = 0.0;
    Tensor<double> out = k_reciprocal_rerank(d, params);
    int partner[4] = {1, 0, 3, 2};
    for (int i = 0; i < 4; ++i) {
      require(argsort_row_excl(out, i)[0] == partner[i], "two-pair case rank-1 mismatch");
    }
  }

  // randomized cross-check against the direct reference implementation
  for (int trial = 0; trial < 15; ++trial) {
    int m = rng.uniform_int(5, 25);
    Tensor<double> d = random_metric_matrix(m, rng);
    RerankParams params;
    params.k1 = rng.uniform_int(2, 8);
    params.k2 = rng.uniform_int(1, std::max(1, params.k1 / 2));
    params.lambda = rng.uniform(0, 1);
    Tensor<double> got = k_reciprocal_rerank(d, params);
    Tensor<double> want = rerank_ref::rerank_reference(d, params.k1, params.k2, params.lambda);
    for (int64_t i = 0; i < got.size(); ++i) {
      require(std::abs(got[i] - want[i]) < 1e-8, "reference cross-check mismatch");
    }
  }
}

// ------------------------------------------------------- criteria 7, 8 and 9

struct PipelineResult {
  double map_raw = 0.0;
  double map_reranked = 0.0;
  double train_seconds = 0.0;
  json metrics_doc;
  std::string annotation_bytes;
  std::vector<RankedList> lists;
  std::vector<int> labels;
};

RunConfig desk_config() {
  RunConfig cfg;
  cfg.dataset.n_classes = 5;
  cfg.dataset.images_per_class = 60;
  cfg.dataset.image_size = 64;
  cfg.dataset.train_fraction = 2.0 / 3.0;
  cfg.model.backbone.feature_dim = 64;
  cfg.model.backbone.stage_channels = {16, 32, 64};
  cfg.model.fusion.feature_dim = 64;
  cfg.model.fusion.num_contextual = 3;
  cfg.model.fusion.blocks = 2;
  cfg.model.fusion.heads = 4;
  cfg.model.fusion.dropout = 0.1;
  cfg.model.n_classes = 5;
  cfg.model.input_size = 64;
  cfg.training.batch_size = 32;
  cfg.training.max_epochs = 25;
  cfg.training.early_stop_patience = 8;
  cfg.training.learning_rate = 1.5e-3;
  cfg.training.mixup_alpha = 0.2;
  cfg.training.seed = 2024;
  cfg.training.augment.hflip = true;
  cfg.training.augment.random_crop = false;
  cfg.training.augment.color_jitter = true;
  cfg.training.augment.jitter_strength = 0.1;
  cfg.training.augment.input_size = 64;
  return cfg;
}

PipelineResult run_pipeline(const fs::path& work, const RunConfig& cfg, bool with_rerank) {
  fs::remove_all(work);
  fs::create_directories(work);
  DatasetManifest manifest = generate_synthetic(cfg.dataset, cfg.training.seed, work.string());

  std::ifstream ann(work / "annotations.jsonl", std::ios::binary);
  std::stringstream ss;
  ss << ann.rdbuf();

  PipelineResult res;
  res.annotation_bytes = ss.str();

  require(manifest.split_indices(Split::kTrain).size() == 200, "train split != 200 samples");
  require(manifest.split_indices(Split::kVal).size() == 100, "val split != 100 samples");

  ActionModel<float> model(cfg.model, cfg.training.seed);
  auto t0 = std::chrono::steady_clock::now();
  train(model, manifest, cfg.training);
  res.train_seconds = elapsed_s(t0);

  EmbeddingStore store = extract_embeddings(model, manifest, Split::kVal);
  RankAllResult ranked = rank_all(store);
  res.lists = ranked.lists;
  res.labels = store.labels;
  RetrievalMetrics raw = retrieval_map(ranked.lists, store.labels);
  res.map_raw = raw.map;

  if (with_rerank) {
    Tensor<double> reranked = k_reciprocal_rerank(ranked.distances, cfg.reranking);
    std::vector<RankedList> rlists = lists_from_distances(reranked, store);
    RetrievalMetrics rr = retrieval_map(rlists, store.labels);
    res.map_reranked = rr.map;
    res.metrics_doc = metrics_to_json(
        rr, manifest.class_names,
        json{{"reranked", true}, {"k1", cfg.reranking.k1}, {"k2", cfg.reranking.k2},
             {"lambda", cfg.reranking.lambda}, {"metric", "euclidean_l2norm"}});
  } else {
    res.metrics_doc = metrics_to_json(raw, manifest.class_names, json{{"reranked", false}});
  }
  return res;
}

PipelineResult g_run1;  // shared between criteria 7, 8 and 9

void criterion_end_to_end() {
  RunConfig cfg = desk_config();
  g_run1 = run_pipeline("acceptance_work/run1", cfg, true);
  std::printf("    full model:  raw mAP %.4f, reranked mAP %.4f, train %.1fs\n",
              g_run1.map_raw, g_run1.map_reranked, g_run1.train_seconds);
  require(g_run1.train_seconds <= 600.0, "training exceeded 10 minutes");
  require(g_run1.map_raw >= 0.85,
          "raw retrieval mAP " + std::to_string(g_run1.map_raw) + " below 0.85");
  require(g_run1.map_reranked >= g_run1.map_raw - 0.05,
          "reranking degraded mAP by more than 0.05");

  // global-only ablation on the same seed
  RunConfig ablation = desk_config();
  ablation.model.use_anchored = false;
  ablation.model.use_contextual = false;
  PipelineResult global_only = run_pipeline("acceptance_work/run_global", ablation, false);
  std::printf("    global-only: raw mAP %.4f, train %.1fs\n", global_only.map_raw,
              global_only.train_seconds);
  require(g_run1.map_raw >= global_only.map_raw,
          "full model mAP " + std::to_string(g_run1.map_raw) + " below global-only " +
              std::to_string(global_only.map_raw));
}

void criterion_protocol_invariants() {
  require(!g_run1.lists.empty(), "criterion 7 must run first");
  for (const auto& list : g_run1.lists) {
    for (int idx : list.order) {
      require(idx != list.query_index, "a ranked list contains its own query");
    }
    require(static_cast<int>(list.order.size()) == static_cast<int>(g_run1.labels.size()) - 1,
            "ranked list length != M-1");
  }
  const json& doc = g_run1.metrics_doc;
  for (const char* key : {"schema_version", "map", "rank1", "rank5", "n_queries", "n_excluded",
                          "per_class", "params"}) {
    require(doc.contains(key), std::string("metrics JSON missing key ") + key);
  }
  double map = doc.at("map").get<double>();
  double r1 = doc.at("rank1").get<double>();
  double r5 = doc.at("rank5").get<double>();
  require(map >= 0.0 && map <= 1.0, "mAP outside [0,1]");
  require(r1 >= 0.0 && r1 <= 1.0, "rank1 outside [0,1]");
  require(r5 >= 0.0 && r5 <= 1.0, "rank5 outside [0,1]");
  require(r1 <= r5 + 1e-15, "rank1 > rank5");
  require(doc.at("per_class").is_object(), "per_class is not an object");
  for (const auto& [name, entry] : doc.at("per_class").items()) {
    (void)name;
    double v = entry.at("map").get<double>();
    require(v >= 0.0 && v <= 1.0, "per-class mAP outside [0,1]");
  }
  require(doc.at("params").at("reranked").is_boolean(), "params.reranked is not a boolean");
}

void criterion_reproducibility() {
  require(!g_run1.metrics_doc.empty(), "criterion 7 must run first");
  RunConfig cfg = desk_config();
  PipelineResult run2 = run_pipeline("acceptance_work/run2", cfg, true);
  require(run2.annotation_bytes == g_run1.annotation_bytes,
          "annotation files differ between identical runs");
  require(run2.metrics_doc.dump() == g_run1.metrics_doc.dump(),
          "metrics JSON differs between identical runs");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "metric oracles agree with brute force within 1e-10", criterion_metric_oracles},
      {2, "iou agrees with lattice oracle (1e-3) and closed form (1e-12)",
       criterion_geometry_oracle},
      {3, "positional embedding matches direct evaluation, norm D/2", criterion_positional_embedding},
      {4, "full-chain analytic gradients match finite differences (<1e-4)",
       criterion_gradient_check},
      {5, "token count fixed at k+2; permutation invariance without positions",
       criterion_token_invariants},
      {6, "k-reciprocal reranking: lambda=1 identity, hand trace, reference cross-check",
       criterion_reranking},
      {7, "end-to-end desk-scale experiment (mAP, ablation, reranking, runtime)",
       criterion_end_to_end},
      {8, "protocol invariants and metrics JSON schema", criterion_protocol_invariants},
      {9, "bitwise reproducibility across identical runs", criterion_reproducibility},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    try {
      c.fn();
      std::printf("[PASS] criterion %d: %s\n", c.id, c.name);
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %d: %s\n       %s\n", c.id, c.name, e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criteria failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
