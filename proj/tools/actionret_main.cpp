// Command-line driver for the action retrieval pipeline:
//   generate | train | extract | retrieve-evaluate | montage
// Thread count follows OMP_NUM_THREADS.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "actionret/config.hpp"
#include "actionret/evaluation.hpp"
#include "actionret/montage.hpp"
#include "actionret/reranking.hpp"
#include "actionret/retrieval.hpp"
#include "actionret/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace actionret;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<int64_t> seed;
  std::string out_dir;
};

RunConfig resolve_config(const GlobalArgs& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = load_run_config(g.config_path);
  if (g.seed) cfg.training.seed = static_cast<uint64_t>(*g.seed);
  return cfg;
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << doc.dump(2) << "\n";
}

int cmd_generate(const GlobalArgs& g, RunConfig cfg) {
  std::string out = g.out_dir.empty() ? "dataset" : g.out_dir;
  uint64_t seed = g.seed ? static_cast<uint64_t>(*g.seed) : cfg.training.seed;
  DatasetManifest m = generate_synthetic(cfg.dataset, seed, out);
  json snapshot = run_config_to_json(cfg);
  snapshot["seed"] = seed;
  write_json_file(snapshot, (fs::path(out) / "generate_config.json").string());
  std::cout << "generated " << m.samples.size() << " samples over " << m.num_classes()
            << " classes in " << out << "\n";
  return 0;
}

int cmd_train(const GlobalArgs& g, RunConfig cfg, const std::string& data_dir) {
  std::string out = g.out_dir.empty() ? "run" : g.out_dir;
  fs::create_directories(out);
  DatasetManifest manifest = load_dataset_dir(data_dir);
  cfg.model.n_classes = manifest.num_classes();
  cfg.training.augment.input_size = cfg.model.input_size;
  cfg.model.validate();

  ActionModel<float> model(cfg.model, cfg.training.seed);
  std::string log_path = (fs::path(out) / "train_log.jsonl").string();
  TrainResult res = train(model, manifest, cfg.training, log_path);

  std::string ckpt = (fs::path(out) / "checkpoint.bin").string();
  save_checkpoint(model, run_config_to_json(cfg), res.history, res.best_epoch,
                  res.best_val_map, ckpt);
  std::cout << "trained " << res.history.size() << " epochs; best val mAP "
            << res.best_val_map << " at epoch " << res.best_epoch << "\n"
            << "checkpoint: " << ckpt << "\n";
  return 0;
}

int cmd_extract(const GlobalArgs& g, const std::string& checkpoint_path,
                const std::string& data_dir, const std::string& split_name_arg) {
  std::string out = g.out_dir.empty() ? "." : g.out_dir;
  fs::create_directories(out);
  auto split = parse_split(split_name_arg);
  if (!split) throw std::invalid_argument("unknown split '" + split_name_arg + "'");
  LoadedCheckpoint loaded = load_model_checkpoint(checkpoint_path);
  DatasetManifest manifest = load_dataset_dir(data_dir);
  EmbeddingStore store = extract_embeddings(*loaded.model, manifest, *split);
  std::string path = (fs::path(out) / ("embeddings_" + split_name_arg + ".bin")).string();
  save_embedding_store(store, path);
  std::cout << "extracted " << store.size() << " embeddings (dim " << store.dim << ") to "
            << path << "\n";
  return 0;
}

int cmd_retrieve_evaluate(const GlobalArgs& g, RunConfig cfg, const std::string& checkpoint_path,
                          const std::string& data_dir, const std::string& split_name_arg,
                          const std::string& embeddings_path, bool rerank_flag, int limit) {
  std::string out = g.out_dir.empty() ? "." : g.out_dir;
  fs::create_directories(out);

  LoadedCheckpoint loaded = load_model_checkpoint(checkpoint_path);
  DatasetManifest manifest = load_dataset_dir(data_dir);
  auto split = parse_split(split_name_arg);
  if (!split) throw std::invalid_argument("unknown split '" + split_name_arg + "'");

  EmbeddingStore store;
  if (!embeddings_path.empty()) {
    store = load_embedding_store(embeddings_path);
  } else {
    store = extract_embeddings(*loaded.model, manifest, *split);
  }

  RankAllResult ranked = rank_all(store);
  std::vector<RankedList> lists = ranked.lists;
  if (rerank_flag) {
    Tensor<double> reranked = k_reciprocal_rerank(ranked.distances, cfg.reranking);
    lists = lists_from_distances(reranked, store);
  }

  RetrievalMetrics metrics = retrieval_map(lists, store.labels);
  json params{{"reranked", rerank_flag},
              {"k1", cfg.reranking.k1},
              {"k2", cfg.reranking.k2},
              {"lambda", cfg.reranking.lambda},
              {"metric", "euclidean_l2norm"},
              {"split", split_name_arg},
              {"checkpoint", checkpoint_path}};
  json doc = metrics_to_json(metrics, manifest.class_names, params);
  doc["config"] = loaded.doc.at("config");

  std::string metrics_path = (fs::path(out) / "metrics.json").string();
  write_json_file(doc, metrics_path);
  std::string ranked_path = (fs::path(out) / "ranked.jsonl").string();
  export_ranked_lists(lists, store, limit, ranked_path);

  std::cout << "mAP " << metrics.map << "  Rank-1 " << metrics.rank1 << "  Rank-5 "
            << metrics.rank5 << "  (" << metrics.n_queries << " queries, "
            << metrics.n_excluded << " excluded)\n"
            << "metrics: " << metrics_path << "\nranked lists: " << ranked_path << "\n";
  return 0;
}

int cmd_montage(const GlobalArgs& g, const std::string& ranked_path, const std::string& data_dir,
                const std::string& out_path, int limit, int tile, int max_rows) {
  (void)g;
  DatasetManifest manifest = load_dataset_dir(data_dir);
  std::vector<RankedExport> lists = load_ranked_export(ranked_path);
  MontageOptions opts;
  opts.limit = limit;
  opts.tile = tile;
  opts.max_rows = max_rows;
  write_montage(lists, manifest, out_path, opts);
  std::cout << "montage written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-aware image action retrieval pipeline"};
  app.require_subcommand(1);

  GlobalArgs g;
  int64_t seed_arg = -1;
  app.add_option("--config", g.config_path, "JSON config file (flags override fields)");
  auto* seed_opt = app.add_option("--seed", seed_arg, "Seed override");
  app.add_option("--out", g.out_dir, "Output directory");

  // generate
  auto* gen = app.add_subcommand("generate", "Render a synthetic dataset");
  int classes = -1, per_class = -1, image_size = -1, persons = -1, distractors = -1;
  double train_fraction = -1;
  gen->add_option("--classes", classes, "Number of action classes");
  gen->add_option("--per-class", per_class, "Images per class");
  gen->add_option("--image-size", image_size, "Square image edge in pixels");
  gen->add_option("--persons", persons, "Persons per image");
  gen->add_option("--train-fraction", train_fraction, "Fraction of images in the train split");
  gen->add_option("--distractors", distractors, "Distractor proposals per sample");

  // train
  auto* tr = app.add_subcommand("train", "Train the classification pretext model");
  std::string data_dir;
  tr->add_option("--data", data_dir, "Dataset directory")->required();
  int blocks = -1, heads = -1, k_ctx = -1, feature_dim = -1, input_size = -1;
  int epochs = -1, batch_size = -1, patience = -1;
  double lr = -1, mixup_alpha = -1, dropout = -1;
  bool no_anchored = false, no_global = false, no_contextual = false;
  bool no_pos = false, no_type = false, no_augment = false, exclude_person = false;
  tr->add_option("--blocks", blocks, "Fusion transformer depth N");
  tr->add_option("--heads", heads, "Attention heads per block");
  tr->add_option("--k", k_ctx, "Contextual regions per sample");
  tr->add_option("--feature-dim", feature_dim, "Feature dimension D");
  tr->add_option("--input-size", input_size, "Network input size");
  tr->add_option("--epochs", epochs, "Max training epochs");
  tr->add_option("--batch-size", batch_size, "Batch size");
  tr->add_option("--patience", patience, "Early-stop patience in epochs");
  tr->add_option("--lr", lr, "Learning rate");
  tr->add_option("--mixup-alpha", mixup_alpha, "Mixup Beta parameter (0 disables)");
  tr->add_option("--dropout", dropout, "Dropout rate in fusion blocks");
  tr->add_flag("--no-anchored", no_anchored, "Drop the anchored-person token");
  tr->add_flag("--no-global", no_global, "Drop the global-image token");
  tr->add_flag("--no-contextual", no_contextual, "Drop the contextual-region tokens");
  tr->add_flag("--no-pos", no_pos, "Disable positional embeddings");
  tr->add_flag("--no-type", no_type, "Disable type embeddings");
  tr->add_flag("--no-augment", no_augment, "Disable train-time augmentation");
  tr->add_flag("--exclude-person-proposals", exclude_person,
               "Drop proposals nearly duplicating the person box");

  // extract
  auto* ex = app.add_subcommand("extract", "Extract embeddings for one split");
  std::string checkpoint_path, split_arg = "val";
  ex->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  ex->add_option("--data", data_dir, "Dataset directory")->required();
  ex->add_option("--split", split_arg, "Split (train|val)");

  // retrieve-evaluate
  auto* re = app.add_subcommand("retrieve-evaluate",
                                "Rank the gallery and report mAP / Rank-k");
  std::string embeddings_path;
  bool rerank_flag = false;
  int limit = -1, k1 = -1, k2 = -1;
  double lambda = -1;
  re->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  re->add_option("--data", data_dir, "Dataset directory")->required();
  re->add_option("--split", split_arg, "Split used as query and gallery (train|val)");
  re->add_option("--embeddings", embeddings_path, "Reuse a saved embedding store");
  re->add_flag("--rerank", rerank_flag, "Apply k-reciprocal reranking");
  re->add_option("--k1", k1, "Reranking neighborhood size");
  re->add_option("--k2", k2, "Reranking expansion size");
  re->add_option("--lambda", lambda, "Reranking mixing weight");
  re->add_option("--limit", limit, "Ranked-list export depth");

  // montage
  auto* mo = app.add_subcommand("montage", "Render query rows with top results");
  std::string ranked_path, montage_out = "montage.ppm";
  int tile = 64, max_rows = 0, montage_limit = 8;
  mo->add_option("--ranked", ranked_path, "ranked.jsonl from retrieve-evaluate")->required();
  mo->add_option("--data", data_dir, "Dataset directory")->required();
  mo->add_option("--output", montage_out, "Output PPM path");
  mo->add_option("--limit", montage_limit, "Results per row");
  mo->add_option("--tile", tile, "Tile edge in pixels");
  mo->add_option("--max-rows", max_rows, "Cap on query rows (0 = all)");

  CLI11_PARSE(app, argc, argv);
  if (!seed_opt->empty()) g.seed = seed_arg;

  try {
    RunConfig cfg = resolve_config(g);
    if (gen->parsed()) {
      if (classes > 0) cfg.dataset.n_classes = classes;
      if (per_class > 0) cfg.dataset.images_per_class = per_class;
      if (image_size > 0) cfg.dataset.image_size = image_size;
      if (persons > 0) cfg.dataset.persons_per_image = persons;
      if (train_fraction > 0) cfg.dataset.train_fraction = train_fraction;
      if (distractors >= 0) cfg.dataset.n_distractors = distractors;
      return cmd_generate(g, cfg);
    }
    if (tr->parsed()) {
      if (feature_dim > 0) {
        cfg.model.fusion.feature_dim = feature_dim;
        cfg.model.backbone.feature_dim = feature_dim;
      }
      if (input_size > 0) cfg.model.input_size = input_size;
      if (blocks > 0) cfg.model.fusion.blocks = blocks;
      if (heads > 0) cfg.model.fusion.heads = heads;
      if (k_ctx > 0) cfg.model.fusion.num_contextual = k_ctx;
      if (dropout >= 0) cfg.model.fusion.dropout = dropout;
      if (no_anchored) cfg.model.use_anchored = false;
      if (no_global) cfg.model.use_global = false;
      if (no_contextual) cfg.model.use_contextual = false;
      if (no_pos) cfg.model.fusion.positional_enabled = false;
      if (no_type) cfg.model.fusion.type_enabled = false;
      if (exclude_person) cfg.model.exclude_person_proposals = true;
      if (epochs > 0) cfg.training.max_epochs = epochs;
      if (batch_size > 0) cfg.training.batch_size = batch_size;
      if (patience > 0) cfg.training.early_stop_patience = patience;
      if (lr > 0) cfg.training.learning_rate = lr;
      if (mixup_alpha >= 0) cfg.training.mixup_alpha = mixup_alpha;
      if (no_augment) {
        cfg.training.augment.hflip = false;
        cfg.training.augment.random_crop = false;
        cfg.training.augment.color_jitter = false;
      }
      return cmd_train(g, cfg, data_dir);
    }
    if (ex->parsed()) {
      return cmd_extract(g, checkpoint_path, data_dir, split_arg);
    }
    if (re->parsed()) {
      if (k1 > 0) cfg.reranking.k1 = k1;
      if (k2 > 0) cfg.reranking.k2 = k2;
      if (lambda >= 0) cfg.reranking.lambda = lambda;
      if (limit > 0) cfg.export_limit = limit;
      return cmd_retrieve_evaluate(g, cfg, checkpoint_path, data_dir, split_arg,
                                   embeddings_path, rerank_flag, cfg.export_limit);
    }
    if (mo->parsed()) {
      return cmd_montage(g, ranked_path, data_dir, montage_out, montage_limit, tile, max_rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
