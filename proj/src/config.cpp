#include "actionret/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

using nlohmann::json;

namespace actionret {

namespace {

void check_keys(const json& j, const std::string& scope, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument("config: '" + scope + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("config: unknown key '" + scope + "." + key + "'");
    }
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json model_config_to_json(const ModelConfig& c) {
  return json{
      {"feature_dim", c.fusion.feature_dim},
      {"input_size", c.input_size},
      {"n_classes", c.n_classes},
      {"classifier_hidden", c.classifier_hidden},
      {"confidence_threshold", c.confidence_threshold},
      {"use_anchored", c.use_anchored},
      {"use_global", c.use_global},
      {"use_contextual", c.use_contextual},
      {"exclude_person_proposals", c.exclude_person_proposals},
      {"person_overlap_iou", c.person_overlap_iou},
      {"backbone",
       json{{"kind", c.backbone.kind == BackboneKind::kTinyConv ? "tiny_conv" : "external_adapter"},
            {"stage_channels", c.backbone.stage_channels},
            {"feature_dir", c.backbone.feature_dir}}},
      {"fusion", json{{"num_contextual", c.fusion.num_contextual},
                      {"blocks", c.fusion.blocks},
                      {"heads", c.fusion.heads},
                      {"ffn_multiplier", c.fusion.ffn_multiplier},
                      {"dropout", c.fusion.dropout},
                      {"positional", c.fusion.positional_enabled},
                      {"type", c.fusion.type_enabled}}}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  check_keys(j, "model",
             {"feature_dim", "input_size", "n_classes", "classifier_hidden",
              "confidence_threshold", "use_anchored", "use_global", "use_contextual",
              "exclude_person_proposals", "person_overlap_iou", "backbone", "fusion"});
  int feature_dim = c.fusion.feature_dim;
  maybe(j, "feature_dim", feature_dim);
  c.fusion.feature_dim = feature_dim;
  c.backbone.feature_dim = feature_dim;
  maybe(j, "input_size", c.input_size);
  maybe(j, "n_classes", c.n_classes);
  maybe(j, "classifier_hidden", c.classifier_hidden);
  maybe(j, "confidence_threshold", c.confidence_threshold);
  maybe(j, "use_anchored", c.use_anchored);
  maybe(j, "use_global", c.use_global);
  maybe(j, "use_contextual", c.use_contextual);
  maybe(j, "exclude_person_proposals", c.exclude_person_proposals);
  maybe(j, "person_overlap_iou", c.person_overlap_iou);
  if (j.contains("backbone")) {
    const json& b = j.at("backbone");
    check_keys(b, "model.backbone", {"kind", "stage_channels", "feature_dir"});
    if (b.contains("kind")) {
      std::string kind = b.at("kind").get<std::string>();
      if (kind == "tiny_conv") {
        c.backbone.kind = BackboneKind::kTinyConv;
      } else if (kind == "external_adapter") {
        c.backbone.kind = BackboneKind::kExternalAdapter;
      } else {
        throw std::invalid_argument("config: unknown backbone kind '" + kind + "'");
      }
    }
    maybe(b, "stage_channels", c.backbone.stage_channels);
    maybe(b, "feature_dir", c.backbone.feature_dir);
  }
  if (j.contains("fusion")) {
    const json& f = j.at("fusion");
    check_keys(f, "model.fusion",
               {"num_contextual", "blocks", "heads", "ffn_multiplier", "dropout", "positional",
                "type"});
    maybe(f, "num_contextual", c.fusion.num_contextual);
    maybe(f, "blocks", c.fusion.blocks);
    maybe(f, "heads", c.fusion.heads);
    maybe(f, "ffn_multiplier", c.fusion.ffn_multiplier);
    maybe(f, "dropout", c.fusion.dropout);
    maybe(f, "positional", c.fusion.positional_enabled);
    maybe(f, "type", c.fusion.type_enabled);
  }
  return c;
}

json run_config_to_json(const RunConfig& c) {
  return json{
      {"schema_version", 1},
      {"dataset", json{{"n_classes", c.dataset.n_classes},
                       {"images_per_class", c.dataset.images_per_class},
                       {"image_size", c.dataset.image_size},
                       {"persons_per_image", c.dataset.persons_per_image},
                       {"train_fraction", c.dataset.train_fraction},
                       {"n_distractors", c.dataset.n_distractors}}},
      {"model", model_config_to_json(c.model)},
      {"training", json{{"batch_size", c.training.batch_size},
                        {"max_epochs", c.training.max_epochs},
                        {"learning_rate", c.training.learning_rate},
                        {"weight_decay", c.training.weight_decay},
                        {"early_stop_patience", c.training.early_stop_patience},
                        {"mixup_alpha", c.training.mixup_alpha},
                        {"seed", c.training.seed},
                        {"augment", json{{"hflip", c.training.augment.hflip},
                                         {"random_crop", c.training.augment.random_crop},
                                         {"color_jitter", c.training.augment.color_jitter},
                                         {"crop_min_scale", c.training.augment.crop_min_scale},
                                         {"jitter_strength", c.training.augment.jitter_strength}}}}},
      {"reranking", json{{"k1", c.reranking.k1}, {"k2", c.reranking.k2},
                         {"lambda", c.reranking.lambda}}},
      {"export_limit", c.export_limit}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  check_keys(j, "config",
             {"schema_version", "dataset", "model", "training", "reranking", "export_limit"});
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, "dataset",
               {"n_classes", "images_per_class", "image_size", "persons_per_image",
                "train_fraction", "n_distractors"});
    maybe(d, "n_classes", c.dataset.n_classes);
    maybe(d, "images_per_class", c.dataset.images_per_class);
    maybe(d, "image_size", c.dataset.image_size);
    maybe(d, "persons_per_image", c.dataset.persons_per_image);
    maybe(d, "train_fraction", c.dataset.train_fraction);
    maybe(d, "n_distractors", c.dataset.n_distractors);
  }
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("training")) {
    const json& t = j.at("training");
    check_keys(t, "training",
               {"batch_size", "max_epochs", "learning_rate", "weight_decay",
                "early_stop_patience", "mixup_alpha", "seed", "augment"});
    maybe(t, "batch_size", c.training.batch_size);
    maybe(t, "max_epochs", c.training.max_epochs);
    maybe(t, "learning_rate", c.training.learning_rate);
    maybe(t, "weight_decay", c.training.weight_decay);
    maybe(t, "early_stop_patience", c.training.early_stop_patience);
    maybe(t, "mixup_alpha", c.training.mixup_alpha);
    maybe(t, "seed", c.training.seed);
    if (t.contains("augment")) {
      const json& a = t.at("augment");
      check_keys(a, "training.augment",
                 {"hflip", "random_crop", "color_jitter", "crop_min_scale", "jitter_strength"});
      maybe(a, "hflip", c.training.augment.hflip);
      maybe(a, "random_crop", c.training.augment.random_crop);
      maybe(a, "color_jitter", c.training.augment.color_jitter);
      maybe(a, "crop_min_scale", c.training.augment.crop_min_scale);
      maybe(a, "jitter_strength", c.training.augment.jitter_strength);
    }
  }
  if (j.contains("reranking")) {
    const json& r = j.at("reranking");
    check_keys(r, "reranking", {"k1", "k2", "lambda"});
    maybe(r, "k1", c.reranking.k1);
    maybe(r, "k2", c.reranking.k2);
    maybe(r, "lambda", c.reranking.lambda);
  }
  maybe(j, "export_limit", c.export_limit);
  c.training.augment.input_size = c.model.input_size;
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: invalid JSON in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

LoadedCheckpoint load_model_checkpoint(const std::string& path) {
  json doc = read_checkpoint_json(path);
  json model_json = doc.at("config").contains("model") ? doc.at("config").at("model")
                                                       : doc.at("config");
  ModelConfig mc = model_config_from_json(model_json);
  LoadedCheckpoint out;
  out.model = std::make_unique<ActionModel<float>>(mc, 0);
  out.doc = apply_checkpoint_params(*out.model, path);
  return out;
}

}  // namespace actionret
