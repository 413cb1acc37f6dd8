#ifndef ACTIONRET_CONFIG_HPP
#define ACTIONRET_CONFIG_HPP

#include <memory>
#include <string>

#include <json.hpp>

#include "actionret/dataset.hpp"
#include "actionret/model.hpp"
#include "actionret/reranking.hpp"
#include "actionret/training.hpp"

namespace actionret {

// One config file drives the whole pipeline; CLI flags override individual
// fields. Struct defaults are the full-scale settings (D=2048, k=10, N=3,
// 8 heads, 224 input, batch 128); desk-scale runs shrink them via config.
struct RunConfig {
  SyntheticConfig dataset;
  ModelConfig model;
  TrainConfig training;
  RerankParams reranking;
  int export_limit = 8;
};

nlohmann::json run_config_to_json(const RunConfig& config);
// Strict: unknown keys are rejected with their path.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct LoadedCheckpoint {
  std::unique_ptr<ActionModel<float>> model;
  nlohmann::json doc;  // full checkpoint JSON (config snapshot, history, ...)
};

// Rebuilds the model from the checkpoint's embedded config snapshot and
// loads its parameters.
LoadedCheckpoint load_model_checkpoint(const std::string& path);

}  // namespace actionret

#endif  // ACTIONRET_CONFIG_HPP
