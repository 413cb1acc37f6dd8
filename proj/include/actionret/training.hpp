#ifndef ACTIONRET_TRAINING_HPP
#define ACTIONRET_TRAINING_HPP

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "actionret/dataset.hpp"
#include "actionret/model.hpp"

namespace actionret {

// -sum_i p(x_i) log q(x_i). q must be strictly positive and sum to 1; p must
// be a distribution (one-hot or mixup-blended).
double cross_entropy(const std::vector<double>& predicted, const std::vector<double>& target);

// Row-wise softmax probabilities from logits.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

// Mean cross-entropy over the batch from logits, with the gradient
// d_logits = (softmax - target) / B.
template <typename T>
struct SoftmaxLossResult {
  double loss = 0.0;
  Tensor<T> probs;
  Tensor<T> d_logits;
};

template <typename T>
SoftmaxLossResult<T> softmax_cross_entropy(const Tensor<T>& logits, const Tensor<T>& targets);

// x' = lambda*x + (1-lambda)*x[partner]; targets blended identically.
template <typename T>
void apply_mixup(Tensor<T>& images, Tensor<T>& targets, double lambda,
                 const std::vector<int>& partner);

// Draws lambda ~ Beta(alpha, alpha) and a random partner permutation;
// returns the drawn lambda.
template <typename T>
double mixup_batch(Tensor<T>& images, Tensor<T>& targets, double alpha, Rng& rng);

// Decoupled weight decay Adam. Decay applies only to params flagged
// weight_decay; params flagged non-trainable (running statistics) are skipped.
template <typename T>
class AdamW {
 public:
  AdamW(double lr, double weight_decay = 0.01, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8);

  void step(const std::vector<Param<T>*>& params);
  double lr() const { return lr_; }

 private:
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

struct TrainConfig {
  int batch_size = 128;
  int max_epochs = 150;
  double learning_rate = 3e-5;
  double weight_decay = 0.01;
  int early_stop_patience = 15;
  double mixup_alpha = 0.2;
  uint64_t seed = 42;
  AugmentationPolicy augment;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_map = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

// Improvement tracking for early stopping: update() returns true when the
// run should stop, i.e. after `patience` consecutive non-improving epochs.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  bool update(double metric) {
    if (metric > best_) {
      best_ = metric;
      stale_ = 0;
      improved_ = true;
      return false;
    }
    improved_ = false;
    return ++stale_ >= patience_;
  }

  bool improved() const { return improved_; }
  double best() const { return best_; }

 private:
  int patience_;
  int stale_ = 0;
  bool improved_ = false;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_map = 0.0;
};

// Classification-pretext training: per epoch, iterate the train split with
// augmentation + mixup optimizing cross-entropy, evaluate classification mAP
// on the val split, retain the best-val parameters, stop early after
// `early_stop_patience` epochs without improvement. Deterministic for a fixed
// seed and thread count. When log_path is non-empty, one JSON object per
// epoch is appended there.
TrainResult train(ActionModel<float>& model, const DatasetManifest& manifest,
                  const TrainConfig& config, const std::string& log_path = "");

// Eval-mode class probabilities [M, n] over one split, plus the labels.
struct SplitScores {
  Tensor<double> probs;
  std::vector<int> labels;
};
SplitScores score_split(ActionModel<float>& model, const DatasetManifest& manifest, Split split,
                        int batch_size);

// Checkpoint container: magic+version header, a JSON document (config
// snapshot, epoch, metric history, parameter table) and the raw float32
// parameter arrays in table order.
void save_checkpoint(ActionModel<float>& model, const nlohmann::json& config_snapshot,
                     const std::vector<EpochStats>& history, int best_epoch,
                     double best_val_map, const std::string& path);

// Loads parameter arrays into an already constructed model (names and shapes
// must match) and returns the checkpoint's JSON document.
nlohmann::json apply_checkpoint_params(ActionModel<float>& model, const std::string& path);

// Reads just the JSON document of a checkpoint.
nlohmann::json read_checkpoint_json(const std::string& path);

}  // namespace actionret

#endif  // ACTIONRET_TRAINING_HPP
