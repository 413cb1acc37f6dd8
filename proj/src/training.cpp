#include "actionret/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "actionret/evaluation.hpp"

using nlohmann::json;

namespace actionret {

double cross_entropy(const std::vector<double>& predicted, const std::vector<double>& target) {
  if (predicted.size() != target.size() || predicted.empty()) {
    throw std::invalid_argument("cross_entropy: size mismatch");
  }
  double q_sum = 0.0, p_sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (!(predicted[i] > 0.0)) {
      throw std::invalid_argument("cross_entropy: predicted probabilities must be strictly positive");
    }
    if (target[i] < 0.0) throw std::invalid_argument("cross_entropy: negative target probability");
    q_sum += predicted[i];
    p_sum += target[i];
  }
  if (std::abs(q_sum - 1.0) > 1e-6 || std::abs(p_sum - 1.0) > 1e-6) {
    throw std::invalid_argument("cross_entropy: inputs must sum to 1");
  }
  double loss = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (target[i] > 0.0) loss -= target[i] * std::log(predicted[i]);
  }
  return loss;
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  const int rows = logits.dim(0), n = logits.dim(1);
  Tensor<T> probs(logits.shape);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* lr = logits.ptr() + static_cast<int64_t>(r) * n;
    T* pr = probs.ptr() + static_cast<int64_t>(r) * n;
    T mx = lr[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, lr[j]);
    T denom = T(0);
    for (int j = 0; j < n; ++j) {
      pr[j] = std::exp(lr[j] - mx);
      denom += pr[j];
    }
    for (int j = 0; j < n; ++j) pr[j] /= denom;
  }
  return probs;
}

template <typename T>
SoftmaxLossResult<T> softmax_cross_entropy(const Tensor<T>& logits, const Tensor<T>& targets) {
  if (!logits.same_shape(targets)) {
    throw std::invalid_argument("softmax_cross_entropy: shape mismatch");
  }
  const int rows = logits.dim(0), n = logits.dim(1);
  SoftmaxLossResult<T> out;
  out.probs = softmax_rows(logits);
  out.d_logits = Tensor<T>(logits.shape);
  double loss = 0.0;
  for (int r = 0; r < rows; ++r) {
    const T* lr = logits.ptr() + static_cast<int64_t>(r) * n;
    const T* tr = targets.ptr() + static_cast<int64_t>(r) * n;
    const T* pr = out.probs.ptr() + static_cast<int64_t>(r) * n;
    T* dr = out.d_logits.ptr() + static_cast<int64_t>(r) * n;
    // log-sum-exp for a stable log q
    T mx = lr[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, lr[j]);
    T lse = T(0);
    for (int j = 0; j < n; ++j) lse += std::exp(lr[j] - mx);
    lse = std::log(lse) + mx;
    for (int j = 0; j < n; ++j) {
      if (tr[j] > T(0)) loss -= static_cast<double>(tr[j]) * (static_cast<double>(lr[j]) - lse);
      dr[j] = (pr[j] - tr[j]) / static_cast<T>(rows);
    }
  }
  out.loss = loss / rows;
  return out;
}

template <typename T>
void apply_mixup(Tensor<T>& images, Tensor<T>& targets, double lambda,
                 const std::vector<int>& partner) {
  const int b = images.dim(0);
  if (static_cast<int>(partner.size()) != b) {
    throw std::invalid_argument("apply_mixup: partner permutation size mismatch");
  }
  const int64_t img_stride = images.size() / b;
  const int64_t tgt_stride = targets.size() / b;
  Tensor<T> img_src = images;
  Tensor<T> tgt_src = targets;
  const T lam = static_cast<T>(lambda);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < b; ++i) {
    const T* xa = img_src.ptr() + static_cast<int64_t>(i) * img_stride;
    const T* xb = img_src.ptr() + static_cast<int64_t>(partner[static_cast<size_t>(i)]) * img_stride;
    T* xd = images.ptr() + static_cast<int64_t>(i) * img_stride;
    for (int64_t j = 0; j < img_stride; ++j) xd[j] = lam * xa[j] + (T(1) - lam) * xb[j];
    const T* ta = tgt_src.ptr() + static_cast<int64_t>(i) * tgt_stride;
    const T* tb = tgt_src.ptr() + static_cast<int64_t>(partner[static_cast<size_t>(i)]) * tgt_stride;
    T* td = targets.ptr() + static_cast<int64_t>(i) * tgt_stride;
    for (int64_t j = 0; j < tgt_stride; ++j) td[j] = lam * ta[j] + (T(1) - lam) * tb[j];
  }
}

template <typename T>
double mixup_batch(Tensor<T>& images, Tensor<T>& targets, double alpha, Rng& rng) {
  const int b = images.dim(0);
  if (b < 2) throw std::invalid_argument("mixup_batch: batch size must be >= 2");
  if (alpha <= 0.0) throw std::invalid_argument("mixup_batch: alpha must be > 0");
  double lambda = rng.beta(alpha, alpha);
  std::vector<int> partner(static_cast<size_t>(b));
  std::iota(partner.begin(), partner.end(), 0);
  rng.shuffle(partner);
  apply_mixup(images, targets, lambda, partner);
  return lambda;
}

template <typename T>
AdamW<T>::AdamW(double lr, double weight_decay, double beta1, double beta2, double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

template <typename T>
void AdamW<T>::step(const std::vector<Param<T>*>& params) {
  if (m_.empty()) {
    for (const Param<T>* p : params) {
      m_.emplace_back(p->value.shape);
      v_.emplace_back(p->value.shape);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param<T>* p = params[pi];
    if (!p->trainable) continue;
    const double wd = p->weight_decay ? weight_decay_ : 0.0;
    T* val = p->value.ptr();
    const T* grad = p->grad.ptr();
    T* m = m_[pi].ptr();
    T* v = v_[pi].ptr();
    const int64_t n = p->value.size();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      double g = static_cast<double>(grad[i]);
      double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * g;
      double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      double mhat = mi / bc1;
      double vhat = vi / bc2;
      double update = mhat / (std::sqrt(vhat) + eps_) + wd * static_cast<double>(val[i]);
      val[i] = static_cast<T>(static_cast<double>(val[i]) - lr_ * update);
    }
  }
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("train: batch_size must be >= 2");
  if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
  if (early_stop_patience < 1 || early_stop_patience >= max_epochs) {
    throw std::invalid_argument("train: early_stop_patience must be in [1, max_epochs)");
  }
  if (mixup_alpha < 0.0) throw std::invalid_argument("train: mixup_alpha must be >= 0");
}

namespace {

// Decoded images cached per path; samples usually outnumber distinct images.
class ImageCache {
 public:
  const Image& get(const std::string& path) {
    auto it = cache_.find(path);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(path, read_ppm(path)).first->second;
  }

 private:
  std::unordered_map<std::string, Image> cache_;
};

void copy_image_to_batch(const Image& img, Tensor<float>& images, int slot) {
  float* dst = images.ptr() + static_cast<int64_t>(slot) * img.data.size();
  for (size_t j = 0; j < img.data.size(); ++j) dst[j] = img.data[j] * 2.0f - 1.0f;
}

struct ParamSnapshot {
  std::vector<Tensor<float>> values;
};

ParamSnapshot snapshot_params(const std::vector<Param<float>*>& params) {
  ParamSnapshot s;
  for (const Param<float>* p : params) s.values.push_back(p->value);
  return s;
}

void restore_params(const std::vector<Param<float>*>& params, const ParamSnapshot& s) {
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = s.values[i];
}

}  // namespace

SplitScores score_split(ActionModel<float>& model, const DatasetManifest& manifest, Split split,
                        int batch_size) {
  std::vector<size_t> indices = manifest.split_indices(split);
  if (indices.empty()) throw std::invalid_argument("score_split: empty split");
  const int input = model.config().input_size;
  const int n = model.config().n_classes;
  SplitScores out;
  out.probs = Tensor<double>({static_cast<int>(indices.size()), n});
  Rng rng(0);
  ImageCache cache;
  for (size_t start = 0; start < indices.size(); start += static_cast<size_t>(batch_size)) {
    size_t end = std::min(indices.size(), start + static_cast<size_t>(batch_size));
    int b = static_cast<int>(end - start);
    typename ActionModel<float>::BatchInput batch;
    batch.images = Tensor<float>({b, 3, input, input});
    for (int i = 0; i < b; ++i) {
      const ImageSample& s = manifest.samples[indices[start + static_cast<size_t>(i)]];
      const Image& img = cache.get(manifest.resolve_image_path(s));
      AugmentedSample as = resize_sample(img, s.person_box, s.proposals, input);
      copy_image_to_batch(as.image, batch.images, i);
      batch.person_boxes.push_back(as.person_box);
      batch.proposals.push_back(as.proposals);
      batch.image_ids.push_back(s.image_id);
    }
    typename ActionModel<float>::Output fwd = model.forward(batch, false, rng);
    Tensor<float> probs = softmax_rows(fwd.logits);
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < n; ++j) {
        out.probs.at2(static_cast<int>(start) + i, j) = static_cast<double>(probs.at2(i, j));
      }
    }
  }
  for (size_t idx : indices) out.labels.push_back(manifest.samples[idx].label);
  return out;
}

TrainResult train(ActionModel<float>& model, const DatasetManifest& manifest,
                  const TrainConfig& config, const std::string& log_path) {
  config.validate();
  std::vector<size_t> train_idx = manifest.split_indices(Split::kTrain);
  std::vector<size_t> val_idx = manifest.split_indices(Split::kVal);
  if (train_idx.empty() || val_idx.empty()) {
    throw std::invalid_argument("train: manifest needs nonempty train and val splits");
  }
  const int n = model.config().n_classes;
  const int input = model.config().input_size;
  AugmentationPolicy policy = config.augment;
  policy.input_size = input;

  std::vector<Param<float>*> params = model.params();
  AdamW<float> opt(config.learning_rate, config.weight_decay);
  Rng rng(config.seed);
  Rng shuffle_rng = rng.fork(1);
  Rng augment_rng = rng.fork(2);
  Rng mixup_rng = rng.fork(3);
  Rng dropout_rng = rng.fork(4);

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw std::runtime_error("train: cannot open log file " + log_path);
  }

  ImageCache cache;
  TrainResult result;
  ParamSnapshot best;
  EarlyStopper stopper(config.early_stop_patience);
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<size_t> order = train_idx;
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    int steps = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      int b = static_cast<int>(end - start);
      if (b < 2) continue;  // BN train mode needs >= 2; a 1-sample tail is dropped

      typename ActionModel<float>::BatchInput batch;
      batch.images = Tensor<float>({b, 3, input, input});
      Tensor<float> targets({b, n});
      for (int i = 0; i < b; ++i) {
        const ImageSample& s = manifest.samples[order[start + static_cast<size_t>(i)]];
        const Image& img = cache.get(manifest.resolve_image_path(s));
        AugmentedSample as = augment(img, s.person_box, s.proposals, policy, augment_rng);
        copy_image_to_batch(as.image, batch.images, i);
        batch.person_boxes.push_back(as.person_box);
        batch.proposals.push_back(as.proposals);
        batch.image_ids.push_back(s.image_id);
        targets.at2(i, s.label) = 1.0f;
      }
      if (config.mixup_alpha > 0.0) {
        mixup_batch(batch.images, targets, config.mixup_alpha, mixup_rng);
      }

      for (Param<float>* p : params) p->zero_grad();
      typename ActionModel<float>::Output fwd = model.forward(batch, true, dropout_rng);
      SoftmaxLossResult<float> loss = softmax_cross_entropy(fwd.logits, targets);
      if (!std::isfinite(loss.loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", step " + std::to_string(steps));
      }
      model.backward(loss.d_logits);
      opt.step(params);
      loss_sum += loss.loss;
      ++steps;
    }

    SplitScores val = score_split(model, manifest, Split::kVal, config.batch_size);
    double val_map = classification_map(val.probs, val.labels);
    auto t1 = std::chrono::steady_clock::now();

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = steps > 0 ? loss_sum / steps : 0.0;
    stats.val_map = val_map;
    stats.lr = config.learning_rate;
    stats.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.history.push_back(stats);
    if (log) {
      log << json{{"schema_version", 1}, {"epoch", stats.epoch},
                  {"train_loss", stats.train_loss}, {"val_map", stats.val_map},
                  {"lr", stats.lr}, {"seconds", stats.seconds}}.dump()
          << "\n";
      log.flush();
    }

    bool stop = stopper.update(val_map);
    if (stopper.improved()) {
      best_epoch = epoch;
      best = snapshot_params(params);
    }
    if (stop) break;
  }

  restore_params(params, best);
  result.best_epoch = best_epoch;
  result.best_val_map = stopper.best();
  return result;
}

namespace {
constexpr char kCheckpointMagic[8] = {'A', 'R', 'C', 'K', 'P', 'T', '0', '1'};
}

void save_checkpoint(ActionModel<float>& model, const json& config_snapshot,
                     const std::vector<EpochStats>& history, int best_epoch,
                     double best_val_map, const std::string& path) {
  std::vector<Param<float>*> params = model.params();
  json table = json::array();
  for (const Param<float>* p : params) {
    table.push_back(json{{"name", p->name}, {"shape", p->value.shape}});
  }
  json hist = json::array();
  for (const EpochStats& e : history) {
    hist.push_back(json{{"epoch", e.epoch}, {"train_loss", e.train_loss},
                        {"val_map", e.val_map}, {"lr", e.lr}, {"seconds", e.seconds}});
  }
  json doc{{"schema_version", 1}, {"config", config_snapshot}, {"epoch", best_epoch},
           {"best_val_map", best_val_map}, {"history", hist}, {"params", table}};
  std::string doc_str = doc.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kCheckpointMagic, 8);
  uint32_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), 4);
  uint64_t len = doc_str.size();
  f.write(reinterpret_cast<const char*>(&len), 8);
  f.write(doc_str.data(), static_cast<std::streamsize>(doc_str.size()));
  for (const Param<float>* p : params) {
    f.write(reinterpret_cast<const char*>(p->value.ptr()),
            static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

namespace {

json read_checkpoint_header(std::ifstream& f, const std::string& path) {
  char magic[8];
  f.read(magic, 8);
  if (f.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  uint32_t version = 0;
  uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&len), 8);
  if (!f || version != 1) throw std::runtime_error("checkpoint: unsupported version in " + path);
  std::string doc_str(len, '\0');
  f.read(doc_str.data(), static_cast<std::streamsize>(len));
  if (f.gcount() != static_cast<std::streamsize>(len)) {
    throw std::runtime_error("checkpoint: truncated header in " + path);
  }
  return json::parse(doc_str);
}

}  // namespace

json read_checkpoint_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  return read_checkpoint_header(f, path);
}

json apply_checkpoint_params(ActionModel<float>& model, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  json doc = read_checkpoint_header(f, path);

  std::unordered_map<std::string, Param<float>*> by_name;
  for (Param<float>* p : model.params()) by_name[p->name] = p;

  size_t applied = 0;
  for (const auto& entry : doc.at("params")) {
    std::string name = entry.at("name").get<std::string>();
    std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint: parameter '" + name + "' not present in model");
    }
    Param<float>* p = it->second;
    if (p->value.shape != shape) {
      throw std::runtime_error("checkpoint: shape mismatch for parameter '" + name + "'");
    }
    f.read(reinterpret_cast<char*>(p->value.ptr()),
           static_cast<std::streamsize>(p->value.size() * sizeof(float)));
    if (f.gcount() != static_cast<std::streamsize>(p->value.size() * sizeof(float))) {
      throw std::runtime_error("checkpoint: truncated data for parameter '" + name + "'");
    }
    ++applied;
  }
  if (applied != by_name.size()) {
    throw std::runtime_error("checkpoint: parameter count mismatch");
  }
  return doc;
}

template Tensor<float> softmax_rows<float>(const Tensor<float>&);
template Tensor<double> softmax_rows<double>(const Tensor<double>&);
template struct SoftmaxLossResult<float>;
template struct SoftmaxLossResult<double>;
template SoftmaxLossResult<float> softmax_cross_entropy<float>(const Tensor<float>&, const Tensor<float>&);
template SoftmaxLossResult<double> softmax_cross_entropy<double>(const Tensor<double>&, const Tensor<double>&);
template void apply_mixup<float>(Tensor<float>&, Tensor<float>&, double, const std::vector<int>&);
template void apply_mixup<double>(Tensor<double>&, Tensor<double>&, double, const std::vector<int>&);
template double mixup_batch<float>(Tensor<float>&, Tensor<float>&, double, Rng&);
template double mixup_batch<double>(Tensor<double>&, Tensor<double>&, double, Rng&);
template class AdamW<float>;
template class AdamW<double>;

}  // namespace actionret
