#include "actionret/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace actionret {

void ModelConfig::validate() const {
  fusion.validate();
  if (backbone.feature_dim != fusion.feature_dim) {
    throw std::invalid_argument("model: backbone feature_dim must match fusion feature_dim");
  }
  if (n_classes < 2) throw std::invalid_argument("model: n_classes must be >= 2");
  if (input_size < 16) throw std::invalid_argument("model: input_size must be >= 16");
  if (confidence_threshold < 0.0 || confidence_threshold > 1.0) {
    throw std::invalid_argument("model: confidence_threshold outside [0,1]");
  }
  if (!use_anchored && !use_global && !use_contextual) {
    throw std::invalid_argument("model: at least one feature aspect must be enabled");
  }
  if (classifier_hidden < 0) throw std::invalid_argument("model: classifier_hidden must be >= 0");
}

template <typename T>
ClassifierHead<T>::ClassifierHead(int in_dim, int hidden, int n_classes)
    : lin1_("classifier.lin1", in_dim, hidden),
      lin2_("classifier.lin2", hidden, n_classes),
      n_classes_(n_classes) {}

template <typename T>
void ClassifierHead<T>::init(Rng& rng) {
  lin1_.init(rng);
  lin2_.init(rng);
}

template <typename T>
Tensor<T> ClassifierHead<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = lin1_.forward(x);
  relu_inplace(h);
  hidden_act_ = h;
  return lin2_.forward(h);
}

template <typename T>
Tensor<T> ClassifierHead<T>::backward(const Tensor<T>& d_logits) {
  Tensor<T> d_h = lin2_.backward(d_logits);
  d_h = relu_backward(hidden_act_, d_h);
  return lin1_.backward(d_h);
}

template <typename T>
void ClassifierHead<T>::collect_params(std::vector<Param<T>*>& out) {
  lin1_.collect_params(out);
  lin2_.collect_params(out);
}

template <typename T>
ActionModel<T>::ActionModel(const ModelConfig& config, uint64_t seed)
    : config_(config),
      type_embed_("fusion.type_embeddings", {3, config.fusion.feature_dim}, false),
      encoder_(config.fusion),
      neck_(config.fusion.feature_dim),
      classifier_(config.fusion.feature_dim,
                  config.classifier_hidden > 0 ? config.classifier_hidden
                                               : std::max(2, config.fusion.feature_dim / 2),
                  config.n_classes) {
  config_.validate();
  if (config_.backbone.kind == BackboneKind::kTinyConv) {
    backbone_ = TinyConvBackbone<T>(config_.backbone);
  }
  Rng rng(seed);
  if (config_.backbone.kind == BackboneKind::kTinyConv) backbone_.init(rng);
  for (auto& v : type_embed_.value.data) v = static_cast<T>(rng.normal(0.0, 0.02));
  encoder_.init(rng);
  classifier_.init(rng);
}

template <typename T>
FeatureMap<T> ActionModel<T>::feature_map_for(const Tensor<T>& fm_batch, int b) const {
  FeatureMap<T> fm;
  int d = fm_batch.dim(1), h = fm_batch.dim(2), w = fm_batch.dim(3);
  fm.data = Tensor<T>({d, h, w});
  const T* src = fm_batch.ptr() + static_cast<int64_t>(b) * d * h * w;
  std::copy(src, src + static_cast<int64_t>(d) * h * w, fm.data.ptr());
  fm.stride = static_cast<double>(config_.input_size) / h;
  return fm;
}

template <typename T>
typename ActionModel<T>::Output ActionModel<T>::forward(const BatchInput& input, bool train,
                                                        Rng& rng) {
  const int b = input.images.empty() ? static_cast<int>(input.person_boxes.size())
                                     : input.images.dim(0);
  if (b < 1) throw std::invalid_argument("model: empty batch");
  if (static_cast<int>(input.person_boxes.size()) != b ||
      static_cast<int>(input.proposals.size()) != b) {
    throw std::invalid_argument("model: batch arrays disagree in length");
  }
  const int d = config_.fusion.feature_dim;
  const int k = config_.fusion.num_contextual;
  batch_ = b;

  // Per-sample feature maps.
  std::vector<FeatureMap<T>> maps;
  maps.reserve(static_cast<size_t>(b));
  if (config_.backbone.kind == BackboneKind::kTinyConv) {
    if (input.images.ndim() != 4 || input.images.dim(2) != config_.input_size ||
        input.images.dim(3) != config_.input_size) {
      throw std::invalid_argument("model: image tensor must be [B,3,input,input]");
    }
    Tensor<T> fm_batch = backbone_.forward(input.images);
    if (!all_finite(fm_batch)) {
      throw std::runtime_error("model: backbone produced non-finite feature values");
    }
    fm_h_ = fm_batch.dim(2);
    fm_w_ = fm_batch.dim(3);
    for (int i = 0; i < b; ++i) maps.push_back(feature_map_for(fm_batch, i));
  } else {
    if (static_cast<int>(input.image_ids.size()) != b) {
      throw std::invalid_argument("model: external adapter backbone requires image_ids");
    }
    namespace fs = std::filesystem;
    for (int i = 0; i < b; ++i) {
      FeatureMap<float> raw = load_feature_map_file(
          (fs::path(config_.backbone.feature_dir) / (input.image_ids[i] + ".fmap")).string());
      if (raw.channels() != d) {
        throw std::invalid_argument("model: feature map channel count mismatch for " +
                                    input.image_ids[i]);
      }
      FeatureMap<T> fm;
      fm.stride = raw.stride;
      fm.data = Tensor<T>(raw.data.shape);
      for (int64_t j = 0; j < raw.data.size(); ++j) fm.data[j] = static_cast<T>(raw.data[j]);
      maps.push_back(std::move(fm));
    }
    fm_h_ = maps[0].height();
    fm_w_ = maps[0].width();
  }

  const int s = config_.token_count();
  Tensor<T> tokens({b, s, d});
  tags_.clear();
  argmax_.assign(static_cast<size_t>(b), {});

  const double img_w = config_.input_size;
  const double img_h = config_.input_size;
  for (int i = 0; i < b; ++i) {
    const FeatureMap<T>& fm = maps[static_cast<size_t>(i)];
    std::vector<T> anchored, global_feat;
    std::vector<std::vector<T>> contextual;
    std::vector<std::vector<int>> arg;
    if (config_.use_anchored) {
      PooledFeature<T> p = roi_pool_with_argmax(fm, input.person_boxes[static_cast<size_t>(i)]);
      anchored = std::move(p.features);
      arg.push_back(std::move(p.argmax));
    }
    if (config_.use_global) {
      PooledFeature<T> p = global_max_pool_with_argmax(fm);
      global_feat = std::move(p.features);
      arg.push_back(std::move(p.argmax));
    }
    if (config_.use_contextual) {
      ProposalSet candidates = input.proposals[static_cast<size_t>(i)];
      if (config_.exclude_person_proposals) {
        candidates = filter_anchor_duplicates(candidates, input.person_boxes[static_cast<size_t>(i)],
                                              config_.person_overlap_iou);
      }
      std::vector<BoundingBox> boxes = select_contextual_regions(
          candidates, input.person_boxes[static_cast<size_t>(i)],
          config_.confidence_threshold, k, img_w, img_h);
      for (const auto& box : boxes) {
        PooledFeature<T> p = roi_pool_with_argmax(fm, box);
        contextual.push_back(std::move(p.features));
        arg.push_back(std::move(p.argmax));
      }
    }
    TokenSequence<T> seq = build_token_sequence(
        config_.use_anchored ? &anchored : nullptr,
        config_.use_global ? &global_feat : nullptr, contextual, type_embed_.value,
        config_.fusion);
    if (seq.count() != s) throw std::logic_error("model: token count mismatch");
    std::copy(seq.tokens.data.begin(), seq.tokens.data.end(),
              tokens.data.begin() + static_cast<int64_t>(i) * s * d);
    if (i == 0) tags_ = seq.tags;
    argmax_[static_cast<size_t>(i)] = std::move(arg);
  }

  Output out;
  Tensor<T> fused = encoder_.forward(tokens, train, rng);
  out.embeddings = neck_.forward(fused, train);
  out.logits = classifier_.forward(out.embeddings);
  return out;
}

template <typename T>
Tensor<T> ActionModel<T>::backward(const Tensor<T>& d_logits) {
  Tensor<T> empty;
  return backward(d_logits, empty);
}

template <typename T>
Tensor<T> ActionModel<T>::backward(const Tensor<T>& d_logits, const Tensor<T>& d_embeddings) {
  Tensor<T> d_emb = classifier_.backward(d_logits);
  if (!d_embeddings.empty()) {
    for (int64_t i = 0; i < d_emb.size(); ++i) d_emb[i] += d_embeddings[i];
  }
  Tensor<T> d_fused = neck_.backward(d_emb);
  Tensor<T> d_tokens = encoder_.backward(d_fused);

  const int b = batch_;
  const int s = config_.token_count();
  const int d = config_.fusion.feature_dim;

  if (config_.fusion.type_enabled) {
    T* tg = type_embed_.grad.ptr();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < d; ++j) {
      T acc[3] = {T(0), T(0), T(0)};
      for (int i = 0; i < b; ++i) {
        for (int t = 0; t < s; ++t) {
          acc[static_cast<int>(tags_[static_cast<size_t>(t)])] +=
              d_tokens.ptr()[(static_cast<int64_t>(i) * s + t) * d + j];
        }
      }
      for (int a = 0; a < 3; ++a) tg[static_cast<int64_t>(a) * d + j] += acc[a];
    }
  }

  if (config_.backbone.kind != BackboneKind::kTinyConv) {
    return Tensor<T>();
  }

  // Scatter token gradients back to the feature-map cells that won the max.
  Tensor<T> d_fm({b, d, fm_h_, fm_w_});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < b; ++i) {
    T* plane = d_fm.ptr() + static_cast<int64_t>(i) * d * fm_h_ * fm_w_;
    for (int t = 0; t < s; ++t) {
      const std::vector<int>& arg = argmax_[static_cast<size_t>(i)][static_cast<size_t>(t)];
      const T* grad_row = d_tokens.ptr() + (static_cast<int64_t>(i) * s + t) * d;
      for (int ch = 0; ch < d; ++ch) {
        plane[static_cast<int64_t>(ch) * fm_h_ * fm_w_ + arg[static_cast<size_t>(ch)]] +=
            grad_row[ch];
      }
    }
  }
  return backbone_.backward(d_fm);
}

template <typename T>
std::vector<Param<T>*> ActionModel<T>::params() {
  std::vector<Param<T>*> out;
  if (config_.backbone.kind == BackboneKind::kTinyConv) backbone_.collect_params(out);
  out.push_back(&type_embed_);
  encoder_.collect_params(out);
  neck_.collect_params(out);
  classifier_.collect_params(out);
  return out;
}

template class ClassifierHead<float>;
template class ClassifierHead<double>;
template class ActionModel<float>;
template class ActionModel<double>;

}  // namespace actionret
