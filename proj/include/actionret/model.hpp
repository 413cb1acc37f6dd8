#ifndef ACTIONRET_MODEL_HPP
#define ACTIONRET_MODEL_HPP

#include <string>
#include <vector>

#include "actionret/backbone.hpp"
#include "actionret/fusion.hpp"
#include "actionret/geometry.hpp"

namespace actionret {

struct ModelConfig {
  BackboneConfig backbone;
  FusionConfig fusion;
  int n_classes = 2;
  int classifier_hidden = 0;  // 0 -> feature_dim / 2
  int input_size = 224;
  double confidence_threshold = 0.5;
  bool use_anchored = true;
  bool use_global = true;
  bool use_contextual = true;
  // When set, proposals nearly duplicating the person box (IoU above
  // person_overlap_iou) are dropped before contextual ranking.
  bool exclude_person_proposals = false;
  double person_overlap_iou = 0.9;

  int token_count() const {
    return (use_anchored ? 1 : 0) + (use_global ? 1 : 0) +
           (use_contextual ? fusion.num_contextual : 0);
  }
  void validate() const;
};

// Two affine layers with a ReLU between: D -> hidden -> n_classes.
template <typename T>
class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(int in_dim, int hidden, int n_classes);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& x);  // [B,D] -> [B,n] logits
  Tensor<T> backward(const Tensor<T>& d_logits);
  void collect_params(std::vector<Param<T>*>& out);

  int n_classes() const { return n_classes_; }

 private:
  Linear<T> lin1_, lin2_;
  Tensor<T> hidden_act_;
  int n_classes_ = 0;
};

// The full pipeline: backbone feature map, region pooling into tokens,
// fusion transformer, BN-neck, classifier head.
template <typename T>
class ActionModel {
 public:
  struct BatchInput {
    Tensor<T> images;  // [B,3,input,input]
    std::vector<BoundingBox> person_boxes;
    std::vector<ProposalSet> proposals;
    std::vector<std::string> image_ids;  // required for the external adapter backbone
  };
  struct Output {
    Tensor<T> embeddings;  // [B,D], post BN-neck
    Tensor<T> logits;      // [B,n]
  };

  ActionModel(const ModelConfig& config, uint64_t seed);

  Output forward(const BatchInput& input, bool train, Rng& rng);
  // Returns the image gradient (empty tensor for the external adapter kind).
  Tensor<T> backward(const Tensor<T>& d_logits);
  // Backward from an embedding gradient in addition to the logits path.
  Tensor<T> backward(const Tensor<T>& d_logits, const Tensor<T>& d_embeddings);

  std::vector<Param<T>*> params();

  const ModelConfig& config() const { return config_; }
  FusionEncoder<T>& fusion_encoder() { return encoder_; }
  BnNeck<T>& bn_neck() { return neck_; }
  TinyConvBackbone<T>& backbone() { return backbone_; }
  ClassifierHead<T>& classifier() { return classifier_; }
  Param<T>& type_embeddings() { return type_embed_; }

 private:
  FeatureMap<T> feature_map_for(const Tensor<T>& fm_batch, int b) const;

  ModelConfig config_;
  TinyConvBackbone<T> backbone_;
  Param<T> type_embed_;  // [3, D]
  FusionEncoder<T> encoder_;
  BnNeck<T> neck_;
  ClassifierHead<T> classifier_;

  // forward caches for the backward pass
  int batch_ = 0;
  int fm_h_ = 0, fm_w_ = 0;
  std::vector<Aspect> tags_;
  std::vector<std::vector<std::vector<int>>> argmax_;  // [B][token][channel] -> cell
};

}  // namespace actionret

#endif  // ACTIONRET_MODEL_HPP
