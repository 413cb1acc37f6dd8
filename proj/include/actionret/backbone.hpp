#ifndef ACTIONRET_BACKBONE_HPP
#define ACTIONRET_BACKBONE_HPP

#include <string>
#include <vector>

#include "actionret/geometry.hpp"
#include "actionret/layers.hpp"
#include "actionret/tensor.hpp"

namespace actionret {

// Spatial feature map for one image: [channels, H', W'] plus the pixel
// stride (input_size / H') used to map image boxes onto cells.
template <typename T>
struct FeatureMap {
  Tensor<T> data;
  double stride = 1.0;

  int channels() const { return data.dim(0); }
  int height() const { return data.dim(1); }
  int width() const { return data.dim(2); }
};

enum class BackboneKind { kTinyConv, kExternalAdapter };

struct BackboneConfig {
  BackboneKind kind = BackboneKind::kTinyConv;
  int feature_dim = 2048;
  std::vector<int> stage_channels = {16, 32, 64};  // widths before the final stage
  std::string feature_dir;                         // external_adapter: directory of .fmap files
};

// Strided 3x3 convolution layer with cached input for the backward pass.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, int in_ch, int out_ch, int ksize, int stride, int pad);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& x);  // [B,IC,H,W] -> [B,OC,OH,OW]
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

  Param<T> weight;  // [OC,IC,K,K]
  Param<T> bias;    // [OC]

 private:
  int in_ch_ = 0, out_ch_ = 0, ksize_ = 3, stride_ = 1, pad_ = 0;
  Tensor<T> input_cache_;
};

// Four 3x3 stride-2 stages (total stride 16) with ReLU after each, channel
// widths stage_channels + [feature_dim]. Small enough for CPU training.
template <typename T>
class TinyConvBackbone {
 public:
  TinyConvBackbone() = default;
  explicit TinyConvBackbone(const BackboneConfig& config);

  void init(Rng& rng);

  // [B,3,H,W] -> [B,D,H',W']; throws on channel mismatch.
  Tensor<T> forward(const Tensor<T>& images);
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

  int feature_dim() const { return config_.feature_dim; }
  int total_stride() const { return 16; }

 private:
  BackboneConfig config_;
  std::vector<Conv2d<T>> stages_;
  std::vector<Tensor<T>> activations_;  // post-ReLU outputs per stage
};

// Channel-wise hard max over the cells covered by `box`; coordinates are
// divided by the stride, starts floored, ends ceiled, clamped so at least one
// cell is covered. `argmax` stores the flat spatial index per channel (ties
// resolved by first cell in row-major scan order).
template <typename T>
struct PooledFeature {
  std::vector<T> features;
  std::vector<int> argmax;
};

template <typename T>
PooledFeature<T> roi_pool_with_argmax(const FeatureMap<T>& fm, const BoundingBox& box);

template <typename T>
std::vector<T> roi_pool(const FeatureMap<T>& fm, const BoundingBox& box);

template <typename T>
PooledFeature<T> global_max_pool_with_argmax(const FeatureMap<T>& fm);

template <typename T>
std::vector<T> global_max_pool(const FeatureMap<T>& fm);

// Precomputed feature-map file for the external_adapter backbone kind:
// magic "ARFMAP01", u32 channels, u32 height, u32 width, f32 stride, then
// row-major float32 data.
void save_feature_map_file(const FeatureMap<float>& fm, const std::string& path);
FeatureMap<float> load_feature_map_file(const std::string& path);

}  // namespace actionret

#endif  // ACTIONRET_BACKBONE_HPP
