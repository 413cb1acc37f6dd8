#include "actionret/backbone.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "actionret/kernels.hpp"

namespace actionret {

template <typename T>
Conv2d<T>::Conv2d(const std::string& name, int in_ch, int out_ch, int ksize, int stride, int pad)
    : weight(name + ".weight", {out_ch, in_ch, ksize, ksize}, true),
      bias(name + ".bias", {out_ch}, false),
      in_ch_(in_ch), out_ch_(out_ch), ksize_(ksize), stride_(stride), pad_(pad) {}

template <typename T>
void Conv2d<T>::init(Rng& rng) {
  double fan_in = static_cast<double>(in_ch_) * ksize_ * ksize_;
  double bound = 1.0 / std::sqrt(fan_in);
  for (auto& v : weight.value.data) v = static_cast<T>(rng.uniform(-bound, bound));
  bias.value.zero();
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
  if (x.ndim() != 4 || x.dim(1) != in_ch_) {
    throw std::invalid_argument("Conv2d: input shape mismatch " + x.shape_str());
  }
  input_cache_ = x;
  int b = x.dim(0), h = x.dim(2), w = x.dim(3);
  int oh = kernels::conv_out_dim(h, ksize_, stride_, pad_);
  int ow = kernels::conv_out_dim(w, ksize_, stride_, pad_);
  if (oh < 1 || ow < 1) throw std::invalid_argument("Conv2d: input too small");
  Tensor<T> y({b, out_ch_, oh, ow});
  kernels::conv2d_forward(x.ptr(), weight.value.ptr(), bias.value.ptr(), y.ptr(),
                          b, in_ch_, h, w, out_ch_, ksize_, ksize_, stride_, pad_);
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& d_out) {
  int b = input_cache_.dim(0), h = input_cache_.dim(2), w = input_cache_.dim(3);
  kernels::conv2d_backward_weights(input_cache_.ptr(), d_out.ptr(), weight.grad.ptr(),
                                   bias.grad.ptr(), b, in_ch_, h, w, out_ch_, ksize_,
                                   ksize_, stride_, pad_);
  Tensor<T> d_in(input_cache_.shape);
  kernels::conv2d_backward_input(d_out.ptr(), weight.value.ptr(), d_in.ptr(),
                                 b, in_ch_, h, w, out_ch_, ksize_, ksize_, stride_, pad_);
  return d_in;
}

template <typename T>
void Conv2d<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

template <typename T>
TinyConvBackbone<T>::TinyConvBackbone(const BackboneConfig& config) : config_(config) {
  if (config_.stage_channels.size() != 3) {
    throw std::invalid_argument("TinyConvBackbone: expected 3 stage widths plus feature_dim");
  }
  std::vector<int> widths = config_.stage_channels;
  widths.push_back(config_.feature_dim);
  int in_ch = 3;
  for (size_t i = 0; i < widths.size(); ++i) {
    stages_.emplace_back("backbone.conv" + std::to_string(i), in_ch, widths[i], 3, 2, 1);
    in_ch = widths[i];
  }
}

template <typename T>
void TinyConvBackbone<T>::init(Rng& rng) {
  for (auto& s : stages_) s.init(rng);
}

template <typename T>
Tensor<T> TinyConvBackbone<T>::forward(const Tensor<T>& images) {
  if (images.ndim() != 4 || images.dim(1) != 3) {
    throw std::invalid_argument("TinyConvBackbone: expected [B,3,H,W] input, got " +
                                images.shape_str());
  }
  activations_.clear();
  Tensor<T> x = images;
  for (auto& stage : stages_) {
    x = stage.forward(x);
    relu_inplace(x);
    activations_.push_back(x);
  }
  return x;
}

template <typename T>
Tensor<T> TinyConvBackbone<T>::backward(const Tensor<T>& d_out) {
  Tensor<T> g = d_out;
  for (size_t i = stages_.size(); i-- > 0;) {
    g = relu_backward(activations_[i], g);
    g = stages_[i].backward(g);
  }
  return g;
}

template <typename T>
void TinyConvBackbone<T>::collect_params(std::vector<Param<T>*>& out) {
  for (auto& s : stages_) s.collect_params(out);
}

namespace {

struct CellRange {
  int x0, x1, y0, y1;  // end-exclusive
};

// floor/ceil mapping with the >=1-cell clamp, so thin boxes stay non-empty.
CellRange box_to_cells(const BoundingBox& box, double stride, int fw, int fh) {
  int x0 = static_cast<int>(std::floor(box.x_min / stride));
  int x1 = static_cast<int>(std::ceil(box.x_max / stride));
  int y0 = static_cast<int>(std::floor(box.y_min / stride));
  int y1 = static_cast<int>(std::ceil(box.y_max / stride));
  x0 = std::clamp(x0, 0, fw - 1);
  y0 = std::clamp(y0, 0, fh - 1);
  x1 = std::clamp(x1, x0 + 1, fw);
  y1 = std::clamp(y1, y0 + 1, fh);
  return CellRange{x0, x1, y0, y1};
}

}  // namespace

template <typename T>
PooledFeature<T> roi_pool_with_argmax(const FeatureMap<T>& fm, const BoundingBox& box) {
  if (!box.valid()) throw std::invalid_argument("roi_pool: invalid box");
  int c = fm.channels(), fh = fm.height(), fw = fm.width();
  CellRange r = box_to_cells(box, fm.stride, fw, fh);
  PooledFeature<T> out;
  out.features.assign(static_cast<size_t>(c), T(0));
  out.argmax.assign(static_cast<size_t>(c), 0);
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const T* plane = fm.data.ptr() + static_cast<int64_t>(ch) * fh * fw;
    T best = plane[static_cast<int64_t>(r.y0) * fw + r.x0];
    int best_idx = r.y0 * fw + r.x0;
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        T v = plane[static_cast<int64_t>(y) * fw + x];
        if (v > best) {
          best = v;
          best_idx = y * fw + x;
        }
      }
    }
    out.features[static_cast<size_t>(ch)] = best;
    out.argmax[static_cast<size_t>(ch)] = best_idx;
  }
  return out;
}

template <typename T>
std::vector<T> roi_pool(const FeatureMap<T>& fm, const BoundingBox& box) {
  return roi_pool_with_argmax(fm, box).features;
}

template <typename T>
PooledFeature<T> global_max_pool_with_argmax(const FeatureMap<T>& fm) {
  BoundingBox full(0.0, 0.0, fm.width() * fm.stride, fm.height() * fm.stride);
  return roi_pool_with_argmax(fm, full);
}

template <typename T>
std::vector<T> global_max_pool(const FeatureMap<T>& fm) {
  return global_max_pool_with_argmax(fm).features;
}

namespace {
constexpr char kFmapMagic[8] = {'A', 'R', 'F', 'M', 'A', 'P', '0', '1'};
}

void save_feature_map_file(const FeatureMap<float>& fm, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_feature_map_file: cannot open " + path);
  f.write(kFmapMagic, 8);
  uint32_t c = static_cast<uint32_t>(fm.channels());
  uint32_t h = static_cast<uint32_t>(fm.height());
  uint32_t w = static_cast<uint32_t>(fm.width());
  float stride = static_cast<float>(fm.stride);
  f.write(reinterpret_cast<const char*>(&c), 4);
  f.write(reinterpret_cast<const char*>(&h), 4);
  f.write(reinterpret_cast<const char*>(&w), 4);
  f.write(reinterpret_cast<const char*>(&stride), 4);
  f.write(reinterpret_cast<const char*>(fm.data.ptr()),
          static_cast<std::streamsize>(fm.data.size() * sizeof(float)));
  if (!f) throw std::runtime_error("save_feature_map_file: write failed for " + path);
}

FeatureMap<float> load_feature_map_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_feature_map_file: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (f.gcount() != 8 || std::memcmp(magic, kFmapMagic, 8) != 0) {
    throw std::runtime_error("load_feature_map_file: bad magic in " + path);
  }
  uint32_t c = 0, h = 0, w = 0;
  float stride = 0.0f;
  f.read(reinterpret_cast<char*>(&c), 4);
  f.read(reinterpret_cast<char*>(&h), 4);
  f.read(reinterpret_cast<char*>(&w), 4);
  f.read(reinterpret_cast<char*>(&stride), 4);
  if (!f || c == 0 || h == 0 || w == 0 || stride <= 0.0f) {
    throw std::runtime_error("load_feature_map_file: bad header in " + path);
  }
  FeatureMap<float> fm;
  fm.stride = stride;
  fm.data = Tensor<float>({static_cast<int>(c), static_cast<int>(h), static_cast<int>(w)});
  f.read(reinterpret_cast<char*>(fm.data.ptr()),
         static_cast<std::streamsize>(fm.data.size() * sizeof(float)));
  if (f.gcount() != static_cast<std::streamsize>(fm.data.size() * sizeof(float))) {
    throw std::runtime_error("load_feature_map_file: truncated data in " + path);
  }
  return fm;
}

template class Conv2d<float>;
template class Conv2d<double>;
template class TinyConvBackbone<float>;
template class TinyConvBackbone<double>;
template struct PooledFeature<float>;
template struct PooledFeature<double>;
template PooledFeature<float> roi_pool_with_argmax<float>(const FeatureMap<float>&, const BoundingBox&);
template PooledFeature<double> roi_pool_with_argmax<double>(const FeatureMap<double>&, const BoundingBox&);
template std::vector<float> roi_pool<float>(const FeatureMap<float>&, const BoundingBox&);
template std::vector<double> roi_pool<double>(const FeatureMap<double>&, const BoundingBox&);
template PooledFeature<float> global_max_pool_with_argmax<float>(const FeatureMap<float>&);
template PooledFeature<double> global_max_pool_with_argmax<double>(const FeatureMap<double>&);
template std::vector<float> global_max_pool<float>(const FeatureMap<float>&);
template std::vector<double> global_max_pool<double>(const FeatureMap<double>&);

}  // namespace actionret
