#ifndef ACTIONRET_LAYERS_HPP
#define ACTIONRET_LAYERS_HPP

#include <string>
#include <vector>

#include "actionret/rng.hpp"
#include "actionret/tensor.hpp"

namespace actionret {

// Affine layer y = x * W^T + b over row-major [rows, in] inputs.
// forward caches the input; backward accumulates into the param grads and
// returns the input gradient.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in_dim, int out_dim);

  void init(Rng& rng);  // fan-in scaled uniform weights, zero bias
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

  Param<T> weight;  // [out, in]
  Param<T> bias;    // [out]

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  Tensor<T> input_cache_;
};

// Per-row normalization over the last dimension of [rows, dim].
template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim, double eps = 1e-5);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

  Param<T> gamma;  // [dim]
  Param<T> beta;   // [dim]

 private:
  int dim_ = 0;
  double eps_ = 1e-5;
  Tensor<T> xhat_cache_;  // [rows, dim]
  std::vector<T> rstd_cache_;
};

// Inverted dropout; identity when rate == 0 or in eval mode.
template <typename T>
class Dropout {
 public:
  explicit Dropout(double rate = 0.0) : rate_(rate) {}

  Tensor<T> forward(const Tensor<T>& x, bool train, Rng& rng);
  Tensor<T> backward(const Tensor<T>& d_out);

 private:
  double rate_ = 0.0;
  bool active_ = false;
  Tensor<T> mask_;
};

template <typename T>
void relu_inplace(Tensor<T>& x);

// d_pre = d_out where activated output > 0
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& activated, const Tensor<T>& d_out);

}  // namespace actionret

#endif  // ACTIONRET_LAYERS_HPP
