#include "actionret/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "actionret/kernels.hpp"

namespace actionret {

template <typename T>
Linear<T>::Linear(const std::string& name, int in_dim, int out_dim)
    : weight(name + ".weight", {out_dim, in_dim}, true),
      bias(name + ".bias", {out_dim}, false),
      in_dim_(in_dim),
      out_dim_(out_dim) {}

template <typename T>
void Linear<T>::init(Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(in_dim_));
  for (auto& v : weight.value.data) v = static_cast<T>(rng.uniform(-bound, bound));
  bias.value.zero();
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) {
  if (x.ndim() != 2 || x.dim(1) != in_dim_) {
    throw std::invalid_argument("Linear: input shape mismatch " + x.shape_str());
  }
  input_cache_ = x;
  int rows = x.dim(0);
  Tensor<T> y({rows, out_dim_});
  kernels::matmul(x.ptr(), weight.value.ptr(), y.ptr(), rows, in_dim_, out_dim_,
                  false, true, false);
  const T* b = bias.value.ptr();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    T* row = y.ptr() + static_cast<int64_t>(r) * out_dim_;
    for (int j = 0; j < out_dim_; ++j) row[j] += b[j];
  }
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& d_out) {
  int rows = input_cache_.dim(0);
  if (d_out.ndim() != 2 || d_out.dim(0) != rows || d_out.dim(1) != out_dim_) {
    throw std::invalid_argument("Linear: grad shape mismatch");
  }
  // dW += d_out^T * x
  kernels::matmul(d_out.ptr(), input_cache_.ptr(), weight.grad.ptr(), out_dim_, rows,
                  in_dim_, true, false, true);
  // db += column sums (each output column owned by one iteration)
  T* db = bias.grad.ptr();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < out_dim_; ++j) {
    T acc = T(0);
    for (int r = 0; r < rows; ++r) acc += d_out.ptr()[static_cast<int64_t>(r) * out_dim_ + j];
    db[j] += acc;
  }
  Tensor<T> d_in({rows, in_dim_});
  kernels::matmul(d_out.ptr(), weight.value.ptr(), d_in.ptr(), rows, out_dim_, in_dim_,
                  false, false, false);
  return d_in;
}

template <typename T>
void Linear<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

template <typename T>
LayerNorm<T>::LayerNorm(const std::string& name, int dim, double eps)
    : gamma(name + ".gamma", {dim}, false), beta(name + ".beta", {dim}, false),
      dim_(dim), eps_(eps) {
  gamma.value.fill(T(1));
}

template <typename T>
Tensor<T> LayerNorm<T>::forward(const Tensor<T>& x) {
  if (x.ndim() != 2 || x.dim(1) != dim_) {
    throw std::invalid_argument("LayerNorm: input shape mismatch");
  }
  int rows = x.dim(0);
  xhat_cache_ = Tensor<T>({rows, dim_});
  rstd_cache_.assign(static_cast<size_t>(rows), T(0));
  Tensor<T> y({rows, dim_});
  const T* g = gamma.value.ptr();
  const T* b = beta.value.ptr();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* xr = x.ptr() + static_cast<int64_t>(r) * dim_;
    T* hr = xhat_cache_.ptr() + static_cast<int64_t>(r) * dim_;
    T* yr = y.ptr() + static_cast<int64_t>(r) * dim_;
    T mean = T(0);
    for (int j = 0; j < dim_; ++j) mean += xr[j];
    mean /= static_cast<T>(dim_);
    T var = T(0);
    for (int j = 0; j < dim_; ++j) {
      T d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(dim_);
    T rstd = T(1) / std::sqrt(var + static_cast<T>(eps_));
    rstd_cache_[static_cast<size_t>(r)] = rstd;
    for (int j = 0; j < dim_; ++j) {
      T h = (xr[j] - mean) * rstd;
      hr[j] = h;
      yr[j] = g[j] * h + b[j];
    }
  }
  return y;
}

template <typename T>
Tensor<T> LayerNorm<T>::backward(const Tensor<T>& d_out) {
  int rows = xhat_cache_.dim(0);
  Tensor<T> d_in({rows, dim_});
  const T* g = gamma.value.ptr();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* dr = d_out.ptr() + static_cast<int64_t>(r) * dim_;
    const T* hr = xhat_cache_.ptr() + static_cast<int64_t>(r) * dim_;
    T* ir = d_in.ptr() + static_cast<int64_t>(r) * dim_;
    T rstd = rstd_cache_[static_cast<size_t>(r)];
    T sum_dh = T(0), sum_dhh = T(0);
    for (int j = 0; j < dim_; ++j) {
      T dh = dr[j] * g[j];
      sum_dh += dh;
      sum_dhh += dh * hr[j];
    }
    T inv_n = T(1) / static_cast<T>(dim_);
    for (int j = 0; j < dim_; ++j) {
      T dh = dr[j] * g[j];
      ir[j] = rstd * (dh - sum_dh * inv_n - hr[j] * sum_dhh * inv_n);
    }
  }
  T* dg = gamma.grad.ptr();
  T* db = beta.grad.ptr();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < dim_; ++j) {
    T accg = T(0), accb = T(0);
    for (int r = 0; r < rows; ++r) {
      int64_t off = static_cast<int64_t>(r) * dim_ + j;
      accg += d_out.ptr()[off] * xhat_cache_.ptr()[off];
      accb += d_out.ptr()[off];
    }
    dg[j] += accg;
    db[j] += accb;
  }
  return d_in;
}

template <typename T>
void LayerNorm<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, bool train, Rng& rng) {
  active_ = train && rate_ > 0.0;
  if (!active_) return x;
  mask_ = Tensor<T>(x.shape);
  T scale = static_cast<T>(1.0 / (1.0 - rate_));
  for (int64_t i = 0; i < x.size(); ++i) {
    mask_[i] = (rng.uniform() < rate_) ? T(0) : scale;
  }
  Tensor<T> y(x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask_[i];
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& d_out) {
  if (!active_) return d_out;
  Tensor<T> d_in(d_out.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < d_out.size(); ++i) d_in[i] = d_out[i] * mask_[i];
  return d_in;
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) {
    if (x[i] < T(0)) x[i] = T(0);
  }
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& activated, const Tensor<T>& d_out) {
  Tensor<T> d_in(d_out.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < d_out.size(); ++i) {
    d_in[i] = activated[i] > T(0) ? d_out[i] : T(0);
  }
  return d_in;
}

template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;
template class Dropout<float>;
template class Dropout<double>;
template void relu_inplace<float>(Tensor<float>&);
template void relu_inplace<double>(Tensor<double>&);
template Tensor<float> relu_backward<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> relu_backward<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace actionret
