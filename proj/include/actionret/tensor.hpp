#ifndef ACTIONRET_TENSOR_HPP
#define ACTIONRET_TENSOR_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace actionret {

// Dense row-major tensor. Shapes are small (<= 4 dims in practice), data is
// contiguous, and all indexing helpers are inline so hot loops can stay flat.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(count(shape)), T(0));
  }
  Tensor(std::vector<int> s, T fill_value) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(count(shape)), fill_value);
  }

  static int64_t count(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  bool empty() const { return data.empty(); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(T(0)); }

  T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  // Flat offsets for the common ranks.
  int64_t idx2(int i, int j) const {
    return static_cast<int64_t>(i) * shape[1] + j;
  }
  int64_t idx3(int i, int j, int k) const {
    return (static_cast<int64_t>(i) * shape[1] + j) * shape[2] + k;
  }
  int64_t idx4(int i, int j, int k, int l) const {
    return ((static_cast<int64_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l;
  }

  T& at2(int i, int j) { return data[static_cast<size_t>(idx2(i, j))]; }
  const T& at2(int i, int j) const { return data[static_cast<size_t>(idx2(i, j))]; }
  T& at3(int i, int j, int k) { return data[static_cast<size_t>(idx3(i, j, k))]; }
  const T& at3(int i, int j, int k) const { return data[static_cast<size_t>(idx3(i, j, k))]; }
  T& at4(int i, int j, int k, int l) { return data[static_cast<size_t>(idx4(i, j, k, l))]; }
  const T& at4(int i, int j, int k, int l) const { return data[static_cast<size_t>(idx4(i, j, k, l))]; }

  bool same_shape(const Tensor<T>& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

template <typename T>
bool all_finite(const Tensor<T>& t) {
  for (T v : t.data) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

// Named trainable (or tracked) array together with its gradient buffer.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool weight_decay = true;  // matrices decay, biases/norm scales do not
  bool trainable = true;     // running statistics are tracked but not optimized

  Param() = default;
  Param(std::string n, std::vector<int> shape, bool decay = true, bool train = true)
      : name(std::move(n)), value(shape), grad(shape), weight_decay(decay), trainable(train) {}

  void zero_grad() { grad.zero(); }
};

}  // namespace actionret

#endif  // ACTIONRET_TENSOR_HPP
