#include "actionret/kernels.hpp"

#include <omp.h>

namespace actionret::kernels {

namespace {

template <typename T>
inline T matmul_cell(const T* a, const T* b, int m_i, int n_j, int m, int k, int n,
                     bool trans_a, bool trans_b) {
  T acc = T(0);
  for (int p = 0; p < k; ++p) {
    T av = trans_a ? a[static_cast<int64_t>(p) * m + m_i]
                   : a[static_cast<int64_t>(m_i) * k + p];
    T bv = trans_b ? b[static_cast<int64_t>(n_j) * k + p]
                   : b[static_cast<int64_t>(p) * n + n_j];
    acc += av * bv;
  }
  return acc;
}

template <typename T>
inline T conv_cell(const T* in, const T* w, const T* bias,
                   int bi, int oci, int oy, int ox,
                   int ic, int h, int wd, int kh, int kw, int stride, int pad) {
  T acc = bias ? bias[oci] : T(0);
  for (int ci = 0; ci < ic; ++ci) {
    for (int ky = 0; ky < kh; ++ky) {
      int iy = oy * stride + ky - pad;
      if (iy < 0 || iy >= h) continue;
      for (int kx = 0; kx < kw; ++kx) {
        int ix = ox * stride + kx - pad;
        if (ix < 0 || ix >= wd) continue;
        acc += in[((static_cast<int64_t>(bi) * ic + ci) * h + iy) * wd + ix] *
               w[((static_cast<int64_t>(oci) * ic + ci) * kh + ky) * kw + kx];
      }
    }
  }
  return acc;
}

template <typename T>
inline T conv_input_grad_cell(const T* d_out, const T* w,
                              int bi, int ci, int iy, int ix,
                              int ic, int oc, int oh, int ow,
                              int kh, int kw, int stride, int pad) {
  T acc = T(0);
  for (int oci = 0; oci < oc; ++oci) {
    for (int ky = 0; ky < kh; ++ky) {
      int num_y = iy + pad - ky;
      if (num_y < 0 || num_y % stride != 0) continue;
      int oy = num_y / stride;
      if (oy >= oh) continue;
      for (int kx = 0; kx < kw; ++kx) {
        int num_x = ix + pad - kx;
        if (num_x < 0 || num_x % stride != 0) continue;
        int ox = num_x / stride;
        if (ox >= ow) continue;
        acc += d_out[((static_cast<int64_t>(bi) * oc + oci) * oh + oy) * ow + ox] *
               w[((static_cast<int64_t>(oci) * ic + ci) * kh + ky) * kw + kx];
      }
    }
  }
  return acc;
}

template <typename T>
inline T conv_weight_grad_cell(const T* in, const T* d_out,
                               int oci, int ci, int ky, int kx,
                               int b, int ic, int h, int wd, int oc,
                               int oh, int ow, int stride, int pad) {
  T acc = T(0);
  for (int bi = 0; bi < b; ++bi) {
    for (int oy = 0; oy < oh; ++oy) {
      int iy = oy * stride + ky - pad;
      if (iy < 0 || iy >= h) continue;
      for (int ox = 0; ox < ow; ++ox) {
        int ix = ox * stride + kx - pad;
        if (ix < 0 || ix >= wd) continue;
        acc += d_out[((static_cast<int64_t>(bi) * oc + oci) * oh + oy) * ow + ox] *
               in[((static_cast<int64_t>(bi) * ic + ci) * h + iy) * wd + ix];
      }
    }
  }
  return acc;
}

template <typename T>
inline T sqdist_cell(const T* x, int i, int j, int d) {
  const T* xi = x + static_cast<int64_t>(i) * d;
  const T* xj = x + static_cast<int64_t>(j) * d;
  T acc = T(0);
  for (int p = 0; p < d; ++p) {
    T diff = xi[p] - xj[p];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int k, int n,
            bool trans_a, bool trans_b, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T v = matmul_cell(a, b, i, j, m, k, n, trans_a, trans_b);
      int64_t off = static_cast<int64_t>(i) * n + j;
      c[off] = accumulate ? c[off] + v : v;
    }
  }
}

template <typename T>
void matmul_serial(const T* a, const T* b, T* c, int m, int k, int n,
                   bool trans_a, bool trans_b, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T v = matmul_cell(a, b, i, j, m, k, n, trans_a, trans_b);
      int64_t off = static_cast<int64_t>(i) * n + j;
      c[off] = accumulate ? c[off] + v : v;
    }
  }
}

template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out,
                    int b, int ic, int h, int wd, int oc, int kh, int kw,
                    int stride, int pad) {
  int oh = conv_out_dim(h, kh, stride, pad);
  int ow = conv_out_dim(wd, kw, stride, pad);
#pragma omp parallel for collapse(2) schedule(static)
  for (int bi = 0; bi < b; ++bi) {
    for (int oci = 0; oci < oc; ++oci) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          out[((static_cast<int64_t>(bi) * oc + oci) * oh + oy) * ow + ox] =
              conv_cell(in, w, bias, bi, oci, oy, ox, ic, h, wd, kh, kw, stride, pad);
        }
      }
    }
  }
}

template <typename T>
void conv2d_forward_serial(const T* in, const T* w, const T* bias, T* out,
                           int b, int ic, int h, int wd, int oc, int kh, int kw,
                           int stride, int pad) {
  int oh = conv_out_dim(h, kh, stride, pad);
  int ow = conv_out_dim(wd, kw, stride, pad);
  for (int bi = 0; bi < b; ++bi) {
    for (int oci = 0; oci < oc; ++oci) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          out[((static_cast<int64_t>(bi) * oc + oci) * oh + oy) * ow + ox] =
              conv_cell(in, w, bias, bi, oci, oy, ox, ic, h, wd, kh, kw, stride, pad);
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const T* d_out, const T* w, T* d_in,
                           int b, int ic, int h, int wd, int oc, int kh, int kw,
                           int stride, int pad) {
  int oh = conv_out_dim(h, kh, stride, pad);
  int ow = conv_out_dim(wd, kw, stride, pad);
#pragma omp parallel for collapse(2) schedule(static)
  for (int bi = 0; bi < b; ++bi) {
    for (int ci = 0; ci < ic; ++ci) {
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < wd; ++ix) {
          d_in[((static_cast<int64_t>(bi) * ic + ci) * h + iy) * wd + ix] =
              conv_input_grad_cell(d_out, w, bi, ci, iy, ix, ic, oc, oh, ow, kh, kw, stride, pad);
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input_serial(const T* d_out, const T* w, T* d_in,
                                  int b, int ic, int h, int wd, int oc, int kh, int kw,
                                  int stride, int pad) {
  int oh = conv_out_dim(h, kh, stride, pad);
  int ow = conv_out_dim(wd, kw, stride, pad);
  for (int bi = 0; bi < b; ++bi) {
    for (int ci = 0; ci < ic; ++ci) {
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < wd; ++ix) {
          d_in[((static_cast<int64_t>(bi) * ic + ci) * h + iy) * wd + ix] =
              conv_input_grad_cell(d_out, w, bi, ci, iy, ix, ic, oc, oh, ow, kh, kw, stride, pad);
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weights(const T* in, const T* d_out, T* d_w, T* d_bias,
                             int b, int ic, int h, int wd, int oc, int kh, int kw,
                             int stride, int pad) {
  int oh = conv_out_dim(h, kh, stride, pad);
  int ow = conv_out_dim(wd, kw, stride, pad);
#pragma omp parallel for collapse(2) schedule(static)
  for (int oci = 0; oci < oc; ++oci) {
    for (int ci = 0; ci < ic; ++ci) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          d_w[((static_cast<int64_t>(oci) * ic + ci) * kh + ky) * kw + kx] +=
              conv_weight_grad_cell(in, d_out, oci, ci, ky, kx, b, ic, h, wd, oc, oh, ow, stride, pad);
        }
      }
    }
  }
  if (d_bias) {
#pragma omp parallel for schedule(static)
    for (int oci = 0; oci < oc; ++oci) {
      T acc = T(0);
      for (int bi = 0; bi < b; ++bi) {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            acc += d_out[((static_cast<int64_t>(bi) * oc + oci) * oh + oy) * ow + ox];
          }
        }
      }
      d_bias[oci] += acc;
    }
  }
}

template <typename T>
void conv2d_backward_weights_serial(const T* in, const T* d_out, T* d_w, T* d_bias,
                                    int b, int ic, int h, int wd, int oc, int kh, int kw,
                                    int stride, int pad) {
  int oh = conv_out_dim(h, kh, stride, pad);
  int ow = conv_out_dim(wd, kw, stride, pad);
  for (int oci = 0; oci < oc; ++oci) {
    for (int ci = 0; ci < ic; ++ci) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          d_w[((static_cast<int64_t>(oci) * ic + ci) * kh + ky) * kw + kx] +=
              conv_weight_grad_cell(in, d_out, oci, ci, ky, kx, b, ic, h, wd, oc, oh, ow, stride, pad);
        }
      }
    }
  }
  if (d_bias) {
    for (int oci = 0; oci < oc; ++oci) {
      T acc = T(0);
      for (int bi = 0; bi < b; ++bi) {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            acc += d_out[((static_cast<int64_t>(bi) * oc + oci) * oh + oy) * ow + ox];
          }
        }
      }
      d_bias[oci] += acc;
    }
  }
}

template <typename T>
void pairwise_sqdist(const T* x, T* out, int m, int d) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      out[static_cast<int64_t>(i) * m + j] = (i == j) ? T(0) : sqdist_cell(x, i, j, d);
    }
  }
}

template <typename T>
void pairwise_sqdist_serial(const T* x, T* out, int m, int d) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      out[static_cast<int64_t>(i) * m + j] = (i == j) ? T(0) : sqdist_cell(x, i, j, d);
    }
  }
}

#define ACTIONRET_INSTANTIATE_KERNELS(T)                                                        \
  template void matmul<T>(const T*, const T*, T*, int, int, int, bool, bool, bool);             \
  template void matmul_serial<T>(const T*, const T*, T*, int, int, int, bool, bool, bool);      \
  template void conv2d_forward<T>(const T*, const T*, const T*, T*, int, int, int, int, int,    \
                                  int, int, int, int);                                          \
  template void conv2d_forward_serial<T>(const T*, const T*, const T*, T*, int, int, int, int,  \
                                         int, int, int, int, int);                              \
  template void conv2d_backward_input<T>(const T*, const T*, T*, int, int, int, int, int, int,  \
                                         int, int, int);                                        \
  template void conv2d_backward_input_serial<T>(const T*, const T*, T*, int, int, int, int,     \
                                                int, int, int, int, int);                       \
  template void conv2d_backward_weights<T>(const T*, const T*, T*, T*, int, int, int, int, int, \
                                           int, int, int, int);                                 \
  template void conv2d_backward_weights_serial<T>(const T*, const T*, T*, T*, int, int, int,    \
                                                  int, int, int, int, int, int);                \
  template void pairwise_sqdist<T>(const T*, T*, int, int);                                     \
  template void pairwise_sqdist_serial<T>(const T*, T*, int, int);

ACTIONRET_INSTANTIATE_KERNELS(float)
ACTIONRET_INSTANTIATE_KERNELS(double)

#undef ACTIONRET_INSTANTIATE_KERNELS

}  // namespace actionret::kernels
