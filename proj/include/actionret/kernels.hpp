#ifndef ACTIONRET_KERNELS_HPP
#define ACTIONRET_KERNELS_HPP

#include <cstdint>

namespace actionret::kernels {

// Hot numeric loops, OpenMP-parallelized over disjoint output elements.
// Every parallel kernel keeps the per-element accumulation order identical to
// its *_serial reference, so results are bit-identical for any thread count.
// The serial variants are retained as test oracles and benchmark baselines.

// C[M,N] = op(A) * op(B) (+= when accumulate).
// A is [M,K] or, when trans_a, [K,M]; B is [K,N] or, when trans_b, [N,K].
template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int k, int n,
            bool trans_a = false, bool trans_b = false, bool accumulate = false);
template <typename T>
void matmul_serial(const T* a, const T* b, T* c, int m, int k, int n,
                   bool trans_a = false, bool trans_b = false, bool accumulate = false);

// 2-D convolution, NCHW, square kernel.
// in [B,IC,H,W], w [OC,IC,KH,KW], bias [OC] (nullable), out [B,OC,OH,OW].
template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out,
                    int b, int ic, int h, int wd, int oc, int kh, int kw,
                    int stride, int pad);
template <typename T>
void conv2d_forward_serial(const T* in, const T* w, const T* bias, T* out,
                           int b, int ic, int h, int wd, int oc, int kh, int kw,
                           int stride, int pad);

// Gather-formulated input gradient: each d_in element sums its own taps.
template <typename T>
void conv2d_backward_input(const T* d_out, const T* w, T* d_in,
                           int b, int ic, int h, int wd, int oc, int kh, int kw,
                           int stride, int pad);
template <typename T>
void conv2d_backward_input_serial(const T* d_out, const T* w, T* d_in,
                                  int b, int ic, int h, int wd, int oc, int kh, int kw,
                                  int stride, int pad);

// d_w[oc,ic,ky,kx] += sum over batch and output positions; d_bias likewise.
template <typename T>
void conv2d_backward_weights(const T* in, const T* d_out, T* d_w, T* d_bias,
                             int b, int ic, int h, int wd, int oc, int kh, int kw,
                             int stride, int pad);
template <typename T>
void conv2d_backward_weights_serial(const T* in, const T* d_out, T* d_w, T* d_bias,
                                    int b, int ic, int h, int wd, int oc, int kh, int kw,
                                    int stride, int pad);

// Squared Euclidean distances between rows of X [M,D] -> out [M,M].
template <typename T>
void pairwise_sqdist(const T* x, T* out, int m, int d);
template <typename T>
void pairwise_sqdist_serial(const T* x, T* out, int m, int d);

inline int conv_out_dim(int in_dim, int k, int stride, int pad) {
  return (in_dim + 2 * pad - k) / stride + 1;
}

}  // namespace actionret::kernels

#endif  // ACTIONRET_KERNELS_HPP
