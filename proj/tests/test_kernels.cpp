#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "actionret/kernels.hpp"
#include "actionret/rng.hpp"

using namespace actionret;

namespace {

std::vector<double> random_vec(size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("matmul: parallel kernel is bit-identical to the serial reference") {
  Rng rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    int m = rng.uniform_int(1, 17), k = rng.uniform_int(1, 23), n = rng.uniform_int(1, 19);
    for (bool ta : {false, true}) {
      for (bool tb : {false, true}) {
        std::vector<double> a = random_vec(static_cast<size_t>(m) * k, rng);
        std::vector<double> b = random_vec(static_cast<size_t>(k) * n, rng);
        std::vector<double> c1(static_cast<size_t>(m) * n, 0.5);
        std::vector<double> c2 = c1;
        kernels::matmul(a.data(), b.data(), c1.data(), m, k, n, ta, tb, true);
        kernels::matmul_serial(a.data(), b.data(), c2.data(), m, k, n, ta, tb, true);
        for (size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == c2[i]);
      }
    }
  }
}

TEST_CASE("matmul: small hand case") {
  // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
  std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8}, c(4, 0.0);
  kernels::matmul(a.data(), b.data(), c.data(), 2, 2, 2);
  CHECK(c[0] == doctest::Approx(19));
  CHECK(c[1] == doctest::Approx(22));
  CHECK(c[2] == doctest::Approx(43));
  CHECK(c[3] == doctest::Approx(50));
}

TEST_CASE("matmul: transpose flags agree with explicit transposition") {
  Rng rng(7);
  int m = 5, k = 4, n = 3;
  std::vector<double> a = random_vec(static_cast<size_t>(m) * k, rng);
  std::vector<double> at(static_cast<size_t>(k) * m);
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) at[static_cast<size_t>(p) * m + i] = a[static_cast<size_t>(i) * k + p];
  }
  std::vector<double> b = random_vec(static_cast<size_t>(k) * n, rng);
  std::vector<double> c1(static_cast<size_t>(m) * n, 0.0), c2 = c1;
  kernels::matmul(a.data(), b.data(), c1.data(), m, k, n, false, false);
  kernels::matmul(at.data(), b.data(), c2.data(), m, k, n, true, false);
  for (size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]));
}

TEST_CASE("conv2d: forward/backward kernels match serial references exactly") {
  Rng rng(23);
  int b = 2, ic = 3, h = 9, w = 7, oc = 4, ks = 3, stride = 2, pad = 1;
  int oh = kernels::conv_out_dim(h, ks, stride, pad);
  int ow = kernels::conv_out_dim(w, ks, stride, pad);
  std::vector<double> in = random_vec(static_cast<size_t>(b) * ic * h * w, rng);
  std::vector<double> wt = random_vec(static_cast<size_t>(oc) * ic * ks * ks, rng);
  std::vector<double> bias = random_vec(static_cast<size_t>(oc), rng);
  std::vector<double> out1(static_cast<size_t>(b) * oc * oh * ow), out2 = out1;
  kernels::conv2d_forward(in.data(), wt.data(), bias.data(), out1.data(), b, ic, h, w, oc, ks,
                          ks, stride, pad);
  kernels::conv2d_forward_serial(in.data(), wt.data(), bias.data(), out2.data(), b, ic, h, w,
                                 oc, ks, ks, stride, pad);
  for (size_t i = 0; i < out1.size(); ++i) CHECK(out1[i] == out2[i]);

  std::vector<double> dout = random_vec(out1.size(), rng);
  std::vector<double> din1(in.size()), din2(in.size());
  kernels::conv2d_backward_input(dout.data(), wt.data(), din1.data(), b, ic, h, w, oc, ks, ks,
                                 stride, pad);
  kernels::conv2d_backward_input_serial(dout.data(), wt.data(), din2.data(), b, ic, h, w, oc,
                                        ks, ks, stride, pad);
  for (size_t i = 0; i < din1.size(); ++i) CHECK(din1[i] == din2[i]);

  std::vector<double> dw1(wt.size(), 0.0), dw2(wt.size(), 0.0);
  std::vector<double> db1(bias.size(), 0.0), db2(bias.size(), 0.0);
  kernels::conv2d_backward_weights(in.data(), dout.data(), dw1.data(), db1.data(), b, ic, h, w,
                                   oc, ks, ks, stride, pad);
  kernels::conv2d_backward_weights_serial(in.data(), dout.data(), dw2.data(), db2.data(), b, ic,
                                          h, w, oc, ks, ks, stride, pad);
  for (size_t i = 0; i < dw1.size(); ++i) CHECK(dw1[i] == dw2[i]);
  for (size_t i = 0; i < db1.size(); ++i) CHECK(db1[i] == db2[i]);
}

TEST_CASE("conv2d: stride-2 pad-1 output geometry") {
  CHECK(kernels::conv_out_dim(64, 3, 2, 1) == 32);
  CHECK(kernels::conv_out_dim(32, 3, 2, 1) == 16);
  CHECK(kernels::conv_out_dim(224, 3, 2, 1) == 112);
}

TEST_CASE("conv2d: center-tap kernel with stride 1 reproduces the input") {
  int h = 4, w = 4;
  std::vector<double> in(static_cast<size_t>(h) * w);
  for (size_t i = 0; i < in.size(); ++i) in[i] = static_cast<double>(i) * 0.25;
  std::vector<double> wt(9, 0.0);
  wt[4] = 1.0;
  std::vector<double> out(in.size(), 0.0);
  kernels::conv2d_forward<double>(in.data(), wt.data(), nullptr, out.data(), 1, 1, h, w, 1, 3, 3,
                                  1, 1);
  for (size_t i = 0; i < in.size(); ++i) CHECK(out[i] == doctest::Approx(in[i]));
}

TEST_CASE("pairwise_sqdist: matches serial reference exactly and brute force") {
  Rng rng(5);
  int m = 13, d = 6;
  std::vector<double> x = random_vec(static_cast<size_t>(m) * d, rng);
  std::vector<double> o1(static_cast<size_t>(m) * m), o2 = o1;
  kernels::pairwise_sqdist(x.data(), o1.data(), m, d);
  kernels::pairwise_sqdist_serial(x.data(), o2.data(), m, d);
  for (size_t i = 0; i < o1.size(); ++i) CHECK(o1[i] == o2[i]);
  for (int i = 0; i < m; ++i) {
    CHECK(o1[static_cast<size_t>(i) * m + i] == 0.0);
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int p = 0; p < d; ++p) {
        double diff = x[static_cast<size_t>(i) * d + p] - x[static_cast<size_t>(j) * d + p];
        acc += diff * diff;
      }
      if (i != j) CHECK(o1[static_cast<size_t>(i) * m + j] == doctest::Approx(acc));
      CHECK(o1[static_cast<size_t>(i) * m + j] ==
            doctest::Approx(o1[static_cast<size_t>(j) * m + i]));
    }
  }
}
