// Benchmarks the OpenMP kernels against their serial references.
// Thread count follows OMP_NUM_THREADS.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "actionret/kernels.hpp"
#include "actionret/rng.hpp"

using namespace actionret;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-28s serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng(1);

  {
    const int m = 256, k = 256, n = 256;
    std::vector<float> a(static_cast<size_t>(m) * k), b(static_cast<size_t>(k) * n),
        c(static_cast<size_t>(m) * n);
    for (auto& v : a) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : b) v = static_cast<float>(rng.uniform(-1, 1));
    double s = time_ms([&] { kernels::matmul_serial(a.data(), b.data(), c.data(), m, k, n); }, 3);
    double p = time_ms([&] { kernels::matmul(a.data(), b.data(), c.data(), m, k, n); }, 3);
    report("matmul 256x256x256", s, p);
  }

  {
    const int b = 8, ic = 16, h = 64, w = 64, oc = 32;
    std::vector<float> in(static_cast<size_t>(b) * ic * h * w);
    std::vector<float> wt(static_cast<size_t>(oc) * ic * 9);
    std::vector<float> bias(oc);
    int oh = kernels::conv_out_dim(h, 3, 2, 1), ow = kernels::conv_out_dim(w, 3, 2, 1);
    std::vector<float> out(static_cast<size_t>(b) * oc * oh * ow);
    for (auto& v : in) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : wt) v = static_cast<float>(rng.uniform(-1, 1));
    double s = time_ms(
        [&] {
          kernels::conv2d_forward_serial(in.data(), wt.data(), bias.data(), out.data(), b, ic, h,
                                         w, oc, 3, 3, 2, 1);
        },
        3);
    double p = time_ms(
        [&] {
          kernels::conv2d_forward(in.data(), wt.data(), bias.data(), out.data(), b, ic, h, w, oc,
                                  3, 3, 2, 1);
        },
        3);
    report("conv2d fwd 8x16x64x64->32", s, p);

    std::vector<float> dout(out.size());
    for (auto& v : dout) v = static_cast<float>(rng.uniform(-1, 1));
    std::vector<float> din(in.size());
    s = time_ms(
        [&] {
          kernels::conv2d_backward_input_serial(dout.data(), wt.data(), din.data(), b, ic, h, w,
                                                oc, 3, 3, 2, 1);
        },
        3);
    p = time_ms(
        [&] {
          kernels::conv2d_backward_input(dout.data(), wt.data(), din.data(), b, ic, h, w, oc, 3,
                                         3, 2, 1);
        },
        3);
    report("conv2d bwd-input", s, p);

    std::vector<float> dw(wt.size()), db(bias.size());
    s = time_ms(
        [&] {
          kernels::conv2d_backward_weights_serial(in.data(), dout.data(), dw.data(), db.data(),
                                                  b, ic, h, w, oc, 3, 3, 2, 1);
        },
        3);
    p = time_ms(
        [&] {
          kernels::conv2d_backward_weights(in.data(), dout.data(), dw.data(), db.data(), b, ic,
                                           h, w, oc, 3, 3, 2, 1);
        },
        3);
    report("conv2d bwd-weights", s, p);
  }

  {
    const int m = 1500, d = 64;
    std::vector<double> x(static_cast<size_t>(m) * d), out(static_cast<size_t>(m) * m);
    for (auto& v : x) v = rng.uniform(-1, 1);
    double s = time_ms([&] { kernels::pairwise_sqdist_serial(x.data(), out.data(), m, d); }, 3);
    double p = time_ms([&] { kernels::pairwise_sqdist(x.data(), out.data(), m, d); }, 3);
    report("pairwise_sqdist 1500x64", s, p);
  }

  return 0;
}
