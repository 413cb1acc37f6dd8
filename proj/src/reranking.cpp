#include "actionret/reranking.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace actionret {

void RerankParams::validate() const {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("rerank: k1 and k2 must be >= 1");
  if (k2 > k1) throw std::invalid_argument("rerank: k2 must be <= k1");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("rerank: lambda outside [0,1]");
}

namespace {

// j belongs to R(i,k) when each is among the other's k nearest (self included
// at rank 0, so "k nearest" reads the first k+1 ranked entries).
std::vector<std::vector<int>> reciprocal_sets(const std::vector<std::vector<int>>& initial_rank,
                                              int k) {
  const int m = static_cast<int>(initial_rank.size());
  std::vector<std::vector<int>> sets(static_cast<size_t>(m));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const auto& fwd = initial_rank[static_cast<size_t>(i)];
    int take = std::min(k + 1, m);
    for (int r = 0; r < take; ++r) {
      int j = fwd[static_cast<size_t>(r)];
      const auto& back = initial_rank[static_cast<size_t>(j)];
      for (int r2 = 0; r2 < take; ++r2) {
        if (back[static_cast<size_t>(r2)] == i) {
          sets[static_cast<size_t>(i)].push_back(j);
          break;
        }
      }
    }
    std::sort(sets[static_cast<size_t>(i)].begin(), sets[static_cast<size_t>(i)].end());
  }
  return sets;
}

int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  size_t ia = 0, ib = 0;
  int count = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (a[ia] > b[ib]) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

Tensor<double> k_reciprocal_rerank(const Tensor<double>& distance_matrix,
                                   const RerankParams& params) {
  params.validate();
  if (distance_matrix.ndim() != 2 || distance_matrix.dim(0) != distance_matrix.dim(1)) {
    throw std::invalid_argument("rerank: distance matrix must be square");
  }
  const int m = distance_matrix.dim(0);
  if (m < 2) throw std::invalid_argument("rerank: need at least 2 items");
  for (int i = 0; i < m; ++i) {
    if (std::abs(distance_matrix.at2(i, i)) > 1e-9) {
      throw std::invalid_argument("rerank: distance matrix diagonal must be zero");
    }
    for (int j = i + 1; j < m; ++j) {
      double a = distance_matrix.at2(i, j);
      double b = distance_matrix.at2(j, i);
      if (a < 0.0 || b < 0.0 || std::abs(a - b) > 1e-9) {
        throw std::invalid_argument("rerank: distance matrix must be symmetric and non-negative");
      }
    }
  }

  int k1 = params.k1;
  int k2 = params.k2;
  if (k1 > m - 1) {
    std::cerr << "warning: rerank k1=" << k1 << " clamped to " << (m - 1)
              << " for gallery of size " << m << "\n";
    k1 = m - 1;
  }
  if (k2 > k1 || k2 > std::max(1, (m - 1) / 2)) {
    int clamped = std::min(k1, std::max(1, (m - 1) / 2));
    if (k2 != clamped) {
      std::cerr << "warning: rerank k2=" << k2 << " clamped to " << clamped << "\n";
    }
    k2 = clamped;
  }
  const double lambda = params.lambda;

  // Row-max normalization (a positive per-row rescale, so per-row orderings
  // are preserved and lambda=1 reproduces the original ranking).
  Tensor<double> dn({m, m});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double mx = 0.0;
    for (int j = 0; j < m; ++j) mx = std::max(mx, distance_matrix.at2(i, j));
    double inv = mx > 0.0 ? 1.0 / mx : 1.0;
    for (int j = 0; j < m; ++j) dn.at2(i, j) = distance_matrix.at2(i, j) * inv;
  }

  // initial ranking per row, ties by index
  std::vector<std::vector<int>> initial_rank(static_cast<size_t>(m));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    std::vector<int>& order = initial_rank[static_cast<size_t>(i)];
    order.resize(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    const double* row = dn.ptr() + static_cast<int64_t>(i) * m;
    std::stable_sort(order.begin(), order.end(),
                     [row](int a, int b) { return row[a] < row[b]; });
  }

  const int half = static_cast<int>(std::lround(k1 / 2.0));
  std::vector<std::vector<int>> r_k1 = reciprocal_sets(initial_rank, k1);
  std::vector<std::vector<int>> r_half =
      half >= 1 ? reciprocal_sets(initial_rank, half) : std::vector<std::vector<int>>();

  // sparse Gaussian-weighted neighborhood vectors
  Tensor<double> v({m, m});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    std::vector<int> expansion = r_k1[static_cast<size_t>(i)];
    if (half >= 1) {
      for (int cand : r_k1[static_cast<size_t>(i)]) {
        const std::vector<int>& cand_set = r_half[static_cast<size_t>(cand)];
        int inter = intersection_size(cand_set, r_k1[static_cast<size_t>(i)]);
        if (3 * inter > 2 * static_cast<int>(cand_set.size())) {
          expansion.insert(expansion.end(), cand_set.begin(), cand_set.end());
        }
      }
      std::sort(expansion.begin(), expansion.end());
      expansion.erase(std::unique(expansion.begin(), expansion.end()), expansion.end());
    }
    double sum = 0.0;
    for (int j : expansion) sum += std::exp(-dn.at2(i, j));
    for (int j : expansion) v.at2(i, j) = std::exp(-dn.at2(i, j)) / sum;
  }

  // local query expansion over the k2 nearest rows
  if (k2 > 1) {
    Tensor<double> v_qe({m, m});
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
      const auto& order = initial_rank[static_cast<size_t>(i)];
      for (int r = 0; r < k2; ++r) {
        const double* src = v.ptr() + static_cast<int64_t>(order[static_cast<size_t>(r)]) * m;
        double* dst = v_qe.ptr() + static_cast<int64_t>(i) * m;
        for (int j = 0; j < m; ++j) dst[j] += src[j];
      }
      double* dst = v_qe.ptr() + static_cast<int64_t>(i) * m;
      for (int j = 0; j < m; ++j) dst[j] /= k2;
    }
    v = std::move(v_qe);
  }

  // inverted index over nonzero columns
  std::vector<std::vector<int>> inv_index(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (v.at2(i, j) != 0.0) inv_index[static_cast<size_t>(j)].push_back(i);
    }
  }

  Tensor<double> out({m, m});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    std::vector<double> min_sum(static_cast<size_t>(m), 0.0);
    const double* vi = v.ptr() + static_cast<int64_t>(i) * m;
    for (int c = 0; c < m; ++c) {
      if (vi[c] == 0.0) continue;
      for (int j : inv_index[static_cast<size_t>(c)]) {
        min_sum[static_cast<size_t>(j)] += std::min(vi[c], v.at2(j, c));
      }
    }
    for (int j = 0; j < m; ++j) {
      double jaccard =
          1.0 - min_sum[static_cast<size_t>(j)] / (2.0 - min_sum[static_cast<size_t>(j)]);
      if (jaccard < 0.0) jaccard = 0.0;  // rounding when the neighborhoods coincide
      out.at2(i, j) = (1.0 - lambda) * jaccard + lambda * dn.at2(i, j);
    }
  }
  return out;
}

}  // namespace actionret
