#ifndef ACTIONRET_RERANKING_HPP
#define ACTIONRET_RERANKING_HPP

#include "actionret/tensor.hpp"

namespace actionret {

struct RerankParams {
  int k1 = 200;
  int k2 = 20;
  double lambda = 0.3;

  void validate() const;  // k2 <= k1, lambda in [0,1]
};

// k-reciprocal reranking of a symmetric, zero-diagonal distance matrix.
//
// Steps, applied to the row-max-normalized distances dn:
//   1. initial per-row ranking of dn (ties by index);
//   2. k1-reciprocal neighbor set R(i): j is in R(i) when each is within the
//      other's k1 nearest; the set is expanded by the half-k1 reciprocal
//      sets of its members when they overlap R(i) by more than 2/3;
//   3. each neighborhood becomes a sparse weight vector V[i], Gaussian
//      weighted (exp(-dn)) and normalized to sum 1;
//   4. local query expansion: V[i] replaced by the mean of the k2 nearest
//      rows (skipped when k2 == 1);
//   5. Jaccard distance between weight vectors,
//      d_J(i,j) = 1 - sum_min / (2 - sum_min);
//   6. result = (1-lambda) * d_J + lambda * dn.
//
// k1/k2 larger than the gallery allows are clamped to M-1 and (M-1)/2 with a
// warning, so the default parameters stay usable on small galleries.
Tensor<double> k_reciprocal_rerank(const Tensor<double>& distance_matrix,
                                   const RerankParams& params);

}  // namespace actionret

#endif  // ACTIONRET_RERANKING_HPP
