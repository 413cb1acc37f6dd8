#ifndef ACTIONRET_RETRIEVAL_HPP
#define ACTIONRET_RETRIEVAL_HPP

#include <string>
#include <vector>

#include "actionret/dataset.hpp"
#include "actionret/model.hpp"

namespace actionret {

// Gallery of L2-normalized embeddings with per-row sample ids and labels.
struct EmbeddingStore {
  int dim = 0;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<float> matrix;  // [M, dim] row-major

  int size() const { return static_cast<int>(ids.size()); }
  const float* row(int i) const { return matrix.data() + static_cast<int64_t>(i) * dim; }
};

// Unique per-sample id: image_id plus the sample's ordinal among samples of
// the same image, in manifest order (e.g. "img_12#0").
std::vector<std::string> sample_uids(const DatasetManifest& manifest);

// Eval-mode embedding extraction over one split: deterministic resize, BN-neck
// running statistics, embeddings L2-normalized before storage. Samples whose
// image file is missing are skipped with a warning.
EmbeddingStore extract_embeddings(ActionModel<float>& model, const DatasetManifest& manifest,
                                  Split split, int batch_size = 32);

// Query-excluded ranking of the gallery, distances ascending. Distance is
// Euclidean between unit vectors (order-equivalent to cosine similarity).
struct RankedList {
  std::string query_id;
  int query_index = -1;
  std::vector<int> order;         // store row indices, length M-1
  std::vector<double> distances;  // non-decreasing
};

RankedList rank(const std::string& query_id, const EmbeddingStore& store);

struct RankAllResult {
  std::vector<RankedList> lists;
  Tensor<double> distances;  // [M, M], symmetric, zero diagonal
};

// Per-query ranking for every item plus the full distance matrix consumed by
// reranking. Row i of `lists` equals rank(ids[i]).
RankAllResult rank_all(const EmbeddingStore& store);

// Recomputes the per-query ordering from an externally modified (e.g.
// reranked) distance matrix, still excluding each query from its own list.
std::vector<RankedList> lists_from_distances(const Tensor<double>& distances,
                                             const EmbeddingStore& store);

// Store file: magic "AREMB001", u32 M, u32 D, float32 matrix, then one JSON
// line {"id":..., "label":...} per row.
void save_embedding_store(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_embedding_store(const std::string& path);

// Line-delimited export: a schema_version header line followed by one
// {"query_id", "ranked_ids", "distances"} object per query, truncated to
// `limit` entries.
void export_ranked_lists(const std::vector<RankedList>& lists, const EmbeddingStore& store,
                         int limit, const std::string& path);

struct RankedExport {
  std::string query_id;
  std::vector<std::string> ids;
  std::vector<double> distances;
};

std::vector<RankedExport> load_ranked_export(const std::string& path);

}  // namespace actionret

#endif  // ACTIONRET_RETRIEVAL_HPP
