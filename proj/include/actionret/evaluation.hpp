#ifndef ACTIONRET_EVALUATION_HPP
#define ACTIONRET_EVALUATION_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "actionret/retrieval.hpp"
#include "actionret/tensor.hpp"

namespace actionret {

// Standard retrieval average precision with the full-recall denominator:
// AP = (1/R) * sum over relevant ranks r of precision@r. `relevance` is the
// ranked list mapped to binary same-class indicators; R must be >= 1.
double average_precision(const std::vector<int>& relevance, int total_relevant);

struct RetrievalMetrics {
  double map = 0.0;
  double rank1 = 0.0;
  double rank5 = 0.0;
  std::vector<double> per_query_ap;            // for included queries, list order
  std::map<int, double> per_class_map;         // query label -> mean AP
  std::map<int, int> per_class_queries;
  int n_queries = 0;   // included
  int n_excluded = 0;  // queries with no same-class gallery item
};

// mAP / Rank-1 / Rank-5 over query-excluded ranked lists. Queries without a
// single same-class gallery item are excluded with a warning count rather
// than scored zero.
RetrievalMetrics retrieval_map(const std::vector<RankedList>& lists,
                               const std::vector<int>& labels);

// Per-class AP over sample scores [M, n] (ranking samples by each class's
// score, ties broken by sample index), averaged over classes present in
// `labels`. Absent classes are excluded with a warning.
double classification_map(const Tensor<double>& scores, const std::vector<int>& labels);

// Single metrics document (schema_version, map, rank1, rank5, n_queries,
// n_excluded, per_class, params).
nlohmann::json metrics_to_json(const RetrievalMetrics& metrics,
                               const std::vector<std::string>& class_names,
                               const nlohmann::json& params);

}  // namespace actionret

#endif  // ACTIONRET_EVALUATION_HPP
