#include "actionret/evaluation.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <stdexcept>

using nlohmann::json;

namespace actionret {

double average_precision(const std::vector<int>& relevance, int total_relevant) {
  if (total_relevant < 1) {
    throw std::invalid_argument("average_precision: total_relevant must be >= 1");
  }
  double ap = 0.0;
  int hits = 0;
  for (size_t r = 0; r < relevance.size(); ++r) {
    if (relevance[r]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return ap / total_relevant;
}

RetrievalMetrics retrieval_map(const std::vector<RankedList>& lists,
                               const std::vector<int>& labels) {
  if (lists.empty()) throw std::invalid_argument("retrieval_map: no queries");
  RetrievalMetrics m;
  int hit1 = 0, hit5 = 0;
  std::map<int, double> class_ap_sum;

  for (const auto& list : lists) {
    int q_label = labels.at(static_cast<size_t>(list.query_index));
    int total_relevant = 0;
    for (int idx : list.order) {
      if (labels.at(static_cast<size_t>(idx)) == q_label) ++total_relevant;
    }
    if (total_relevant == 0) {
      ++m.n_excluded;
      continue;
    }
    std::vector<int> relevance;
    relevance.reserve(list.order.size());
    for (int idx : list.order) {
      relevance.push_back(labels.at(static_cast<size_t>(idx)) == q_label ? 1 : 0);
    }
    double ap = average_precision(relevance, total_relevant);
    m.per_query_ap.push_back(ap);
    class_ap_sum[q_label] += ap;
    m.per_class_queries[q_label] += 1;
    bool in1 = false, in5 = false;
    for (size_t r = 0; r < relevance.size() && r < 5; ++r) {
      if (relevance[r]) {
        in5 = true;
        if (r < 1) in1 = true;
      }
    }
    hit1 += in1 ? 1 : 0;
    hit5 += in5 ? 1 : 0;
    ++m.n_queries;
  }

  if (m.n_queries == 0) {
    throw std::invalid_argument("retrieval_map: every query was excluded (no relevant items)");
  }
  if (m.n_excluded > 0) {
    std::cerr << "warning: " << m.n_excluded
              << " queries excluded from retrieval metrics (no same-class gallery item)\n";
  }
  m.map = std::accumulate(m.per_query_ap.begin(), m.per_query_ap.end(), 0.0) / m.n_queries;
  m.rank1 = static_cast<double>(hit1) / m.n_queries;
  m.rank5 = static_cast<double>(hit5) / m.n_queries;
  for (const auto& [label, sum] : class_ap_sum) {
    m.per_class_map[label] = sum / m.per_class_queries[label];
  }
  return m;
}

double classification_map(const Tensor<double>& scores, const std::vector<int>& labels) {
  if (scores.ndim() != 2) throw std::invalid_argument("classification_map: scores must be [M,n]");
  const int m = scores.dim(0);
  const int n = scores.dim(1);
  if (n < 2) throw std::invalid_argument("classification_map: need at least 2 classes");
  if (static_cast<int>(labels.size()) != m) {
    throw std::invalid_argument("classification_map: labels length mismatch");
  }

  double ap_sum = 0.0;
  int included = 0;
  for (int c = 0; c < n; ++c) {
    int total_relevant = 0;
    for (int label : labels) {
      if (label == c) ++total_relevant;
    }
    if (total_relevant == 0) {
      std::cerr << "warning: class " << c << " absent from labels, excluded from mAP\n";
      continue;
    }
    std::vector<int> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    // descending score, ties by sample index for determinism
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scores.at2(a, c) > scores.at2(b, c);
    });
    std::vector<int> relevance(static_cast<size_t>(m));
    for (int r = 0; r < m; ++r) {
      relevance[static_cast<size_t>(r)] = labels[static_cast<size_t>(order[static_cast<size_t>(r)])] == c ? 1 : 0;
    }
    ap_sum += average_precision(relevance, total_relevant);
    ++included;
  }
  if (included == 0) throw std::invalid_argument("classification_map: no class present");
  return ap_sum / included;
}

json metrics_to_json(const RetrievalMetrics& metrics, const std::vector<std::string>& class_names,
                     const json& params) {
  json per_class = json::object();
  for (const auto& [label, ap] : metrics.per_class_map) {
    std::string key = (label >= 0 && label < static_cast<int>(class_names.size()))
                          ? class_names[static_cast<size_t>(label)]
                          : ("class_" + std::to_string(label));
    per_class[key] = json{{"map", ap}, {"n_queries", metrics.per_class_queries.at(label)}};
  }
  return json{{"schema_version", 1},
              {"map", metrics.map},
              {"rank1", metrics.rank1},
              {"rank5", metrics.rank5},
              {"n_queries", metrics.n_queries},
              {"n_excluded", metrics.n_excluded},
              {"per_class", per_class},
              {"params", params}};
}

}  // namespace actionret
