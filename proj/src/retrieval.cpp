#include "actionret/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "actionret/kernels.hpp"

using nlohmann::json;

namespace actionret {

std::vector<std::string> sample_uids(const DatasetManifest& manifest) {
  std::map<std::string, int> seen;
  std::vector<std::string> uids;
  uids.reserve(manifest.samples.size());
  for (const auto& s : manifest.samples) {
    int ordinal = seen[s.image_id]++;
    uids.push_back(s.image_id + "#" + std::to_string(ordinal));
  }
  return uids;
}

EmbeddingStore extract_embeddings(ActionModel<float>& model, const DatasetManifest& manifest,
                                  Split split, int batch_size) {
  std::vector<std::string> uids = sample_uids(manifest);
  std::vector<size_t> indices = manifest.split_indices(split);
  if (indices.empty()) throw std::invalid_argument("extract_embeddings: split is empty");

  const int d = model.config().fusion.feature_dim;
  const int input = model.config().input_size;
  EmbeddingStore store;
  store.dim = d;
  Rng rng(0);  // eval mode, unused by dropout

  std::vector<size_t> pending;
  for (size_t idx : indices) {
    const ImageSample& s = manifest.samples[idx];
    if (!std::filesystem::exists(manifest.resolve_image_path(s))) {
      std::cerr << "warning: image file missing for sample " << uids[idx] << ", skipped\n";
      continue;
    }
    pending.push_back(idx);
  }

  for (size_t start = 0; start < pending.size(); start += static_cast<size_t>(batch_size)) {
    size_t end = std::min(pending.size(), start + static_cast<size_t>(batch_size));
    int b = static_cast<int>(end - start);
    typename ActionModel<float>::BatchInput batch;
    batch.images = Tensor<float>({b, 3, input, input});
    for (int i = 0; i < b; ++i) {
      const ImageSample& s = manifest.samples[pending[start + static_cast<size_t>(i)]];
      Image img = read_ppm(manifest.resolve_image_path(s));
      AugmentedSample as = resize_sample(img, s.person_box, s.proposals, input);
      float* dst = batch.images.ptr() + static_cast<int64_t>(i) * 3 * input * input;
      for (size_t j = 0; j < as.image.data.size(); ++j) dst[j] = as.image.data[j] * 2.0f - 1.0f;
      batch.person_boxes.push_back(as.person_box);
      batch.proposals.push_back(as.proposals);
      batch.image_ids.push_back(s.image_id);
    }
    typename ActionModel<float>::Output out = model.forward(batch, false, rng);
    for (int i = 0; i < b; ++i) {
      const float* row = out.embeddings.ptr() + static_cast<int64_t>(i) * d;
      double norm = 0.0;
      for (int j = 0; j < d; ++j) norm += static_cast<double>(row[j]) * row[j];
      norm = std::sqrt(std::max(norm, 1e-24));
      size_t idx = pending[start + static_cast<size_t>(i)];
      store.ids.push_back(uids[idx]);
      store.labels.push_back(manifest.samples[idx].label);
      for (int j = 0; j < d; ++j) {
        store.matrix.push_back(static_cast<float>(row[j] / norm));
      }
    }
  }
  return store;
}

namespace {

int find_store_index(const EmbeddingStore& store, const std::string& id) {
  for (int i = 0; i < store.size(); ++i) {
    if (store.ids[static_cast<size_t>(i)] == id) return i;
  }
  throw std::invalid_argument("rank: unknown query id '" + id + "'");
}

RankedList rank_row(const EmbeddingStore& store, int qi, const double* dist_row) {
  const int m = store.size();
  RankedList out;
  out.query_id = store.ids[static_cast<size_t>(qi)];
  out.query_index = qi;
  out.order.reserve(static_cast<size_t>(m) - 1);
  for (int j = 0; j < m; ++j) {
    if (j != qi) out.order.push_back(j);
  }
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](int a, int b) { return dist_row[a] < dist_row[b]; });
  out.distances.reserve(out.order.size());
  for (int j : out.order) out.distances.push_back(dist_row[j]);
  return out;
}

}  // namespace

RankedList rank(const std::string& query_id, const EmbeddingStore& store) {
  const int m = store.size();
  if (m < 2) throw std::invalid_argument("rank: store must contain at least 2 items");
  int qi = find_store_index(store, query_id);
  const int d = store.dim;
  std::vector<double> dist(static_cast<size_t>(m), 0.0);
  const float* q = store.row(qi);
  for (int j = 0; j < m; ++j) {
    const float* r = store.row(j);
    double acc = 0.0;
    for (int p = 0; p < d; ++p) {
      double diff = static_cast<double>(q[p]) - static_cast<double>(r[p]);
      acc += diff * diff;
    }
    dist[static_cast<size_t>(j)] = (j == qi) ? 0.0 : std::sqrt(acc);
  }
  return rank_row(store, qi, dist.data());
}

RankAllResult rank_all(const EmbeddingStore& store) {
  const int m = store.size();
  if (m < 2) throw std::invalid_argument("rank_all: store must contain at least 2 items");
  const int d = store.dim;
  std::vector<double> x(static_cast<size_t>(m) * d);
  for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(store.matrix[i]);

  RankAllResult res;
  res.distances = Tensor<double>({m, m});
  kernels::pairwise_sqdist(x.data(), res.distances.ptr(), m, d);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double v = res.distances.at2(i, j);
      res.distances.at2(i, j) = std::sqrt(v);
    }
  }
  res.lists = lists_from_distances(res.distances, store);
  return res;
}

std::vector<RankedList> lists_from_distances(const Tensor<double>& distances,
                                             const EmbeddingStore& store) {
  const int m = store.size();
  if (distances.ndim() != 2 || distances.dim(0) != m || distances.dim(1) != m) {
    throw std::invalid_argument("lists_from_distances: matrix shape mismatch");
  }
  std::vector<RankedList> lists(static_cast<size_t>(m));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    lists[static_cast<size_t>(i)] =
        rank_row(store, i, distances.ptr() + static_cast<int64_t>(i) * m);
  }
  return lists;
}

namespace {
constexpr char kStoreMagic[8] = {'A', 'R', 'E', 'M', 'B', '0', '0', '1'};
}

void save_embedding_store(const EmbeddingStore& store, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_embedding_store: cannot open " + path);
  f.write(kStoreMagic, 8);
  uint32_t m = static_cast<uint32_t>(store.size());
  uint32_t d = static_cast<uint32_t>(store.dim);
  f.write(reinterpret_cast<const char*>(&m), 4);
  f.write(reinterpret_cast<const char*>(&d), 4);
  f.write(reinterpret_cast<const char*>(store.matrix.data()),
          static_cast<std::streamsize>(store.matrix.size() * sizeof(float)));
  for (int i = 0; i < store.size(); ++i) {
    json rec{{"id", store.ids[static_cast<size_t>(i)]},
             {"label", store.labels[static_cast<size_t>(i)]}};
    f << rec.dump() << "\n";
  }
  if (!f) throw std::runtime_error("save_embedding_store: write failed for " + path);
}

EmbeddingStore load_embedding_store(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_embedding_store: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (f.gcount() != 8 || std::memcmp(magic, kStoreMagic, 8) != 0) {
    throw std::runtime_error("load_embedding_store: bad magic in " + path);
  }
  uint32_t m = 0, d = 0;
  f.read(reinterpret_cast<char*>(&m), 4);
  f.read(reinterpret_cast<char*>(&d), 4);
  if (!f || d == 0) throw std::runtime_error("load_embedding_store: bad header in " + path);
  EmbeddingStore store;
  store.dim = static_cast<int>(d);
  store.matrix.resize(static_cast<size_t>(m) * d);
  f.read(reinterpret_cast<char*>(store.matrix.data()),
         static_cast<std::streamsize>(store.matrix.size() * sizeof(float)));
  if (f.gcount() != static_cast<std::streamsize>(store.matrix.size() * sizeof(float))) {
    throw std::runtime_error("load_embedding_store: truncated matrix in " + path);
  }
  std::string line;
  std::set<std::string> seen;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    std::string id = rec.at("id").get<std::string>();
    if (!seen.insert(id).second) {
      throw std::runtime_error("load_embedding_store: duplicate id '" + id + "' in " + path);
    }
    store.ids.push_back(std::move(id));
    store.labels.push_back(rec.at("label").get<int>());
  }
  if (store.ids.size() != m) {
    throw std::runtime_error("load_embedding_store: id manifest length mismatch in " + path);
  }
  return store;
}

void export_ranked_lists(const std::vector<RankedList>& lists, const EmbeddingStore& store,
                         int limit, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_ranked_lists: cannot open " + path);
  f << json{{"schema_version", 1}, {"type", "ranked_lists"}, {"limit", limit}}.dump() << "\n";
  for (const auto& list : lists) {
    json ids = json::array();
    json dists = json::array();
    int n = std::min<int>(limit, static_cast<int>(list.order.size()));
    for (int i = 0; i < n; ++i) {
      ids.push_back(store.ids[static_cast<size_t>(list.order[static_cast<size_t>(i)])]);
      dists.push_back(list.distances[static_cast<size_t>(i)]);
    }
    f << json{{"query_id", list.query_id}, {"ranked_ids", ids}, {"distances", dists}}.dump()
      << "\n";
  }
}

std::vector<RankedExport> load_ranked_export(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_ranked_export: cannot open " + path);
  std::vector<RankedExport> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (line_no == 1 && rec.contains("schema_version")) continue;  // header
    RankedExport e;
    e.query_id = rec.at("query_id").get<std::string>();
    for (const auto& v : rec.at("ranked_ids")) e.ids.push_back(v.get<std::string>());
    for (const auto& v : rec.at("distances")) e.distances.push_back(v.get<double>());
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace actionret
