#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "actionret/backbone.hpp"
#include "actionret/model.hpp"
#include "actionret/rng.hpp"

using namespace actionret;

namespace {

FeatureMap<double> random_map(int c, int h, int w, double stride, Rng& rng) {
  FeatureMap<double> fm;
  fm.stride = stride;
  fm.data = Tensor<double>({c, h, w});
  for (auto& v : fm.data.data) v = rng.uniform(-1.0, 1.0);
  return fm;
}

BackboneConfig tiny_config(int d) {
  BackboneConfig cfg;
  cfg.feature_dim = d;
  cfg.stage_channels = {4, 6, 8};
  return cfg;
}

}  // namespace

TEST_CASE("backbone: 64x64 input with total stride 16 gives a 4x4 map") {
  TinyConvBackbone<float> bb(tiny_config(16));
  Rng rng(3);
  bb.init(rng);
  Tensor<float> img({2, 3, 64, 64});
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(-1, 1));
  Tensor<float> out = bb.forward(img);
  REQUIRE(out.ndim() == 4);
  CHECK(out.dim(0) == 2);
  CHECK(out.dim(1) == 16);
  CHECK(out.dim(2) == 4);
  CHECK(out.dim(3) == 4);
}

TEST_CASE("backbone: zero image through a zero-initialized final stage is all zero") {
  TinyConvBackbone<float> bb(tiny_config(8));
  Rng rng(5);
  bb.init(rng);
  // zero the last stage
  std::vector<Param<float>*> params;
  bb.collect_params(params);
  params[params.size() - 1]->value.zero();  // conv3 bias
  params[params.size() - 2]->value.zero();  // conv3 weight
  Tensor<float> img({1, 3, 32, 32});
  Tensor<float> out = bb.forward(img);
  for (float v : out.data) CHECK(v == 0.0f);
}

TEST_CASE("backbone: fixed seed and image give identical maps across runs") {
  Tensor<float> img({1, 3, 32, 32});
  Rng data_rng(7);
  for (auto& v : img.data) v = static_cast<float>(data_rng.uniform(-1, 1));
  TinyConvBackbone<float> b1(tiny_config(8)), b2(tiny_config(8));
  Rng r1(11), r2(11);
  b1.init(r1);
  b2.init(r2);
  Tensor<float> o1 = b1.forward(img);
  Tensor<float> o2 = b2.forward(img);
  CHECK(o1.data == o2.data);
}

TEST_CASE("backbone: wrong channel count raises") {
  TinyConvBackbone<float> bb(tiny_config(8));
  Rng rng(1);
  bb.init(rng);
  Tensor<float> bad({1, 4, 32, 32});
  CHECK_THROWS_AS(bb.forward(bad), std::invalid_argument);
}

TEST_CASE("roi_pool: full-image box equals global max pool exactly") {
  Rng rng(13);
  FeatureMap<double> fm = random_map(5, 4, 4, 16.0, rng);
  BoundingBox full(0, 0, 64, 64);
  auto a = roi_pool(fm, full);
  auto b = global_max_pool(fm);
  CHECK(a == b);
}

TEST_CASE("roi_pool: constant map gives a constant vector") {
  FeatureMap<double> fm;
  fm.stride = 8.0;
  fm.data = Tensor<double>({3, 4, 4}, 2.5);
  auto v = roi_pool(fm, BoundingBox(3, 3, 20, 20));
  for (double x : v) CHECK(x == 2.5);
}

TEST_CASE("roi_pool: box covering cells (0..1, 0..1) equals brute-force max over them") {
  Rng rng(17);
  FeatureMap<double> fm = random_map(3, 4, 4, 16.0, rng);
  // box [0,32)x[0,32) with stride 16 covers cells x,y in {0,1}
  auto pooled = roi_pool(fm, BoundingBox(0, 0, 32, 32));
  for (int c = 0; c < 3; ++c) {
    double best = -1e30;
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 2; ++x) best = std::max(best, fm.data.at3(c, y, x));
    }
    CHECK(pooled[static_cast<size_t>(c)] == best);
  }
}

TEST_CASE("roi_pool: thin boxes still cover at least one cell") {
  Rng rng(19);
  FeatureMap<double> fm = random_map(2, 4, 4, 16.0, rng);
  auto v = roi_pool(fm, BoundingBox(17.0, 17.0, 17.5, 17.5));  // inside cell (1,1)
  CHECK(v[0] == fm.data.at3(0, 1, 1));
  CHECK(v[1] == fm.data.at3(1, 1, 1));
}

TEST_CASE("global_max_pool: single spatial position returns that vector") {
  Rng rng(23);
  FeatureMap<double> fm = random_map(4, 1, 1, 64.0, rng);
  auto v = global_max_pool(fm);
  for (int c = 0; c < 4; ++c) CHECK(v[static_cast<size_t>(c)] == fm.data.at3(c, 0, 0));
}

TEST_CASE("global_max_pool: invariant to spatial permutation, equals brute force") {
  Rng rng(29);
  FeatureMap<double> fm = random_map(3, 3, 3, 8.0, rng);
  auto v = global_max_pool(fm);
  for (int c = 0; c < 3; ++c) {
    double best = -1e30;
    for (int64_t i = 0; i < 9; ++i) best = std::max(best, fm.data[c * 9 + i]);
    CHECK(v[static_cast<size_t>(c)] == best);
  }
  // permute spatial positions (reverse order) per channel
  FeatureMap<double> perm = fm;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 9; ++i) perm.data[c * 9 + i] = fm.data[c * 9 + (8 - i)];
  }
  CHECK(global_max_pool(perm) == v);
}

TEST_CASE("roi_pool: monotone under box containment") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureMap<double> fm = random_map(4, 4, 4, 16.0, rng);
    double x0 = rng.uniform(0, 30), y0 = rng.uniform(0, 30);
    double x1 = x0 + rng.uniform(2, 30), y1 = y0 + rng.uniform(2, 30);
    BoundingBox inner(x0, y0, x1, y1);
    BoundingBox outer(std::max(0.0, x0 - 10), std::max(0.0, y0 - 10),
                      std::min(64.0, x1 + 10), std::min(64.0, y1 + 10));
    auto vi = roi_pool(fm, inner);
    auto vo = roi_pool(fm, outer);
    for (size_t c = 0; c < vi.size(); ++c) CHECK(vi[c] <= vo[c]);
  }
}

TEST_CASE("roi_pool: gradient matches finite differences at non-tied maxima") {
  Rng rng(37);
  FeatureMap<double> fm = random_map(3, 4, 4, 16.0, rng);
  BoundingBox box(5, 9, 40, 50);
  std::vector<double> w(3);
  for (auto& v : w) v = rng.uniform(0.5, 1.5);

  auto loss = [&](const FeatureMap<double>& m) {
    auto v = roi_pool(m, box);
    double acc = 0;
    for (size_t c = 0; c < v.size(); ++c) acc += w[c] * v[c];
    return acc;
  };

  // analytic gradient via argmax scatter
  PooledFeature<double> pooled = roi_pool_with_argmax(fm, box);
  Tensor<double> analytic({3, 4, 4});
  for (int c = 0; c < 3; ++c) {
    analytic[c * 16 + pooled.argmax[static_cast<size_t>(c)]] += w[static_cast<size_t>(c)];
  }

  const double eps = 1e-6;
  for (int64_t i = 0; i < fm.data.size(); ++i) {
    FeatureMap<double> plus = fm, minus = fm;
    plus.data[i] += eps;
    minus.data[i] -= eps;
    double fd = (loss(plus) - loss(minus)) / (2 * eps);
    CHECK(std::abs(fd - analytic[i]) < 1e-4);
  }
}

TEST_CASE("feature map file: save/load round trip") {
  Rng rng(41);
  FeatureMap<float> fm;
  fm.stride = 16.0;
  fm.data = Tensor<float>({4, 2, 3});
  for (auto& v : fm.data.data) v = static_cast<float>(rng.uniform(-2, 2));
  auto path = std::filesystem::temp_directory_path() / "actionret_fmap_test.fmap";
  save_feature_map_file(fm, path.string());
  FeatureMap<float> r = load_feature_map_file(path.string());
  CHECK(r.stride == fm.stride);
  CHECK(r.data.shape == fm.data.shape);
  CHECK(r.data.data == fm.data.data);
  std::filesystem::remove(path);
}

TEST_CASE("external adapter backbone: model consumes precomputed feature maps") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "actionret_adapter_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  Rng rng(47);
  const int d = 8;
  for (const char* id : {"imgA", "imgB"}) {
    FeatureMap<float> fm;
    fm.stride = 16.0;
    fm.data = Tensor<float>({d, 4, 4});
    for (auto& v : fm.data.data) v = static_cast<float>(rng.uniform(-1, 1));
    save_feature_map_file(fm, (dir / (std::string(id) + ".fmap")).string());
  }

  ModelConfig mc;
  mc.backbone.kind = BackboneKind::kExternalAdapter;
  mc.backbone.feature_dir = dir.string();
  mc.backbone.feature_dim = d;
  mc.fusion.feature_dim = d;
  mc.fusion.num_contextual = 2;
  mc.fusion.blocks = 1;
  mc.fusion.heads = 2;
  mc.fusion.dropout = 0.0;
  mc.n_classes = 2;
  mc.input_size = 64;
  ActionModel<float> model(mc, 3);

  typename ActionModel<float>::BatchInput batch;
  batch.person_boxes = {BoundingBox(5, 5, 30, 30), BoundingBox(20, 20, 60, 60)};
  batch.proposals.resize(2);  // one empty set exercises the padding path
  batch.proposals[1].proposals.push_back(
      ScoredProposal{BoundingBox(10, 10, 40, 40), 0.9});
  batch.image_ids = {"imgA", "imgB"};
  Rng fwd(0);
  auto out = model.forward(batch, false, fwd);
  CHECK(out.embeddings.dim(0) == 2);
  CHECK(out.embeddings.dim(1) == d);
  CHECK(out.logits.dim(1) == 2);
  CHECK(all_finite(out.embeddings));

  // a missing feature file is an error
  batch.image_ids = {"imgA", "missing"};
  CHECK_THROWS_AS(model.forward(batch, false, fwd), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("feature map file: bad magic raises") {
  auto path = std::filesystem::temp_directory_path() / "actionret_fmap_bad.fmap";
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOTAFMAP and some garbage";
  }
  CHECK_THROWS_AS(load_feature_map_file(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}
