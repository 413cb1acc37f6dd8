#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "actionret/dataset.hpp"
#include "actionret/montage.hpp"

using namespace actionret;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("montage: layout, highlights, placeholders, determinism") {
  TempDir dir("actionret_montage");
  SyntheticConfig cfg;
  cfg.n_classes = 3;
  cfg.images_per_class = 4;
  cfg.image_size = 32;
  DatasetManifest m = generate_synthetic(cfg, 5, dir.path.string());
  std::vector<std::string> uids = sample_uids(m);

  // one query row: query uid[0], results of matching and non-matching class
  // plus an unresolvable id
  RankedExport row;
  row.query_id = uids[0];
  int q_label = m.samples[0].label;
  int same = -1, other = -1;
  for (size_t i = 1; i < m.samples.size(); ++i) {
    if (m.samples[i].label == q_label && same < 0) same = static_cast<int>(i);
    if (m.samples[i].label != q_label && other < 0) other = static_cast<int>(i);
  }
  REQUIRE(same > 0);
  REQUIRE(other > 0);
  row.ids = {uids[static_cast<size_t>(same)], uids[static_cast<size_t>(other)], "ghost#0"};
  row.distances = {0.1, 0.2, 0.3};

  MontageOptions opts;
  opts.limit = 8;
  opts.tile = 32;
  std::string out = (dir.path / "montage.ppm").string();
  write_montage({row}, m, out, opts);
  Image img = read_ppm(out);

  // 1 query + 8 result slots -> 9 tiles with 2px gutters
  CHECK(img.width == 9 * 32 + 8 * 2);
  CHECK(img.height == 32);

  // tile 1 (same class) carries a red border; tile 2 (other class) does not
  int t1_x = 1 * (32 + 2), t2_x = 2 * (32 + 2);
  CHECK(img.at(0, 0, t1_x) == doctest::Approx(1.0f));
  CHECK(img.at(1, 0, t1_x) == doctest::Approx(0.0f));
  CHECK(img.at(2, 0, t1_x) == doctest::Approx(0.0f));
  bool t2_red_border = img.at(0, 0, t2_x) > 0.95f && img.at(1, 0, t2_x) < 0.05f;
  CHECK_FALSE(t2_red_border);

  // tile 3 (unknown id) is the gray placeholder (8-bit quantized 0.5)
  int t3_x = 3 * (32 + 2);
  CHECK(img.at(0, 0, t3_x) == doctest::Approx(0.5f).epsilon(0.01));
  CHECK(img.at(1, 0, t3_x) == doctest::Approx(0.5f).epsilon(0.01));

  // deterministic bytes
  std::string out2 = (dir.path / "montage2.ppm").string();
  write_montage({row}, m, out2, opts);
  CHECK(file_bytes(out) == file_bytes(out2));
}

TEST_CASE("montage: multiple rows and the max_rows cap") {
  TempDir dir("actionret_montage_rows");
  SyntheticConfig cfg;
  cfg.n_classes = 2;
  cfg.images_per_class = 3;
  cfg.image_size = 32;
  DatasetManifest m = generate_synthetic(cfg, 9, dir.path.string());
  std::vector<std::string> uids = sample_uids(m);
  std::vector<RankedExport> rows;
  for (int q = 0; q < 3; ++q) {
    RankedExport r;
    r.query_id = uids[static_cast<size_t>(q)];
    r.ids = {uids[static_cast<size_t>((q + 1) % uids.size())]};
    r.distances = {0.5};
    rows.push_back(r);
  }
  MontageOptions opts;
  opts.limit = 2;
  opts.tile = 32;
  opts.max_rows = 2;
  std::string out = (dir.path / "grid.ppm").string();
  write_montage(rows, m, out, opts);
  Image img = read_ppm(out);
  CHECK(img.width == 3 * 32 + 2 * 2);
  CHECK(img.height == 2 * 32 + 1 * 2);
}
