#include "actionret/montage.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>

namespace actionret {

namespace {

Image placeholder_tile(int tile, const std::string& id) {
  Image img(tile, tile);
  img.fill(0.5f, 0.5f, 0.5f);
  int scale = std::max(1, tile / 64);
  draw_text(img, id, 2 * scale, tile / 2 - 4 * scale, scale, 1.0f, 1.0f, 1.0f);
  return img;
}

}  // namespace

void write_montage(const std::vector<RankedExport>& lists, const DatasetManifest& manifest,
                   const std::string& out_path, const MontageOptions& options) {
  if (lists.empty()) throw std::invalid_argument("montage: no ranked lists");
  if (options.tile < 16 || options.limit < 1) {
    throw std::invalid_argument("montage: tile must be >= 16 and limit >= 1");
  }

  std::map<std::string, size_t> by_uid;
  std::vector<std::string> uids = sample_uids(manifest);
  for (size_t i = 0; i < uids.size(); ++i) by_uid[uids[i]] = i;

  int rows = static_cast<int>(lists.size());
  if (options.max_rows > 0) rows = std::min(rows, options.max_rows);
  const int cols = 1 + options.limit;
  const int gutter = 2;
  const int tile = options.tile;
  Image canvas(cols * tile + (cols - 1) * gutter, rows * tile + (rows - 1) * gutter);
  canvas.fill(1.0f, 1.0f, 1.0f);

  auto tile_for = [&](const std::string& uid, int query_label, bool is_query) {
    auto it = by_uid.find(uid);
    if (it == by_uid.end()) return placeholder_tile(tile, uid);
    const ImageSample& s = manifest.samples[it->second];
    std::string path = manifest.resolve_image_path(s);
    Image img;
    if (std::filesystem::exists(path)) {
      img = resize_bilinear(read_ppm(path), tile, tile);
    } else {
      return placeholder_tile(tile, uid);
    }
    if (!is_query && query_label >= 0 && s.label == query_label) {
      draw_border(img, options.border, 1.0f, 0.0f, 0.0f);
    }
    return img;
  };

  auto blit = [&](const Image& src, int row, int col) {
    int ox = col * (tile + gutter);
    int oy = row * (tile + gutter);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < tile; ++y) {
        for (int x = 0; x < tile; ++x) {
          canvas.at(c, oy + y, ox + x) = src.at(c, y, x);
        }
      }
    }
  };

  for (int r = 0; r < rows; ++r) {
    const RankedExport& list = lists[static_cast<size_t>(r)];
    int query_label = -1;
    auto qit = by_uid.find(list.query_id);
    if (qit != by_uid.end()) query_label = manifest.samples[qit->second].label;
    blit(tile_for(list.query_id, query_label, true), r, 0);
    int n = std::min<int>(options.limit, static_cast<int>(list.ids.size()));
    for (int c = 0; c < n; ++c) {
      blit(tile_for(list.ids[static_cast<size_t>(c)], query_label, false), r, 1 + c);
    }
  }
  write_ppm(canvas, out_path);
}

}  // namespace actionret
