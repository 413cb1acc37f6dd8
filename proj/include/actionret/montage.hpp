#ifndef ACTIONRET_MONTAGE_HPP
#define ACTIONRET_MONTAGE_HPP

#include <string>
#include <vector>

#include "actionret/dataset.hpp"
#include "actionret/retrieval.hpp"

namespace actionret {

struct MontageOptions {
  int limit = 8;    // retrieved tiles per row
  int tile = 64;    // tile edge in pixels
  int border = 2;   // highlight border thickness
  int max_rows = 0; // 0 = all queries
};

// One row per query: the query image leftmost, retrieved results rightward.
// Results of the query's class get a red highlight border; unresolvable ids
// render as a gray placeholder tile carrying the id text. Output is a binary
// PPM with deterministic bytes for fixed inputs.
void write_montage(const std::vector<RankedExport>& lists, const DatasetManifest& manifest,
                   const std::string& out_path, const MontageOptions& options = {});

}  // namespace actionret

#endif  // ACTIONRET_MONTAGE_HPP
