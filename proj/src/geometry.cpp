#include "actionret/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actionret {

bool BoundingBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.valid() || a.area() <= 0.0) {
    throw std::invalid_argument("iou: degenerate box a");
  }
  if (!b.valid() || b.area() <= 0.0) {
    throw std::invalid_argument("iou: degenerate box b");
  }
  double ix0 = std::max(a.x_min, b.x_min);
  double iy0 = std::max(a.y_min, b.y_min);
  double ix1 = std::min(a.x_max, b.x_max);
  double iy1 = std::min(a.y_max, b.y_max);
  double iw = ix1 - ix0;
  double ih = iy1 - iy0;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  double inter = iw * ih;
  double uni = a.area() + b.area() - inter;
  return inter / uni;
}

std::vector<BoundingBox> select_contextual_regions(const ProposalSet& proposals,
                                                   const BoundingBox& anchor,
                                                   double confidence_threshold,
                                                   int k,
                                                   double image_width,
                                                   double image_height) {
  if (k < 1) throw std::invalid_argument("select_contextual_regions: k must be >= 1");
  if (!anchor.valid()) throw std::invalid_argument("select_contextual_regions: invalid anchor");

  struct Ranked {
    double iou_score;
    double confidence;
    size_t order;
    const BoundingBox* box;
  };
  std::vector<Ranked> survivors;
  survivors.reserve(proposals.proposals.size());
  for (size_t i = 0; i < proposals.proposals.size(); ++i) {
    const ScoredProposal& p = proposals.proposals[i];
    if (p.confidence > confidence_threshold && p.box.valid()) {
      survivors.push_back(Ranked{iou(p.box, anchor), p.confidence, i, &p.box});
    }
  }
  std::sort(survivors.begin(), survivors.end(), [](const Ranked& a, const Ranked& b) {
    if (a.iou_score != b.iou_score) return a.iou_score > b.iou_score;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.order < b.order;
  });

  std::vector<BoundingBox> out;
  out.reserve(static_cast<size_t>(k));
  for (size_t i = 0; i < survivors.size() && out.size() < static_cast<size_t>(k); ++i) {
    out.push_back(*survivors[i].box);
  }
  // Fixed-shape padding: the full image is the fallback contextual region.
  BoundingBox full(0.0, 0.0, image_width, image_height);
  while (out.size() < static_cast<size_t>(k)) out.push_back(full);
  return out;
}

ProposalSet filter_anchor_duplicates(const ProposalSet& proposals, const BoundingBox& anchor,
                                     double iou_cutoff) {
  ProposalSet kept;
  kept.image_id = proposals.image_id;
  for (const auto& p : proposals.proposals) {
    if (!p.box.valid() || iou(p.box, anchor) <= iou_cutoff) {
      kept.proposals.push_back(p);
    }
  }
  return kept;
}

BoundingBox clamp_to_image(const BoundingBox& box, double width, double height) {
  if (width < 1.0 || height < 1.0) {
    throw std::invalid_argument("clamp_to_image: image dimensions must be >= 1");
  }
  BoundingBox c;
  c.x_min = std::clamp(box.x_min, 0.0, width);
  c.y_min = std::clamp(box.y_min, 0.0, height);
  c.x_max = std::clamp(box.x_max, 0.0, width);
  c.y_max = std::clamp(box.y_max, 0.0, height);
  if (!(c.x_min < c.x_max && c.y_min < c.y_max)) {
    throw std::invalid_argument("clamp_to_image: box lies outside the image");
  }
  return c;
}

}  // namespace actionret
