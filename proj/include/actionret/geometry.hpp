#ifndef ACTIONRET_GEOMETRY_HPP
#define ACTIONRET_GEOMETRY_HPP

#include <string>
#include <vector>

namespace actionret {

// Axis-aligned box in continuous image coordinates, origin top-left.
// Valid boxes have strictly positive area.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  BoundingBox() = default;
  BoundingBox(double x0, double y0, double x1, double y1)
      : x_min(x0), y_min(y0), x_max(x1), y_max(y1) {}

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const;

  bool operator==(const BoundingBox& o) const {
    return x_min == o.x_min && y_min == o.y_min && x_max == o.x_max && y_max == o.y_max;
  }
};

struct ScoredProposal {
  BoundingBox box;
  double confidence = 0.0;  // in [0, 1]
};

// Emission order of `proposals` is meaningful: it is the final tie-break key
// when ranking contextual regions.
struct ProposalSet {
  std::vector<ScoredProposal> proposals;
  std::string image_id;
};

// Intersection-over-union on continuous coordinates (area formula).
// Throws std::invalid_argument for degenerate (zero-area) boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

// Filters proposals by confidence (strictly above threshold), ranks the
// survivors by IoU with the anchor (descending; ties by higher confidence,
// then by emission order) and returns the first k boxes. When fewer than k
// survive, the result is padded with full-image boxes so the length is
// always exactly k.
std::vector<BoundingBox> select_contextual_regions(const ProposalSet& proposals,
                                                   const BoundingBox& anchor,
                                                   double confidence_threshold,
                                                   int k,
                                                   double image_width,
                                                   double image_height);

// Clips a box to [0,width] x [0,height]. Throws std::invalid_argument when
// the box lies entirely outside the image (the clipped box would have zero
// area).
BoundingBox clamp_to_image(const BoundingBox& box, double width, double height);

// Drops proposals that nearly duplicate the anchor box (IoU above
// iou_cutoff), e.g. the person's own detection. Emission order of the
// survivors is preserved.
ProposalSet filter_anchor_duplicates(const ProposalSet& proposals, const BoundingBox& anchor,
                                     double iou_cutoff);

}  // namespace actionret

#endif  // ACTIONRET_GEOMETRY_HPP
