#ifndef ACTIONRET_DATASET_HPP
#define ACTIONRET_DATASET_HPP

#include <optional>
#include <string>
#include <vector>

#include "actionret/geometry.hpp"
#include "actionret/image.hpp"
#include "actionret/rng.hpp"

namespace actionret {

enum class Split { kTrain, kVal };

std::string split_name(Split s);
std::optional<Split> parse_split(const std::string& s);

// One (image, person box) pair. An image annotated with m persons yields m
// samples sharing image_id and image_path.
struct ImageSample {
  std::string image_id;
  std::string image_path;  // relative to the manifest directory unless absolute
  int width = 0;
  int height = 0;
  BoundingBox person_box;
  int label = -1;
  Split split = Split::kTrain;
  ProposalSet proposals;
};

struct DatasetManifest {
  std::vector<ImageSample> samples;
  std::vector<std::string> class_names;
  std::string root_dir;  // directory the annotation file lives in

  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::string resolve_image_path(const ImageSample& s) const;
  std::vector<size_t> split_indices(Split s) const;
};

// Line-delimited JSON annotations plus a classes file (one name per line,
// index = line number). Malformed records raise with the offending line
// number; records whose image file is missing are skipped with a warning.
DatasetManifest load_manifest(const std::string& annotation_path,
                              const std::string& classes_path);
void save_manifest(const DatasetManifest& manifest, const std::string& annotation_path,
                   const std::string& classes_path);

// Convenience: directory containing annotations.jsonl + classes.txt + images/.
DatasetManifest load_dataset_dir(const std::string& dir);

struct SyntheticConfig {
  int n_classes = 5;
  int images_per_class = 20;
  int image_size = 64;
  int persons_per_image = 1;
  double train_fraction = 2.0 / 3.0;
  int n_distractors = 3;
};

// Renders a desk-scale dataset: per class a distinct person fill colour and a
// distinct contextual object placed at a class-specific offset, so labels are
// recoverable from pixels. Proposals carry the true object box (confidence in
// [0.7,1]) plus random distractors. Deterministic for a fixed seed, including
// the bytes of the emitted annotation file.
DatasetManifest generate_synthetic(const SyntheticConfig& config, uint64_t seed,
                                   const std::string& out_dir);

struct AugmentationPolicy {
  bool hflip = true;
  bool random_crop = true;
  bool color_jitter = true;
  double crop_min_scale = 0.7;
  double jitter_strength = 0.2;
  int input_size = 224;
};

struct AugmentedSample {
  Image image;
  BoundingBox person_box;       // in input-size coordinates
  ProposalSet proposals;        // boxes transformed consistently; degenerate ones dropped
};

// Training-time augmentation. Geometric transforms move person_box and the
// proposal boxes consistently. A crop that would erase the person box is
// resampled (bounded retries) before falling back to a center crop.
AugmentedSample augment(const Image& image, const BoundingBox& person_box,
                        const ProposalSet& proposals, const AugmentationPolicy& policy,
                        Rng& rng);

// Deterministic eval-time transform: resize to input_size only.
AugmentedSample resize_sample(const Image& image, const BoundingBox& person_box,
                              const ProposalSet& proposals, int input_size);

}  // namespace actionret

#endif  // ACTIONRET_DATASET_HPP
