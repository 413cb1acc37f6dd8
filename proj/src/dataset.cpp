#include "actionret/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace actionret {

std::string split_name(Split s) { return s == Split::kTrain ? "train" : "val"; }

std::optional<Split> parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  return std::nullopt;
}

std::string DatasetManifest::resolve_image_path(const ImageSample& s) const {
  fs::path p(s.image_path);
  if (p.is_absolute()) return p.string();
  return (fs::path(root_dir) / p).string();
}

std::vector<size_t> DatasetManifest::split_indices(Split s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == s) out.push_back(i);
  }
  return out;
}

namespace {

[[noreturn]] void record_error(const std::string& path, int line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

BoundingBox parse_box(const json& arr, const std::string& path, int line, const char* what) {
  if (!arr.is_array() || arr.size() != 4) {
    record_error(path, line, std::string(what) + " must be an array of 4 numbers");
  }
  for (const auto& v : arr) {
    if (!v.is_number()) record_error(path, line, std::string(what) + " must contain numbers");
  }
  return BoundingBox(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                     arr[3].get<double>());
}

json box_to_json(const BoundingBox& b) {
  return json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

// HSV (h in [0,1)) to RGB, s=v handled by caller.
void hsv_to_rgb(double h, double s, double v, float& r, float& g, float& b) {
  double hh = h * 6.0;
  int i = static_cast<int>(hh) % 6;
  double f = hh - std::floor(hh);
  double p = v * (1.0 - s);
  double q = v * (1.0 - s * f);
  double t = v * (1.0 - s * (1.0 - f));
  double rr, gg, bb;
  switch (i) {
    case 0: rr = v; gg = t; bb = p; break;
    case 1: rr = q; gg = v; bb = p; break;
    case 2: rr = p; gg = v; bb = t; break;
    case 3: rr = p; gg = q; bb = v; break;
    case 4: rr = t; gg = p; bb = v; break;
    default: rr = v; gg = p; bb = q; break;
  }
  r = static_cast<float>(rr);
  g = static_cast<float>(gg);
  b = static_cast<float>(bb);
}

}  // namespace

DatasetManifest load_manifest(const std::string& annotation_path,
                              const std::string& classes_path) {
  DatasetManifest m;
  m.root_dir = fs::path(annotation_path).parent_path().string();
  if (m.root_dir.empty()) m.root_dir = ".";

  std::ifstream cls(classes_path);
  if (!cls) throw std::runtime_error("cannot open classes file: " + classes_path);
  std::string line;
  while (std::getline(cls, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) m.class_names.push_back(line);
  }
  if (m.class_names.empty()) throw std::runtime_error("classes file is empty: " + classes_path);

  std::ifstream ann(annotation_path);
  if (!ann) throw std::runtime_error("cannot open annotation file: " + annotation_path);

  int line_no = 0;
  int skipped = 0;
  while (std::getline(ann, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      record_error(annotation_path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) record_error(annotation_path, line_no, "record is not an object");
    for (const char* key : {"image_id", "image_path", "width", "height", "person_box",
                            "label", "split", "proposals"}) {
      if (!rec.contains(key)) {
        record_error(annotation_path, line_no, std::string("missing key '") + key + "'");
      }
    }

    ImageSample s;
    if (!rec["image_id"].is_string()) record_error(annotation_path, line_no, "image_id must be a string");
    s.image_id = rec["image_id"].get<std::string>();
    if (!rec["image_path"].is_string()) record_error(annotation_path, line_no, "image_path must be a string");
    s.image_path = rec["image_path"].get<std::string>();
    if (!rec["width"].is_number_integer() || !rec["height"].is_number_integer()) {
      record_error(annotation_path, line_no, "width/height must be integers");
    }
    s.width = rec["width"].get<int>();
    s.height = rec["height"].get<int>();
    if (s.width < 1 || s.height < 1) record_error(annotation_path, line_no, "width/height must be >= 1");

    BoundingBox raw = parse_box(rec["person_box"], annotation_path, line_no, "person_box");
    try {
      s.person_box = clamp_to_image(raw, s.width, s.height);
    } catch (const std::invalid_argument&) {
      record_error(annotation_path, line_no,
                   "person_box of record '" + s.image_id + "' is degenerate or outside the image");
    }

    if (!rec["label"].is_number_integer()) record_error(annotation_path, line_no, "label must be an integer");
    s.label = rec["label"].get<int>();
    if (s.label < 0 || s.label >= m.num_classes()) {
      record_error(annotation_path, line_no,
                   "label " + std::to_string(s.label) + " outside [0," +
                       std::to_string(m.num_classes()) + ")");
    }

    if (!rec["split"].is_string()) record_error(annotation_path, line_no, "split must be a string");
    auto sp = parse_split(rec["split"].get<std::string>());
    if (!sp) record_error(annotation_path, line_no, "split must be \"train\" or \"val\"");
    s.split = *sp;

    if (!rec["proposals"].is_array()) record_error(annotation_path, line_no, "proposals must be an array");
    s.proposals.image_id = s.image_id;
    for (const auto& pj : rec["proposals"]) {
      if (!pj.is_object() || !pj.contains("box") || !pj.contains("score")) {
        record_error(annotation_path, line_no, "proposal must be an object with box and score");
      }
      if (!pj["score"].is_number()) record_error(annotation_path, line_no, "proposal score must be a number");
      double score = pj["score"].get<double>();
      if (score < 0.0 || score > 1.0) {
        record_error(annotation_path, line_no, "proposal score outside [0,1]");
      }
      BoundingBox pb = parse_box(pj["box"], annotation_path, line_no, "proposal box");
      try {
        pb = clamp_to_image(pb, s.width, s.height);
      } catch (const std::invalid_argument&) {
        std::cerr << "warning: " << annotation_path << ":" << line_no
                  << ": dropping degenerate proposal box\n";
        continue;
      }
      s.proposals.proposals.push_back(ScoredProposal{pb, score});
    }

    std::string img = m.resolve_image_path(s);
    if (!fs::exists(img)) {
      std::cerr << "warning: " << annotation_path << ":" << line_no << ": image file missing ("
                << img << "), sample skipped\n";
      ++skipped;
      continue;
    }
    m.samples.push_back(std::move(s));
  }
  if (skipped > 0) {
    std::cerr << "warning: skipped " << skipped << " samples with missing images\n";
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& annotation_path,
                   const std::string& classes_path) {
  std::ofstream cls(classes_path);
  if (!cls) throw std::runtime_error("cannot write classes file: " + classes_path);
  for (const auto& name : manifest.class_names) cls << name << "\n";

  std::ofstream ann(annotation_path);
  if (!ann) throw std::runtime_error("cannot write annotation file: " + annotation_path);
  for (const auto& s : manifest.samples) {
    json rec;
    rec["image_id"] = s.image_id;
    rec["image_path"] = s.image_path;
    rec["width"] = s.width;
    rec["height"] = s.height;
    rec["person_box"] = box_to_json(s.person_box);
    rec["label"] = s.label;
    rec["split"] = split_name(s.split);
    json props = json::array();
    for (const auto& p : s.proposals.proposals) {
      props.push_back(json{{"box", box_to_json(p.box)}, {"score", p.confidence}});
    }
    rec["proposals"] = props;
    ann << rec.dump() << "\n";
  }
}

DatasetManifest load_dataset_dir(const std::string& dir) {
  return load_manifest((fs::path(dir) / "annotations.jsonl").string(),
                       (fs::path(dir) / "classes.txt").string());
}

DatasetManifest generate_synthetic(const SyntheticConfig& config, uint64_t seed,
                                   const std::string& out_dir) {
  if (config.n_classes < 2) throw std::invalid_argument("generate_synthetic: n_classes must be >= 2");
  if (config.images_per_class < 2) {
    throw std::invalid_argument("generate_synthetic: images_per_class must be >= 2");
  }
  if (config.image_size < 32) throw std::invalid_argument("generate_synthetic: image_size must be >= 32");
  if (config.persons_per_image < 1) {
    throw std::invalid_argument("generate_synthetic: persons_per_image must be >= 1");
  }

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "images", ec);
  if (ec) throw std::runtime_error("generate_synthetic: cannot create output directory " + out_dir);

  const int n = config.n_classes;
  const int size = config.image_size;
  const double s = static_cast<double>(size);

  DatasetManifest m;
  m.root_dir = out_dir;
  for (int c = 0; c < n; ++c) m.class_names.push_back("action_" + std::to_string(c));

  Rng rng(seed);
  int train_per_class =
      static_cast<int>(std::lround(config.train_fraction * config.images_per_class));
  train_per_class = std::clamp(train_per_class, 1, config.images_per_class - 1);

  int image_counter = 0;
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < config.images_per_class; ++i) {
      std::string image_id = "img_" + std::to_string(image_counter);
      std::string rel_path = "images/" + image_id + ".ppm";
      Split split = (i < train_per_class) ? Split::kTrain : Split::kVal;

      Image img(size, size);
      float bg = static_cast<float>(0.75 + 0.1 * rng.uniform());
      img.fill(bg, bg, bg);
      // mild background speckle
      for (int sp = 0; sp < size; ++sp) {
        int x = rng.uniform_int(0, size - 1);
        int y = rng.uniform_int(0, size - 1);
        float v = static_cast<float>(0.6 + 0.3 * rng.uniform());
        img.at(0, y, x) = v;
        img.at(1, y, x) = v;
        img.at(2, y, x) = v;
      }

      // Each person occupies its own horizontal band so multi-person images
      // stay unambiguous.
      for (int p = 0; p < config.persons_per_image; ++p) {
        int person_class = (c + p) % n;
        double band_w = s / config.persons_per_image;
        double band_x0 = p * band_w;

        double pw = (0.22 + 0.10 * rng.uniform()) * band_w;
        double ph = (0.35 + 0.15 * rng.uniform()) * s;
        double px = band_x0 + (0.12 + 0.25 * rng.uniform()) * band_w;
        double py = (0.15 + 0.25 * rng.uniform()) * s;
        BoundingBox person(px, py, std::min(px + pw, band_x0 + band_w - 1.0),
                           std::min(py + ph, s - 1.0));
        person = clamp_to_image(person, s, s);

        float pr, pg, pb;
        hsv_to_rgb(static_cast<double>(person_class) / n, 0.9, 0.85, pr, pg, pb);
        fill_rect(img, static_cast<int>(person.x_min), static_cast<int>(person.y_min),
                  static_cast<int>(person.x_max), static_cast<int>(person.y_max), pr, pg, pb);

        // Class-specific contextual object: direction and colour depend on the
        // class; the box overlaps the person slightly so IoU-based ranking
        // picks it up.
        double angle = 2.0 * M_PI * person_class / n;
        double ow = (0.5 + 0.2 * rng.uniform()) * (person.x_max - person.x_min);
        double oh = (0.3 + 0.2 * rng.uniform()) * (person.y_max - person.y_min);
        double pcx = 0.5 * (person.x_min + person.x_max);
        double pcy = 0.5 * (person.y_min + person.y_max);
        double reach = 0.5 * std::hypot(person.x_max - person.x_min, person.y_max - person.y_min);
        double ocx = pcx + std::cos(angle) * reach * 0.9;
        double ocy = pcy + std::sin(angle) * reach * 0.9;
        BoundingBox object(ocx - ow / 2, ocy - oh / 2, ocx + ow / 2, ocy + oh / 2);
        object = clamp_to_image(object, s, s);
        float orr, org, orb;
        hsv_to_rgb(std::fmod(static_cast<double>(person_class) / n + 0.5, 1.0), 0.95, 0.6,
                   orr, org, orb);
        fill_rect(img, static_cast<int>(object.x_min), static_cast<int>(object.y_min),
                  static_cast<int>(object.x_max), static_cast<int>(object.y_max), orr, org, orb);

        ImageSample sample;
        sample.image_id = image_id;
        sample.image_path = rel_path;
        sample.width = size;
        sample.height = size;
        sample.person_box = person;
        sample.label = person_class;
        sample.split = split;
        sample.proposals.image_id = image_id;
        sample.proposals.proposals.push_back(
            ScoredProposal{object, 0.7 + 0.3 * rng.uniform()});
        for (int d = 0; d < config.n_distractors; ++d) {
          double dw = (0.08 + 0.2 * rng.uniform()) * s;
          double dh = (0.08 + 0.2 * rng.uniform()) * s;
          double dx = rng.uniform(0.0, s - dw - 1.0);
          double dy = rng.uniform(0.0, s - dh - 1.0);
          sample.proposals.proposals.push_back(
              ScoredProposal{BoundingBox(dx, dy, dx + dw, dy + dh), rng.uniform()});
        }
        m.samples.push_back(std::move(sample));
      }

      write_ppm(img, (fs::path(out_dir) / rel_path).string());
      ++image_counter;
    }
  }

  save_manifest(m, (fs::path(out_dir) / "annotations.jsonl").string(),
                (fs::path(out_dir) / "classes.txt").string());
  return m;
}

namespace {

BoundingBox scale_box(const BoundingBox& b, double sx, double sy) {
  return BoundingBox(b.x_min * sx, b.y_min * sy, b.x_max * sx, b.y_max * sy);
}

BoundingBox hflip_box(const BoundingBox& b, double width) {
  return BoundingBox(width - b.x_max, b.y_min, width - b.x_min, b.y_max);
}

// Shift into crop frame and clamp; nullopt when nothing remains.
std::optional<BoundingBox> crop_box(const BoundingBox& b, int cx0, int cy0, int cw, int ch) {
  BoundingBox shifted(b.x_min - cx0, b.y_min - cy0, b.x_max - cx0, b.y_max - cy0);
  try {
    return clamp_to_image(shifted, cw, ch);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

AugmentedSample augment(const Image& image, const BoundingBox& person_box,
                        const ProposalSet& proposals, const AugmentationPolicy& policy,
                        Rng& rng) {
  Image work = image;
  BoundingBox person = person_box;
  ProposalSet props = proposals;

  if (policy.random_crop) {
    const int kRetries = 10;
    bool applied = false;
    for (int attempt = 0; attempt < kRetries && !applied; ++attempt) {
      double scale = rng.uniform(policy.crop_min_scale, 1.0);
      int cw = std::max(8, static_cast<int>(std::lround(scale * image.width)));
      int ch = std::max(8, static_cast<int>(std::lround(scale * image.height)));
      int cx0 = rng.uniform_int(0, image.width - cw);
      int cy0 = rng.uniform_int(0, image.height - ch);
      auto boxed = crop_box(person, cx0, cy0, cw, ch);
      if (!boxed) continue;
      work = crop(image, cx0, cy0, cw, ch);
      person = *boxed;
      ProposalSet kept;
      kept.image_id = props.image_id;
      for (const auto& p : props.proposals) {
        auto cb = crop_box(p.box, cx0, cy0, cw, ch);
        if (cb) kept.proposals.push_back(ScoredProposal{*cb, p.confidence});
      }
      props = std::move(kept);
      applied = true;
    }
    if (!applied) {
      // center crop fallback, widened to the whole image if the person box
      // still vanishes
      double scale = policy.crop_min_scale + (1.0 - policy.crop_min_scale) / 2.0;
      int cw = std::max(8, static_cast<int>(std::lround(scale * image.width)));
      int ch = std::max(8, static_cast<int>(std::lround(scale * image.height)));
      int cx0 = (image.width - cw) / 2;
      int cy0 = (image.height - ch) / 2;
      auto boxed = crop_box(person, cx0, cy0, cw, ch);
      if (boxed) {
        work = crop(image, cx0, cy0, cw, ch);
        person = *boxed;
        ProposalSet kept;
        kept.image_id = props.image_id;
        for (const auto& p : props.proposals) {
          auto cb = crop_box(p.box, cx0, cy0, cw, ch);
          if (cb) kept.proposals.push_back(ScoredProposal{*cb, p.confidence});
        }
        props = std::move(kept);
      }
    }
  }

  // resize to the network input size
  if (work.width != policy.input_size || work.height != policy.input_size) {
    double sx = static_cast<double>(policy.input_size) / work.width;
    double sy = static_cast<double>(policy.input_size) / work.height;
    work = resize_bilinear(work, policy.input_size, policy.input_size);
    person = scale_box(person, sx, sy);
    for (auto& p : props.proposals) p.box = scale_box(p.box, sx, sy);
  }

  if (policy.hflip && rng.uniform() < 0.5) {
    work = hflip(work);
    person = hflip_box(person, work.width);
    for (auto& p : props.proposals) p.box = hflip_box(p.box, work.width);
  }

  if (policy.color_jitter) {
    double j = policy.jitter_strength;
    float brightness = static_cast<float>(1.0 + rng.uniform(-j, j));
    float contrast = static_cast<float>(1.0 + rng.uniform(-j, j));
    double mean = 0.0;
    for (float v : work.data) mean += v;
    float fmean = static_cast<float>(mean / work.data.size());
    for (float& v : work.data) {
      v = std::clamp((v * brightness - fmean) * contrast + fmean, 0.0f, 1.0f);
    }
  }

  return AugmentedSample{std::move(work), person, std::move(props)};
}

AugmentedSample resize_sample(const Image& image, const BoundingBox& person_box,
                              const ProposalSet& proposals, int input_size) {
  AugmentedSample out;
  out.person_box = person_box;
  out.proposals = proposals;
  if (image.width != input_size || image.height != input_size) {
    double sx = static_cast<double>(input_size) / image.width;
    double sy = static_cast<double>(input_size) / image.height;
    out.image = resize_bilinear(image, input_size, input_size);
    out.person_box = scale_box(person_box, sx, sy);
    for (auto& p : out.proposals.proposals) p.box = scale_box(p.box, sx, sy);
  } else {
    out.image = image;
  }
  return out;
}

}  // namespace actionret
