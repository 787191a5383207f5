#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fgssl/image.hpp"

namespace fgssl {

// Half-open pixel rectangle [r0,r1) x [c0,c1) marking the class glyph.
struct GlyphBox {
  int64_t r0 = 0, c0 = 0, r1 = 0, c1 = 0;
  bool contains(int64_t r, int64_t c) const { return r >= r0 && r < r1 && c >= c0 && c < c1; }
  int64_t area() const { return (r1 - r0) * (c1 - c0); }
};

struct Sample {
  Image image;
  int64_t label = 0;
  int64_t id = 0;
  std::optional<GlyphBox> glyph_box;
};

struct Dataset {
  std::vector<Sample> samples;
  int64_t num_classes = 0;
  std::string split_tag;  // "train", "test", or empty

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
};

struct SplitSpec {
  double label_fraction = 1.0;
  uint64_t seed = 0;
};

// Procedural fine-grained dataset: every sample shares a centered body
// silhouette; classes differ only in a small shape+color glyph placed at a
// random spot inside the silhouette. Background tint, vertical shading,
// position jitter, scale, and pixel noise vary per sample. Same seed, same
// bytes.
std::pair<Dataset, Dataset> generate_synthetic(int64_t num_classes, int64_t per_class_train,
                                               int64_t per_class_test, int64_t image_size,
                                               uint64_t seed);

// Reads one split tree laid out as <root>/class_<k>/*.ppm. Labels follow
// class directory names sorted lexicographically; files are visited in
// lexicographic order. All-digit file stems become sample ids; otherwise ids
// are position indices.
Dataset load_directory(const std::string& path);

// Stratified label-fraction subset: per class, max(1, round(fraction*count))
// samples chosen deterministically from spec.seed. Original sample order is
// preserved. fraction 1 returns the dataset unchanged.
Dataset split_semi_supervised(const Dataset& train, const SplitSpec& spec);

// Writes <root>/{train,test}/class_<k>/<id>.ppm plus <root>/manifest.txt
// (one line per sample: id, split, label, glyph box).
void save_dataset(const Dataset& train, const Dataset& test, const std::string& root);

// Loads train/ and test/ splits and, when manifest.txt is present, reattaches
// glyph boxes by sample id.
std::pair<Dataset, Dataset> load_dataset_root(const std::string& root);

}  // namespace fgssl
