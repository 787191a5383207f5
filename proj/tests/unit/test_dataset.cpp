#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "fgssl/dataset.hpp"
#include "fgssl/errors.hpp"

using namespace fgssl;
namespace fs = std::filesystem;

TEST_CASE("synthetic generator is deterministic per seed") {
  auto [train_a, test_a] = generate_synthetic(4, 3, 2, 16, 9);
  auto [train_b, test_b] = generate_synthetic(4, 3, 2, 16, 9);
  auto [train_c, test_c] = generate_synthetic(4, 3, 2, 16, 10);
  REQUIRE(train_a.size() == 12);
  REQUIRE(test_a.size() == 8);
  CHECK(train_a.num_classes == 4);
  CHECK(train_a.split_tag == "train");
  CHECK(test_a.split_tag == "test");
  bool same = true, differs = false;
  for (int64_t i = 0; i < train_a.size(); ++i) {
    same = same && train_a.samples[i].image.data == train_b.samples[i].image.data;
    differs = differs || train_a.samples[i].image.data != train_c.samples[i].image.data;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("synthetic samples carry small glyph boxes and unique ids") {
  auto [train, test] = generate_synthetic(5, 4, 2, 32, 3);
  std::set<int64_t> ids;
  for (const Dataset* ds : {&train, &test}) {
    for (const Sample& s : ds->samples) {
      ids.insert(s.id);
      REQUIRE(s.glyph_box.has_value());
      const GlyphBox& b = *s.glyph_box;
      CHECK(b.r0 >= 0);
      CHECK(b.c0 >= 0);
      CHECK(b.r1 <= 32);
      CHECK(b.c1 <= 32);
      // The class cue must stay small relative to the frame.
      CHECK(b.area() < 32 * 32 / 20);
      CHECK(s.label >= 0);
      CHECK(s.label < 5);
      for (float v : s.image.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
      }
    }
  }
  CHECK(ids.size() == static_cast<size_t>(train.size() + test.size()));
}

TEST_CASE("generator rejects bad parameters") {
  CHECK_THROWS_AS(generate_synthetic(1, 2, 2, 16, 0), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(3, 0, 2, 16, 0), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(3, 2, 2, 15, 0), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(3, 2, 2, 12, 0), ConfigError);
}

TEST_CASE("semi-supervised split keeps per-class counts") {
  auto [train, test] = generate_synthetic(4, 10, 1, 16, 21);
  SplitSpec spec;
  spec.label_fraction = 0.3;
  spec.seed = 5;
  Dataset labeled = split_semi_supervised(train, spec);
  std::map<int64_t, int64_t> per_class;
  for (const Sample& s : labeled.samples) per_class[s.label]++;
  REQUIRE(per_class.size() == 4);
  for (const auto& [label, count] : per_class) {
    // max(1, round(0.3 * 10)) = 3 per class.
    CHECK(count == 3);
  }
  // Identical spec picks identical sample ids.
  Dataset again = split_semi_supervised(train, spec);
  REQUIRE(again.size() == labeled.size());
  for (int64_t i = 0; i < labeled.size(); ++i) {
    CHECK(again.samples[i].id == labeled.samples[i].id);
  }
}

TEST_CASE("semi-supervised split floors at one sample per class") {
  auto [train, test] = generate_synthetic(3, 4, 1, 16, 2);
  SplitSpec spec;
  spec.label_fraction = 0.01;
  Dataset labeled = split_semi_supervised(train, spec);
  CHECK(labeled.size() == 3);
}

TEST_CASE("semi-supervised split validates the fraction") {
  auto [train, test] = generate_synthetic(2, 2, 1, 16, 2);
  SplitSpec spec;
  spec.label_fraction = 0.0;
  CHECK_THROWS_AS(split_semi_supervised(train, spec), ConfigError);
  spec.label_fraction = 1.5;
  CHECK_THROWS_AS(split_semi_supervised(train, spec), ConfigError);
  spec.label_fraction = 1.0;
  Dataset full = split_semi_supervised(train, spec);
  CHECK(full.size() == train.size());
}

TEST_CASE("dataset root roundtrip preserves samples and boxes") {
  auto [train, test] = generate_synthetic(3, 2, 1, 16, 13);
  const std::string root = (fs::temp_directory_path() / "fgssl_ds_rt").string();
  fs::remove_all(root);
  save_dataset(train, test, root);
  auto [train2, test2] = load_dataset_root(root);
  REQUIRE(train2.size() == train.size());
  REQUIRE(test2.size() == test.size());
  CHECK(train2.num_classes == 3);
  for (int64_t i = 0; i < train.size(); ++i) {
    const Sample& a = train.samples[i];
    const Sample& b = train2.samples[i];
    CHECK(a.id == b.id);
    CHECK(a.label == b.label);
    REQUIRE(b.glyph_box.has_value());
    CHECK(a.glyph_box->r0 == b.glyph_box->r0);
    CHECK(a.glyph_box->c1 == b.glyph_box->c1);
    // Pixels pass through 8-bit quantization once.
    float worst = 0.0f;
    for (size_t p = 0; p < a.image.data.size(); ++p) {
      worst = std::max(worst, std::abs(a.image.data[p] - b.image.data[p]));
    }
    CHECK(worst <= 0.5f / 255.0f + 1e-6f);
  }
  fs::remove_all(root);
}

TEST_CASE("load_directory reports structural problems") {
  const fs::path root = fs::temp_directory_path() / "fgssl_ds_bad";
  fs::remove_all(root);

  SUBCASE("missing directory") {
    CHECK_THROWS_AS(load_directory((root / "nope").string()), IoError);
  }
  SUBCASE("no class directories") {
    fs::create_directories(root);
    CHECK_THROWS_AS(load_directory(root.string()), IoError);
  }
  SUBCASE("empty class directory") {
    fs::create_directories(root / "class_0");
    CHECK_THROWS_AS(load_directory(root.string()), IoError);
  }
  fs::remove_all(root);
}
