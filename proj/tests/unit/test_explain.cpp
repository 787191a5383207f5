#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "fgssl/dataset.hpp"
#include "fgssl/errors.hpp"
#include "fgssl/explain.hpp"
#include "fgssl/model.hpp"
#include "fgssl/rng.hpp"

using namespace fgssl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Image rand_image(int64_t side, uint64_t seed) {
  Image img(side, side);
  Rng rng(seed);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace

TEST_CASE("heatmap matches the analytic single-channel case") {
  // With the class head reading only feature channel 0 at weight 1, the
  // channel weights are W[ch,c]/(h*w) and the map reduces to
  // relu(F_0)/max = F_0/max (relu features are nonnegative).
  Model<double> m(ModelArch{.num_classes = 3}, 8);
  auto& w = m.param("heads.cls.weight").value;
  for (auto& v : w.vec()) v = 0.0;
  w.data()[0 * 3 + 1] = 1.0;  // channel 0 -> class 1
  Image img = rand_image(16, 4);

  Heatmap hm = grad_cam(m, img, 1);
  REQUIRE(hm.h == 4);
  REQUIRE(hm.w == 4);
  REQUIRE(hm.values.size() == 16);

  auto feats = m.backbone(to_tensor<double>(std::vector<Image>{img}));
  double peak = 0.0;
  for (int64_t i = 0; i < 16; ++i) peak = std::max(peak, feats.data()[i]);
  REQUIRE(peak > 0.0);
  for (int64_t i = 0; i < 16; ++i) {
    CHECK(hm.values[static_cast<size_t>(i)] ==
          doctest::Approx(feats.data()[i] / peak).epsilon(1e-5));
  }
}

TEST_CASE("heatmap values are normalized to the unit interval") {
  Model<double> m(ModelArch{.num_classes = 4}, 3);
  Image img = rand_image(16, 9);
  Heatmap hm = grad_cam(m, img, 2);
  float peak = 0.0f;
  for (float v : hm.values) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
    peak = std::max(peak, v);
  }
  // Unless the map is identically zero its peak is exactly one.
  if (peak > 0.0f) CHECK(peak == 1.0f);
  CHECK_THROWS_AS(grad_cam(m, img, 4), ConfigError);
  CHECK_THROWS_AS(grad_cam(m, img, -1), ConfigError);
}

TEST_CASE("scaling the readout weights leaves the normalized map unchanged") {
  Model<double> a(ModelArch{.num_classes = 3}, 5);
  Model<double> b(ModelArch{.num_classes = 3}, 5);
  for (auto& v : b.param("heads.cls.weight").value.vec()) v *= 3.0;
  Image img = rand_image(16, 12);
  Heatmap ha = grad_cam(a, img, 0);
  Heatmap hb = grad_cam(b, img, 0);
  REQUIRE(ha.values.size() == hb.values.size());
  for (size_t i = 0; i < ha.values.size(); ++i) {
    CHECK(ha.values[i] == doctest::Approx(hb.values[i]).epsilon(1e-5));
  }
}

TEST_CASE("a dead readout row yields an all-zero map") {
  Model<double> m(ModelArch{.num_classes = 3}, 7);
  auto& w = m.param("heads.cls.weight").value;
  // Zero the column feeding class 2; its score is constant so the gradient
  // and hence the map vanish.
  for (int64_t ch = 0; ch < 64; ++ch) w.data()[ch * 3 + 2] = 0.0;
  Heatmap hm = grad_cam(m, rand_image(16, 2), 2);
  for (float v : hm.values) CHECK(v == 0.0f);
}

TEST_CASE("heatmaps work for the map-pooling classifier") {
  ModelArch arch;
  arch.mode = TrainMode::db_gce;
  arch.num_classes = 4;
  Model<double> m(arch, 6);
  Heatmap hm = grad_cam(m, rand_image(16, 5), 1);
  CHECK(hm.values.size() == 16);
  for (float v : hm.values) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("upsampling preserves corners and value range") {
  Heatmap hm;
  hm.h = 2;
  hm.w = 2;
  hm.values = {0.0f, 0.4f, 0.8f, 1.0f};
  auto up = upsample_heatmap(hm, 8, 8);
  REQUIRE(up.size() == 64);
  CHECK(up[0] == doctest::Approx(0.0));
  CHECK(up[7] == doctest::Approx(0.4));
  CHECK(up[56] == doctest::Approx(0.8));
  CHECK(up[63] == doctest::Approx(1.0));
  for (float v : up) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("export writes a graymap and an overlay") {
  Model<float> m(ModelArch{.num_classes = 2}, 1);
  Image img = rand_image(16, 3);
  Heatmap hm = grad_cam(m, img, 0);
  const std::string gray = temp_path("fgssl_cam.pgm");
  const std::string overlay = temp_path("fgssl_cam.ppm");
  export_heatmap(hm, img, gray, overlay);

  std::ifstream g(gray, std::ios::binary);
  std::string magic;
  g >> magic;
  CHECK(magic == "P5");
  Image ov = read_pixmap(overlay);
  CHECK(ov.h == 16);
  CHECK(ov.w == 16);
  // Green and blue are the halved base image, independent of the heat; one
  // 8-bit quantization separates them.
  CHECK(std::abs(ov.at(1, 4, 4) - 0.5f * img.at(1, 4, 4)) <= 0.5f / 255.0f + 1e-6f);
  CHECK(std::abs(ov.at(2, 9, 2) - 0.5f * img.at(2, 9, 2)) <= 0.5f / 255.0f + 1e-6f);
  std::remove(gray.c_str());
  std::remove(overlay.c_str());
}

TEST_CASE("localization rate counts argmax hits inside glyph boxes") {
  auto [train, test] = generate_synthetic(3, 1, 3, 16, 31);
  Model<float> m(ModelArch{.num_classes = 3}, 9);
  const double rate = localization_rate(m, test);
  CHECK(rate >= 0.0);
  CHECK(rate <= 100.0);
  // Rate is a multiple of 100/n for n samples.
  const double unit = 100.0 / static_cast<double>(test.size());
  const double ratio = rate / unit;
  CHECK(ratio == doctest::Approx(std::round(ratio)).epsilon(1e-9));

  Dataset empty;
  CHECK_THROWS(localization_rate(m, empty));
  Dataset no_box = test;
  no_box.samples[0].glyph_box.reset();
  CHECK_THROWS(localization_rate(m, no_box));
}
