#pragma once

// Grad-CAM heatmaps over the final backbone features, image export, and a
// box-hit localization metric against the synthetic glyph boxes.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fgssl/dataset.hpp"
#include "fgssl/errors.hpp"
#include "fgssl/image.hpp"
#include "fgssl/model.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/tensor.hpp"
#include "fgssl/transforms.hpp"

namespace fgssl {

struct Heatmap {
  int64_t h = 0, w = 0;
  std::vector<float> values;  // row-major, max-normalized to [0,1]
  int64_t class_index = 0;
  int64_t sample_id = 0;
};

// Channel weights are the spatial means of d(score)/d(feature map); the map
// is relu of the weighted channel sum, then max-normalized (an all-zero map
// stays zero).
template <class S>
Heatmap grad_cam(Model<S>& model, const Image& image, int64_t class_index, int64_t sample_id = 0) {
  if (class_index < 0 || class_index >= model.arch().num_classes) {
    throw ConfigError("grad_cam: class index " + std::to_string(class_index) + " out of range");
  }
  GradGraph<S> graph;
  TapeScope<S> scope(graph);
  Tensor<S> x = to_tensor<S>(std::vector<Image>{image});
  Tensor<S> feats = model.backbone(x);  // [1,C,h,w]
  Tensor<S> scores = model.class_scores(feats);
  Tensor<S> score = ops::reshape(ops::select_index(scores, {class_index}), Shape{});
  model.zero_grad();
  graph.backward(score);
  FGSSL_CHECK(feats.has_grad(), "grad_cam: no gradient reached the feature maps");

  const int64_t c = feats.dim(1), h = feats.dim(2), w = feats.dim(3);
  const S* f = feats.data();
  const std::vector<S>& g = feats.grad_vec();
  Heatmap hm;
  hm.h = h;
  hm.w = w;
  hm.class_index = class_index;
  hm.sample_id = sample_id;
  hm.values.assign(static_cast<size_t>(h * w), 0.0f);
  for (int64_t ch = 0; ch < c; ++ch) {
    double wsum = 0.0;
    for (int64_t i = 0; i < h * w; ++i) wsum += static_cast<double>(g[static_cast<size_t>(ch * h * w + i)]);
    const double weight = wsum / static_cast<double>(h * w);
    for (int64_t i = 0; i < h * w; ++i) {
      hm.values[static_cast<size_t>(i)] +=
          static_cast<float>(weight * static_cast<double>(f[ch * h * w + i]));
    }
  }
  float peak = 0.0f;
  for (auto& v : hm.values) {
    v = std::max(v, 0.0f);
    peak = std::max(peak, v);
  }
  if (peak > 0.0f) {
    for (auto& v : hm.values) v /= peak;
  }
  return hm;
}

// Corner-aligned bilinear upsampling to the display resolution.
inline std::vector<float> upsample_heatmap(const Heatmap& hm, int64_t out_h, int64_t out_w) {
  Image tmp(hm.h, hm.w);
  for (int64_t c = 0; c < 3; ++c) {
    for (int64_t i = 0; i < hm.h * hm.w; ++i) {
      tmp.data[static_cast<size_t>(c * hm.h * hm.w + i)] = hm.values[static_cast<size_t>(i)];
    }
  }
  Image up = resize(tmp, out_h, out_w);
  return std::vector<float>(up.data.begin(), up.data.begin() + out_h * out_w);
}

// Writes the upsampled map as a P5 graymap and a P6 overlay blending
// 0.5*image + 0.5*heat into the red channel.
inline void export_heatmap(const Heatmap& hm, const Image& base, const std::string& path_gray,
                           const std::string& path_overlay) {
  FGSSL_CHECK(!base.empty(), "export_heatmap: empty base image");
  const auto up = upsample_heatmap(hm, base.h, base.w);
  write_pixmap_gray(path_gray, base.h, base.w, up);
  Image overlay(base.h, base.w);
  const int64_t plane = base.h * base.w;
  for (int64_t i = 0; i < plane; ++i) {
    overlay.data[static_cast<size_t>(i)] =
        0.5f * base.data[static_cast<size_t>(i)] + 0.5f * up[static_cast<size_t>(i)];
    overlay.data[static_cast<size_t>(plane + i)] = 0.5f * base.data[static_cast<size_t>(plane + i)];
    overlay.data[static_cast<size_t>(2 * plane + i)] =
        0.5f * base.data[static_cast<size_t>(2 * plane + i)];
  }
  write_pixmap(path_overlay, overlay);
}

// Percentage of test samples whose upsampled-heatmap argmax (ties resolve to
// the first row-major cell) falls inside the sample's glyph box. Heatmaps
// are computed on the raw images, whose coordinates the boxes live in.
template <class S>
double localization_rate(Model<S>& model, const Dataset& test) {
  FGSSL_CHECK(!test.samples.empty(), "localization_rate: empty test set");
  int64_t hits = 0;
  for (const Sample& s : test.samples) {
    FGSSL_CHECK(s.glyph_box.has_value(), "localization_rate: sample " + std::to_string(s.id) +
                                             " carries no glyph box");
    Heatmap hm = grad_cam(model, s.image, s.label, s.id);
    const auto up = upsample_heatmap(hm, s.image.h, s.image.w);
    int64_t best = 0;
    for (int64_t i = 1; i < s.image.h * s.image.w; ++i) {
      if (up[static_cast<size_t>(i)] > up[static_cast<size_t>(best)]) best = i;
    }
    if (s.glyph_box->contains(best / s.image.w, best % s.image.w)) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(test.samples.size());
}

}  // namespace fgssl
