#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgssl/errors.hpp"
#include "fgssl/tensor.hpp"

namespace fgssl {

// RGB image with float channels in [0,1], stored planar (channel, row, col)
// to match tensor layout.
struct Image {
  int64_t h = 0;
  int64_t w = 0;
  std::vector<float> data;  // 3 * h * w

  Image() = default;
  Image(int64_t height, int64_t width)
      : h(height), w(width), data(static_cast<size_t>(3 * height * width), 0.0f) {
    FGSSL_CHECK(height > 0 && width > 0, "image dims must be positive");
  }

  float& at(int64_t c, int64_t y, int64_t x) {
    return data[static_cast<size_t>((c * h + y) * w + x)];
  }
  float at(int64_t c, int64_t y, int64_t x) const {
    return data[static_cast<size_t>((c * h + y) * w + x)];
  }
  bool empty() const { return data.empty(); }
};

// Binary pixmap I/O. Reading accepts P6 RGB with maxval 255 only; P5 graymaps
// exist as a write-only heatmap format. Written values are clamped to [0,1]
// and quantized with round(v*255), so a write/read trip moves any channel by
// at most 1/510.
Image read_pixmap(const std::string& path);
void write_pixmap(const std::string& path, const Image& img);
void write_pixmap_gray(const std::string& path, int64_t h, int64_t w,
                       const std::vector<float>& plane);

template <class S>
Tensor<S> to_tensor(const Image& img) {
  FGSSL_CHECK(!img.empty(), "to_tensor: empty image");
  std::vector<S> data(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i) data[i] = static_cast<S>(img.data[i]);
  return Tensor<S>::from_data(Shape{3, img.h, img.w}, std::move(data));
}

template <class S>
Tensor<S> to_tensor(const std::vector<Image>& batch) {
  FGSSL_CHECK(!batch.empty(), "to_tensor: empty batch");
  const int64_t h = batch[0].h, w = batch[0].w;
  std::vector<S> data;
  data.reserve(batch.size() * static_cast<size_t>(3 * h * w));
  for (const Image& img : batch) {
    FGSSL_CHECK(img.h == h && img.w == w, "to_tensor: batch images must share dims");
    for (float v : img.data) data.push_back(static_cast<S>(v));
  }
  return Tensor<S>::from_data(Shape{static_cast<int64_t>(batch.size()), 3, h, w}, std::move(data));
}

template <class S>
Image image_from_tensor(const Tensor<S>& t) {
  FGSSL_CHECK(t.rank() == 3 && t.dim(0) == 3, "image_from_tensor: need [3,H,W]");
  Image img(t.dim(1), t.dim(2));
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(t.data()[i]);
  return img;
}

}  // namespace fgssl
