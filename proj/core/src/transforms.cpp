#include "fgssl/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fgssl {

namespace {

Image rotate_once_ccw(const Image& in) {
  Image out(in.w, in.h);
  for (int64_t c = 0; c < 3; ++c) {
    for (int64_t y = 0; y < in.h; ++y) {
      for (int64_t x = 0; x < in.w; ++x) {
        out.at(c, in.w - 1 - x, y) = in.at(c, y, x);
      }
    }
  }
  return out;
}

void copy_cell(const Image& src, int64_t sy, int64_t sx, Image& dst, int64_t dy, int64_t dx,
               int64_t ch, int64_t cw) {
  for (int64_t c = 0; c < 3; ++c) {
    for (int64_t y = 0; y < ch; ++y) {
      for (int64_t x = 0; x < cw; ++x) {
        dst.at(c, dy + y, dx + x) = src.at(c, sy + y, sx + x);
      }
    }
  }
}

// Stable-sorts indices by key i + d_i and returns destination[i] = new
// position of original index i. Stability makes equal keys keep their
// original relative order.
std::vector<int64_t> sorted_destinations(int64_t k, int64_t D, Rng& rng) {
  std::vector<int64_t> key(static_cast<size_t>(k));
  for (int64_t i = 0; i < k; ++i) key[static_cast<size_t>(i)] = i + rng.uniform_int(-D, D);
  std::vector<int64_t> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&key](int64_t a, int64_t b) {
    return key[static_cast<size_t>(a)] < key[static_cast<size_t>(b)];
  });
  std::vector<int64_t> dest(static_cast<size_t>(k));
  for (int64_t pos = 0; pos < k; ++pos) dest[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos;
  return dest;
}

}  // namespace

bool RegionPermutation::is_identity() const {
  for (int64_t cell = 0; cell < k * k; ++cell) {
    if (origin_of[static_cast<size_t>(cell)] != std::make_pair(cell / k, cell % k)) return false;
  }
  return true;
}

Image rotate90(const Image& img, int r) {
  FGSSL_CHECK(r >= 0 && r <= 3, "rotate90: r must be in [0,3]");
  FGSSL_CHECK(r % 2 == 0 || img.h == img.w, "rotate90: odd quarter-turns need a square image");
  Image out = img;
  for (int i = 0; i < r; ++i) out = rotate_once_ccw(out);
  return out;
}

Image resize(const Image& img, int64_t out_h, int64_t out_w) {
  FGSSL_CHECK(out_h >= 1 && out_w >= 1, "resize: output dims must be >= 1");
  FGSSL_CHECK(!img.empty(), "resize: empty image");
  if (out_h == img.h && out_w == img.w) return img;
  Image out(out_h, out_w);
  const double sy = out_h > 1 ? static_cast<double>(img.h - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(img.w - 1) / static_cast<double>(out_w - 1) : 0.0;
  for (int64_t y = 0; y < out_h; ++y) {
    const double fy = y * sy;
    const int64_t y0 = static_cast<int64_t>(fy);
    const int64_t y1 = std::min<int64_t>(y0 + 1, img.h - 1);
    const float wy = static_cast<float>(fy - static_cast<double>(y0));
    for (int64_t x = 0; x < out_w; ++x) {
      const double fx = x * sx;
      const int64_t x0 = static_cast<int64_t>(fx);
      const int64_t x1 = std::min<int64_t>(x0 + 1, img.w - 1);
      const float wx = static_cast<float>(fx - static_cast<double>(x0));
      for (int64_t c = 0; c < 3; ++c) {
        const float top = img.at(c, y0, x0) * (1.0f - wx) + img.at(c, y0, x1) * wx;
        const float bot = img.at(c, y1, x0) * (1.0f - wx) + img.at(c, y1, x1) * wx;
        out.at(c, y, x) = top * (1.0f - wy) + bot * wy;
      }
    }
  }
  return out;
}

Image center_crop(const Image& img, int64_t out_h, int64_t out_w) {
  FGSSL_CHECK(out_h >= 1 && out_w >= 1 && out_h <= img.h && out_w <= img.w,
              "center_crop: crop larger than image");
  const int64_t oy = (img.h - out_h) / 2;
  const int64_t ox = (img.w - out_w) / 2;
  Image out(out_h, out_w);
  copy_cell(img, oy, ox, out, 0, 0, out_h, out_w);
  return out;
}

Image random_crop(const Image& img, int64_t out_h, int64_t out_w, Rng& rng) {
  FGSSL_CHECK(out_h >= 1 && out_w >= 1 && out_h <= img.h && out_w <= img.w,
              "random_crop: crop larger than image");
  // Row offset drawn before column offset; part of the stream contract.
  const int64_t oy = rng.uniform_int(0, img.h - out_h);
  const int64_t ox = rng.uniform_int(0, img.w - out_w);
  Image out(out_h, out_w);
  copy_cell(img, oy, ox, out, 0, 0, out_h, out_w);
  return out;
}

RegionPermutation region_permutation(int64_t k, int64_t D, Rng& rng) {
  FGSSL_CHECK(k >= 2, "region_permutation: k must be >= 2");
  FGSSL_CHECK(D >= 0 && D < k, "region_permutation: need 0 <= D < k");
  RegionPermutation p;
  p.k = k;
  p.D = D;
  p.row_perms.reserve(static_cast<size_t>(k));
  p.col_perms.reserve(static_cast<size_t>(k));
  for (int64_t j = 0; j < k; ++j) p.row_perms.push_back(sorted_destinations(k, D, rng));
  for (int64_t i = 0; i < k; ++i) p.col_perms.push_back(sorted_destinations(k, D, rng));
  p.origin_of.assign(static_cast<size_t>(k * k), {0, 0});
  for (int64_t j = 0; j < k; ++j) {
    for (int64_t i = 0; i < k; ++i) {
      const int64_t c = p.row_perms[static_cast<size_t>(j)][static_cast<size_t>(i)];
      const int64_t r = p.col_perms[static_cast<size_t>(c)][static_cast<size_t>(j)];
      p.origin_of[static_cast<size_t>(r * k + c)] = {j, i};
    }
  }
  return p;
}

Image apply_region_shuffle(const Image& img, const RegionPermutation& perm) {
  const int64_t k = perm.k;
  FGSSL_CHECK(k >= 2, "apply_region_shuffle: invalid permutation");
  FGSSL_CHECK(img.h % k == 0 && img.w % k == 0,
              "apply_region_shuffle: image dims must be divisible by k");
  const int64_t ch = img.h / k, cw = img.w / k;
  Image out(img.h, img.w);
  for (int64_t a = 0; a < k; ++a) {
    for (int64_t b = 0; b < k; ++b) {
      const auto [si, sj] = perm.origin_of[static_cast<size_t>(a * k + b)];
      copy_cell(img, si * ch, sj * cw, out, a * ch, b * cw, ch, cw);
    }
  }
  return out;
}

Image undo_region_shuffle(const Image& shuffled, const RegionPermutation& perm) {
  const int64_t k = perm.k;
  FGSSL_CHECK(k >= 2, "undo_region_shuffle: invalid permutation");
  FGSSL_CHECK(shuffled.h % k == 0 && shuffled.w % k == 0,
              "undo_region_shuffle: image dims must be divisible by k");
  const int64_t ch = shuffled.h / k, cw = shuffled.w / k;
  Image out(shuffled.h, shuffled.w);
  for (int64_t a = 0; a < k; ++a) {
    for (int64_t b = 0; b < k; ++b) {
      const auto [si, sj] = perm.origin_of[static_cast<size_t>(a * k + b)];
      copy_cell(shuffled, a * ch, b * cw, out, si * ch, sj * cw, ch, cw);
    }
  }
  return out;
}

std::vector<float> location_targets(const RegionPermutation& perm) {
  const int64_t k = perm.k;
  FGSSL_CHECK(k >= 2, "location_targets: invalid permutation");
  std::vector<float> t(static_cast<size_t>(k * k * 2));
  for (int64_t cell = 0; cell < k * k; ++cell) {
    const auto [si, sj] = perm.origin_of[static_cast<size_t>(cell)];
    t[static_cast<size_t>(cell * 2)] = static_cast<float>(2.0 * static_cast<double>(si) / static_cast<double>(k - 1) - 1.0);
    t[static_cast<size_t>(cell * 2 + 1)] = static_cast<float>(2.0 * static_cast<double>(sj) / static_cast<double>(k - 1) - 1.0);
  }
  return t;
}

std::vector<float> identity_location_targets(int64_t k) {
  FGSSL_CHECK(k >= 2, "identity_location_targets: k must be >= 2");
  std::vector<float> t(static_cast<size_t>(k * k * 2));
  for (int64_t a = 0; a < k; ++a) {
    for (int64_t b = 0; b < k; ++b) {
      t[static_cast<size_t>((a * k + b) * 2)] = static_cast<float>(2.0 * static_cast<double>(a) / static_cast<double>(k - 1) - 1.0);
      t[static_cast<size_t>((a * k + b) * 2 + 1)] = static_cast<float>(2.0 * static_cast<double>(b) / static_cast<double>(k - 1) - 1.0);
    }
  }
  return t;
}

PatchSet extract_jigsaw_patches(const Image& img, int64_t resize_dim, int64_t center_crop_dim,
                                int64_t grid, int64_t patch_size, Rng& rng) {
  FGSSL_CHECK(grid == 2 || grid == 3, "extract_jigsaw_patches: grid must be 2 or 3");
  FGSSL_CHECK(resize_dim >= 1, "extract_jigsaw_patches: resize_dim must be >= 1");
  Image work = resize(img, resize_dim, resize_dim);
  if (center_crop_dim > 0) {
    FGSSL_CHECK(center_crop_dim <= resize_dim, "extract_jigsaw_patches: crop exceeds resized image");
    work = center_crop(work, center_crop_dim, center_crop_dim);
  }
  FGSSL_CHECK(work.h % grid == 0, "extract_jigsaw_patches: grid must divide the working size");
  const int64_t cell = work.h / grid;
  FGSSL_CHECK(patch_size >= 1 && patch_size <= cell, "extract_jigsaw_patches: patch larger than cell");
  PatchSet set;
  set.grid = grid;
  for (int64_t i = 0; i < grid; ++i) {
    for (int64_t j = 0; j < grid; ++j) {
      const int64_t oy = i * cell + rng.uniform_int(0, cell - patch_size);
      const int64_t ox = j * cell + rng.uniform_int(0, cell - patch_size);
      Image patch(patch_size, patch_size);
      copy_cell(work, oy, ox, patch, 0, 0, patch_size, patch_size);
      set.patches.push_back(std::move(patch));
      set.source_cells.emplace_back(i, j);
    }
  }
  return set;
}

}  // namespace fgssl
