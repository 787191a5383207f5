#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "fgssl/dataset.hpp"
#include "fgssl/errors.hpp"
#include "fgssl/rng.hpp"

namespace fgssl {

namespace {

struct Rgb {
  float r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  const double i = std::floor(h * 6.0);
  const double f = h * 6.0 - i;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - f * s);
  const double t = v * (1.0 - (1.0 - f) * s);
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(i) % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    case 5: r = v; g = p; b = q; break;
  }
  return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

// Golden-angle hue walk gives every class its own hue; the jitter stays well
// under the golden-angle spacing so hues never cross. Glyphs are bright so
// the local evidence is readable; the decoys below share the same brightness
// band with uniform hues, so image-level color statistics stay ambiguous and
// the class hue must be read off the one crisp stencil.
Rgb glyph_color(int64_t color_id, Rng& rng) {
  const double hue = std::fmod(0.02 + 0.61803398875 * static_cast<double>(color_id), 1.0) +
                     rng.uniform(-0.01, 0.01);
  const double s = 0.80 + rng.uniform(-0.06, 0.06);
  const double v = 0.90 + rng.uniform(-0.05, 0.05);
  return hsv_to_rgb(std::fmod(hue + 1.0, 1.0), s, v);
}

// 5x5 binary stencils; other glyph sizes sample these with nearest neighbor.
bool stencil_on(int64_t shape_id, int64_t y, int64_t x) {
  switch (shape_id) {
    case 0: return true;                                   // solid square
    case 1: return y == 2 || x == 2;                       // plus
    case 2: return y == x || y + x == 4;                   // diagonal cross
    case 3: return std::abs(y - 2) + std::abs(x - 2) <= 2; // diamond
    default: return y == 0 || y == 4 || x == 0 || x == 4;  // ring
  }
}

struct BodyShape {
  double cy, cx, ax, ay, head_cy, head_cx, head_r;
};

bool inside_body(const BodyShape& s, int64_t y, int64_t x) {
  const double dy = (static_cast<double>(y) - s.cy) / s.ay;
  const double dx = (static_cast<double>(x) - s.cx) / s.ax;
  return dy * dy + dx * dx <= 1.0;
}

bool inside_head(const BodyShape& s, int64_t y, int64_t x) {
  const double dy = static_cast<double>(y) - s.head_cy;
  const double dx = static_cast<double>(x) - s.head_cx;
  return dy * dy + dx * dx <= s.head_r * s.head_r;
}

Sample make_sample(int64_t label, int64_t id, int64_t size, int64_t glyph, Rng& rng) {
  Sample sample;
  sample.label = label;
  sample.id = id;
  Image img(size, size);

  // Background tint plus a vertical shading slope (draw order is fixed:
  // background, body, texture, glyph position, decoys, noise, glyph).
  const float bg_r = static_cast<float>(rng.uniform(0.05, 0.40));
  const float bg_g = static_cast<float>(rng.uniform(0.05, 0.40));
  const float bg_b = static_cast<float>(rng.uniform(0.05, 0.40));
  const float slope = static_cast<float>(rng.uniform(0.0, 0.30));

  BodyShape body;
  const double jitter = static_cast<double>(size) / 12.0;
  body.cy = (static_cast<double>(size) - 1.0) / 2.0 + rng.uniform(-jitter, jitter);
  body.cx = (static_cast<double>(size) - 1.0) / 2.0 + rng.uniform(-jitter, jitter);
  const double scale = rng.uniform(0.80, 1.20);
  body.ax = 0.34 * static_cast<double>(size) * scale;
  body.ay = 0.23 * static_cast<double>(size) * scale;
  body.head_r = 0.09 * static_cast<double>(size) * scale;
  body.head_cy = body.cy - body.ay * 0.55;
  body.head_cx = body.cx + body.ax * 0.85;

  const float body_base = static_cast<float>(rng.uniform(0.30, 0.65));
  const float body_g = body_base * static_cast<float>(rng.uniform(0.80, 1.0));
  const float body_b = body_base * static_cast<float>(rng.uniform(0.65, 0.95));

  // Plumage stripes: a per-sample sinusoidal texture over the body, so body
  // pixels carry structured variation no class can be read from.
  const double stripe_freq = rng.uniform(0.5, 2.2);
  const double stripe_phase = rng.uniform(0.0, 6.283185307179586);
  const double stripe_angle = rng.uniform(0.0, 3.141592653589793);
  const float stripe_amp = static_cast<float>(rng.uniform(0.02, 0.08));
  const double sa = std::sin(stripe_angle), ca = std::cos(stripe_angle);

  for (int64_t y = 0; y < size; ++y) {
    const float shade = slope * static_cast<float>(y) / static_cast<float>(size - 1);
    for (int64_t x = 0; x < size; ++x) {
      float r, g, b;
      if (inside_body(body, y, x) || inside_head(body, y, x)) {
        const double u = (ca * static_cast<double>(x) + sa * static_cast<double>(y)) /
                         static_cast<double>(size);
        const float stripe =
            stripe_amp * static_cast<float>(std::sin(6.283185307179586 * stripe_freq * 4.0 * u +
                                                     stripe_phase));
        r = body_base + stripe;
        g = body_g + stripe;
        b = body_b + stripe;
      } else {
        r = bg_r + shade;
        g = bg_g + shade;
        b = bg_b + shade;
      }
      img.at(0, y, x) = r;
      img.at(1, y, x) = g;
      img.at(2, y, x) = b;
    }
  }

  // Glyph goes at a uniform choice among all placements fully inside the
  // body ellipse; a degenerate body falls back to the image center.
  std::vector<std::pair<int64_t, int64_t>> spots;
  for (int64_t y = 0; y + glyph <= size; ++y) {
    for (int64_t x = 0; x + glyph <= size; ++x) {
      bool ok = true;
      for (int64_t dy = 0; ok && dy < glyph; ++dy) {
        for (int64_t dx = 0; ok && dx < glyph; ++dx) {
          ok = inside_body(body, y + dy, x + dx);
        }
      }
      if (ok) spots.emplace_back(y, x);
    }
  }
  int64_t gy, gx;
  if (spots.empty()) {
    gy = (size - glyph) / 2;
    gx = (size - glyph) / 2;
    rng.uniform_int(0, 1);  // keep the draw count stable across samples
  } else {
    const auto& spot = spots[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(spots.size()) - 1))];
    gy = spot.first;
    gx = spot.second;
  }

  // Soft decoy blobs in the glyph color family pollute the color histogram,
  // so hue statistics alone cannot identify the class. Decoys are blurry
  // ellipses while the glyph stays a crisp stencil; the local shape is the
  // discriminative evidence. Placement avoids the glyph box so the box stays
  // an honest localization target.
  const int64_t decoys = rng.uniform_int(1, 3);
  for (int64_t dcount = 0; dcount < decoys; ++dcount) {
    const Rgb dcol = hsv_to_rgb(rng.uniform(0.0, 1.0), 0.80 + rng.uniform(-0.06, 0.06),
                                0.90 + rng.uniform(-0.05, 0.05));
    const double ry = rng.uniform(1.0, 2.2) * static_cast<double>(size) / 32.0;
    const double rx = rng.uniform(1.0, 2.2) * static_cast<double>(size) / 32.0;
    for (int64_t attempt = 0; attempt < 8; ++attempt) {
      const double cy = rng.uniform(0.0, static_cast<double>(size - 1));
      const double cx = rng.uniform(0.0, static_cast<double>(size - 1));
      if (!inside_body(body, static_cast<int64_t>(cy), static_cast<int64_t>(cx))) continue;
      const int64_t y0 = static_cast<int64_t>(std::floor(cy - ry)), y1 = static_cast<int64_t>(std::ceil(cy + ry));
      const int64_t x0 = static_cast<int64_t>(std::floor(cx - rx)), x1 = static_cast<int64_t>(std::ceil(cx + rx));
      if (y1 >= gy - 1 && y0 <= gy + glyph && x1 >= gx - 1 && x0 <= gx + glyph) continue;
      for (int64_t y = std::max<int64_t>(0, y0); y <= std::min(size - 1, y1); ++y) {
        for (int64_t x = std::max<int64_t>(0, x0); x <= std::min(size - 1, x1); ++x) {
          const double dy = (static_cast<double>(y) - cy) / ry;
          const double dx = (static_cast<double>(x) - cx) / rx;
          const double d2 = dy * dy + dx * dx;
          if (d2 >= 1.0) continue;
          const float alpha = 0.70f * static_cast<float>(1.0 - d2);
          img.at(0, y, x) = (1.0f - alpha) * img.at(0, y, x) + alpha * dcol.r;
          img.at(1, y, x) = (1.0f - alpha) * img.at(1, y, x) + alpha * dcol.g;
          img.at(2, y, x) = (1.0f - alpha) * img.at(2, y, x) + alpha * dcol.b;
        }
      }
      break;
    }
  }

  // Pixel noise before the glyph: the glyph itself stays crisp, which makes
  // it the only reliable class evidence.
  for (int64_t c = 0; c < 3; ++c) {
    for (int64_t y = 0; y < size; ++y) {
      for (int64_t x = 0; x < size; ++x) {
        img.at(c, y, x) += static_cast<float>(rng.uniform(-0.03, 0.03));
      }
    }
  }

  const int64_t shape_id = label % 5;
  const Rgb color = glyph_color(label, rng);
  for (int64_t dy = 0; dy < glyph; ++dy) {
    for (int64_t dx = 0; dx < glyph; ++dx) {
      const int64_t sy = dy * 5 / glyph;
      const int64_t sx = dx * 5 / glyph;
      if (stencil_on(shape_id, sy, sx)) {
        img.at(0, gy + dy, gx + dx) = color.r;
        img.at(1, gy + dy, gx + dx) = color.g;
        img.at(2, gy + dy, gx + dx) = color.b;
      }
    }
  }

  for (float& v : img.data) v = std::min(1.0f, std::max(0.0f, v));
  sample.image = std::move(img);
  sample.glyph_box = GlyphBox{gy, gx, gy + glyph, gx + glyph};
  return sample;
}

}  // namespace

std::pair<Dataset, Dataset> generate_synthetic(int64_t num_classes, int64_t per_class_train,
                                               int64_t per_class_test, int64_t image_size,
                                               uint64_t seed) {
  if (num_classes < 2) throw ConfigError("need at least 2 classes");
  if (per_class_train < 1 || per_class_test < 1) throw ConfigError("per-class counts must be >= 1");
  if (image_size < 16 || image_size % 4 != 0) {
    throw ConfigError("image size must be >= 16 and divisible by 4");
  }
  const int64_t glyph = std::max<int64_t>(3, image_size * 5 / 32);

  Dataset train, test;
  train.num_classes = num_classes;
  test.num_classes = num_classes;
  train.split_tag = "train";
  test.split_tag = "test";

  int64_t next_id = 0;
  for (int64_t c = 0; c < num_classes; ++c) {
    for (int64_t i = 0; i < per_class_train; ++i) {
      Rng rng(derive_stream(seed, {stream::kData, 0, static_cast<uint64_t>(next_id)}));
      train.samples.push_back(make_sample(c, next_id, image_size, glyph, rng));
      ++next_id;
    }
  }
  for (int64_t c = 0; c < num_classes; ++c) {
    for (int64_t i = 0; i < per_class_test; ++i) {
      Rng rng(derive_stream(seed, {stream::kData, 1, static_cast<uint64_t>(next_id)}));
      test.samples.push_back(make_sample(c, next_id, image_size, glyph, rng));
      ++next_id;
    }
  }
  return {train, test};
}

}  // namespace fgssl
