#pragma once

// Diversification block: stochastic suppression of peak and patch regions of
// class activation maps. Masks are a pure function of (map values, stream);
// the suppression itself is a tape op so gradients pass through scaled cells.

#include <cstdint>
#include <vector>

#include "fgssl/errors.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/tensor.hpp"

namespace fgssl {

struct DbConfig {
  double p_peak = 0.2;
  double p_patch = 0.2;
  int64_t patch_k = 2;   // suppression block side
  double alpha = 0.5;    // scale factor on suppressed cells
  bool train_only = true;

  bool operator==(const DbConfig&) const = default;
};

inline void validate(const DbConfig& cfg) {
  if (cfg.p_peak < 0.0 || cfg.p_peak > 1.0 || cfg.p_patch < 0.0 || cfg.p_patch > 1.0) {
    throw ConfigError("db: probabilities must lie in [0,1]");
  }
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("db: alpha must lie in [0,1]");
  if (cfg.patch_k < 1) throw ConfigError("db: patch side must be at least 1");
}

namespace detail {

// Row-major argmax per class map; ties go to the first scan position.
inline int64_t map_argmax(const float* m, int64_t hw) {
  int64_t best = 0;
  for (int64_t i = 1; i < hw; ++i) {
    if (m[i] > m[best]) best = i;
  }
  return best;
}

template <class S>
std::vector<float> map_values(const Tensor<S>& cams) {
  std::vector<float> v(static_cast<size_t>(cams.numel()));
  const S* p = cams.data();
  for (int64_t i = 0; i < cams.numel(); ++i) v[static_cast<size_t>(i)] = static_cast<float>(p[i]);
  return v;
}

}  // namespace detail

// Per class c: one candidate cell at argmax(A_c), kept with probability
// p_peak. Exactly C Bernoulli draws regardless of values.
template <class S>
std::vector<uint8_t> peak_mask(const Tensor<S>& cams, double p_peak, Rng& rng) {
  FGSSL_CHECK(cams.rank() == 3, "peak_mask: maps must be [C,H,W]");
  ops::ensure_finite(cams, "peak_mask input");
  const int64_t c = cams.dim(0), hw = cams.dim(1) * cams.dim(2);
  const auto v = detail::map_values(cams);
  std::vector<uint8_t> mask(static_cast<size_t>(c * hw), 0);
  for (int64_t ch = 0; ch < c; ++ch) {
    const int64_t peak = detail::map_argmax(v.data() + ch * hw, hw);
    const bool on = rng.bernoulli(p_peak);
    if (on) mask[static_cast<size_t>(ch * hw + peak)] = 1;
  }
  return mask;
}

// Independent K x K blocks per class, each fully suppressed with probability
// p_patch; the cell at each class's argmax is forced off, so peak handling
// belongs to the peak mask alone. Draw count is C*(H/K)*(W/K) always.
template <class S>
std::vector<uint8_t> patch_mask(const Tensor<S>& cams, int64_t k, double p_patch, Rng& rng) {
  FGSSL_CHECK(cams.rank() == 3, "patch_mask: maps must be [C,H,W]");
  const int64_t c = cams.dim(0), h = cams.dim(1), w = cams.dim(2);
  FGSSL_CHECK(k >= 1 && h % k == 0 && w % k == 0,
              "patch_mask: block side must divide the map dims");
  ops::ensure_finite(cams, "patch_mask input");
  const auto v = detail::map_values(cams);
  std::vector<uint8_t> mask(static_cast<size_t>(c * h * w), 0);
  for (int64_t ch = 0; ch < c; ++ch) {
    uint8_t* m = mask.data() + ch * h * w;
    for (int64_t by = 0; by < h / k; ++by) {
      for (int64_t bx = 0; bx < w / k; ++bx) {
        const bool on = rng.bernoulli(p_patch);
        if (!on) continue;
        for (int64_t y = by * k; y < (by + 1) * k; ++y) {
          for (int64_t x = bx * k; x < (bx + 1) * k; ++x) m[y * w + x] = 1;
        }
      }
    }
    const int64_t peak = detail::map_argmax(v.data() + ch * h * w, h * w);
    m[peak] = 0;
  }
  return mask;
}

// Union of peak and patch masks, clamped to {0,1}. Peak draws happen first,
// then patch draws, off one stream.
template <class S>
std::vector<uint8_t> suppression_mask(const Tensor<S>& cams, const DbConfig& cfg, Rng& rng) {
  auto mask = peak_mask(cams, cfg.p_peak, rng);
  const auto patches = patch_mask(cams, cfg.patch_k, cfg.p_patch, rng);
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = (mask[i] | patches[i]) ? 1 : 0;
  return mask;
}

// A' = alpha*A on masked cells, A elsewhere, as one elementwise multiply on
// the tape. alpha = 1 or an all-zero mask multiplies by exactly 1.0, which
// keeps every float bit-identical.
template <class S>
Tensor<S> apply_suppression(const Tensor<S>& cams, const std::vector<uint8_t>& mask, double alpha) {
  FGSSL_CHECK(static_cast<int64_t>(mask.size()) == cams.numel(),
              "apply_suppression: mask size must match the maps");
  std::vector<S> factor(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    FGSSL_CHECK(mask[i] <= 1, "apply_suppression: mask must be binary");
    factor[i] = mask[i] ? static_cast<S>(alpha) : S(1);
  }
  return ops::mul(cams, Tensor<S>::from_data(cams.shape(), std::move(factor)));
}

}  // namespace fgssl
