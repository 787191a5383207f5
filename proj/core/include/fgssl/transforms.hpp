#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fgssl/image.hpp"
#include "fgssl/rng.hpp"

namespace fgssl {

// Constrained jigsaw shuffle of a k x k cell grid. Each row j carries a
// permutation of column indices, each column i a permutation of row indices;
// origin_of maps every destination cell back to the source cell that ends up
// there after rows are shuffled first, then columns.
struct RegionPermutation {
  int64_t k = 0;
  int64_t D = 0;
  std::vector<std::vector<int64_t>> row_perms;  // row_perms[j][i]: column i moves to this column
  std::vector<std::vector<int64_t>> col_perms;  // col_perms[i][j]: row j moves to this row
  std::vector<std::pair<int64_t, int64_t>> origin_of;  // dest cell (row-major) -> source (i,j)

  bool is_identity() const;
};

// Counter-clockwise rotation by 90*r degrees; pixel (y,x) -> (W-1-x, y)
// applied r times. Odd r requires a square image.
Image rotate90(const Image& img, int r);

// Bilinear resize with corner-aligned sampling (output corners sample input
// corners exactly). An output extent of 1 samples coordinate 0.
Image resize(const Image& img, int64_t out_h, int64_t out_w);

Image center_crop(const Image& img, int64_t out_h, int64_t out_w);
Image random_crop(const Image& img, int64_t out_h, int64_t out_w, Rng& rng);

// Draws the constrained permutation: per row j, keys p[i] = i + d with
// d uniform on the integers [-D, D], stable-sorted with the original index
// as tiebreaker; same construction per column. Guarantees every cell moves
// strictly less than 2D positions per axis.
RegionPermutation region_permutation(int64_t k, int64_t D, Rng& rng);

// Partitions the image into k x k cells and moves them: rows first, then
// columns. Dimensions must be divisible by k.
Image apply_region_shuffle(const Image& img, const RegionPermutation& perm);

// Exact inverse of apply_region_shuffle via origin_of.
Image undo_region_shuffle(const Image& shuffled, const RegionPermutation& perm);

// Per destination cell, the normalized (row, col) of the source cell sitting
// there: t = 2*idx/(k-1) - 1, matching a tanh output range. Layout [k,k,2]
// flattened row-major, last axis (row_t, col_t).
std::vector<float> location_targets(const RegionPermutation& perm);

// Identity-permutation targets for the unshuffled branch.
std::vector<float> identity_location_targets(int64_t k);

struct PatchSet {
  std::vector<Image> patches;                          // row-major cell order
  int64_t grid = 0;                                    // cells per side
  std::vector<std::pair<int64_t, int64_t>> source_cells;
};

// Resize, optionally center-crop, split into grid x grid cells, then take
// one random patch_size crop inside each cell.
PatchSet extract_jigsaw_patches(const Image& img, int64_t resize_dim, int64_t center_crop_dim,
                                int64_t grid, int64_t patch_size, Rng& rng);

}  // namespace fgssl
