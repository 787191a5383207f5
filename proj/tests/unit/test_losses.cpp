#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "fgssl/errors.hpp"
#include "fgssl/losses.hpp"
#include "fgssl/model.hpp"
#include "fgssl/transforms.hpp"

using namespace fgssl;

namespace {
using T = Tensor<double>;
}

TEST_CASE("cross entropy frozen values") {
  // scores [2,0,1], label 0: lse = ln(e^2 + 1 + e), loss = lse - 2.
  T scores = T::from_data(Shape{3}, {2.0, 0.0, 1.0});
  CHECK(cross_entropy(scores, 0).item() == doctest::Approx(0.40760596444438104).epsilon(1e-12));
  // Uniform scores over N classes cost exactly ln N.
  T uniform = T::zeros(Shape{4});
  CHECK(cross_entropy(uniform, 2).item() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK_THROWS(cross_entropy(scores, 3));
  CHECK_THROWS(cross_entropy(scores, -1));
}

TEST_CASE("cross entropy mean averages per-row losses") {
  T rows = T::from_data(Shape{2, 3}, {2.0, 0.0, 1.0, 0.0, 0.0, 0.0});
  const double want = 0.5 * (0.40760596444438104 + std::log(3.0));
  CHECK(cross_entropy_mean(rows, {0, 1}).item() == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS(cross_entropy_mean(rows, {0}));
}

TEST_CASE("truncated loss keeps only the strongest competitors") {
  T scores = T::from_data(Shape{3}, {2.0, 0.0, 1.0});
  // k=1 keeps the label and the best non-label score (index 2).
  const double k1 = gce_loss(scores, 0, 1).item();
  CHECK(k1 == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-12));
  // k = N-1 keeps everything and reduces to plain cross entropy.
  const double k2 = gce_loss(scores, 0, 2).item();
  CHECK(k2 == doctest::Approx(0.40760596444438104).epsilon(1e-12));
  CHECK(k1 < k2);
  CHECK_THROWS_AS(gce_loss(scores, 0, 0), ConfigError);
  CHECK_THROWS_AS(gce_loss(scores, 0, 3), ConfigError);
}

TEST_CASE("truncated loss breaks score ties toward lower index") {
  // Non-label scores tie; the kept competitor must be index 1, not 2.
  T scores = T::from_data(Shape{3}, {0.0, 1.0, 1.0});
  const double got = gce_loss(scores, 0, 1).item();
  CHECK(got == doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-12));
}

TEST_CASE("rotation objective blends the two branches") {
  T cls = T::scalar(1.0);
  T rot = T::scalar(2.0);
  CHECK(rotation_total(cls, rot, 0.3).item() == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(rotation_total(cls, rot, 0.0).item() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rotation_total(cls, rot, 1.0).item() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(rotation_total(cls, rot, -0.1), ConfigError);
  CHECK_THROWS_AS(rotation_total(cls, rot, 1.1), ConfigError);
}

TEST_CASE("noise-contrastive ratio frozen value") {
  // Aligned pair, one orthogonal negative, tau=1: h = e / (e + 1).
  T a = T::from_data(Shape{2}, {1.0, 0.0});
  T n = T::from_data(Shape{1, 2}, {0.0, 1.0});
  const double h = nce_h(a, a, n, 1.0).item();
  CHECK(h == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-12));
  // Empty negatives give exactly one.
  CHECK(nce_h(a, a, T(), 1.0).item() == 1.0);
  // Inputs must be unit vectors.
  T big = T::from_data(Shape{2}, {2.0, 0.0});
  CHECK_THROWS(nce_h(big, a, n, 1.0));
  CHECK_THROWS(nce_h(a, a, n, 0.0));
}

TEST_CASE("contrastive objective frozen value with one negative") {
  // v_img = v_patch = e1, negative e2, tau=1. Both terms equal ln(1 + 1/e).
  T v = T::from_data(Shape{2}, {1.0, 0.0});
  T n = T::from_data(Shape{1, 2}, {0.0, 1.0});
  const double want = 2.0 * std::log(1.0 + std::exp(-1.0));
  CHECK(pirl_loss(v, v, n, 1.0).item() == doctest::Approx(want).epsilon(1e-12));
  // Empty negatives give exactly zero.
  CHECK(pirl_loss(v, v, T(), 1.0).item() == 0.0);
}

TEST_CASE("memory bank EMA update frozen value") {
  // Drive the entry onto e1 (each update halves the angle), then one update
  // with e2 must land exactly on the diagonal.
  MemoryBank<double> bank({7}, 2, 0.07, 0.5, 11);
  const double e1[2] = {1.0, 0.0};
  const double e2[2] = {0.0, 1.0};
  for (int i = 0; i < 80; ++i) bank.update(7, e1, 2);
  const double* m = bank.rep(7);
  CHECK(std::abs(m[0] - 1.0) < 1e-12);
  bank.update(7, e2, 2);
  m = bank.rep(7);
  const double diag = std::sqrt(0.5);
  CHECK(m[0] == doctest::Approx(diag).epsilon(1e-10));
  CHECK(m[1] == doctest::Approx(diag).epsilon(1e-10));
}

TEST_CASE("memory bank bookkeeping") {
  MemoryBank<double> bank({3, 1, 4}, 5, 0.07, 0.5, 2);
  CHECK(bank.size() == 3);
  CHECK(bank.dim() == 5);
  CHECK(bank.contains(4));
  CHECK_FALSE(bank.contains(2));
  // Entries start unit-norm.
  for (int64_t id : bank.ids()) {
    const double* m = bank.rep(id);
    double norm = 0.0;
    for (int64_t d = 0; d < 5; ++d) norm += m[d] * m[d];
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Same seed reproduces the same initial entries.
  MemoryBank<double> twin({3, 1, 4}, 5, 0.07, 0.5, 2);
  CHECK(twin.rep(3)[0] == bank.rep(3)[0]);
  // Non-unit update input is rejected.
  const double bad[5] = {2.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS(bank.update(3, bad, 5));
  CHECK_THROWS(bank.rep(99));
}

TEST_CASE("memory bank negative sampling excludes the anchor") {
  MemoryBank<double> bank({0, 1, 2, 3, 4, 5}, 4, 0.07, 0.5, 6);
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto negs = bank.sample_negatives(2, 3, rng);
    REQUIRE(negs.size() == 3);
    std::set<int64_t> unique(negs.begin(), negs.end());
    CHECK(unique.size() == 3);
    CHECK(unique.count(2) == 0);
  }
  // Requesting more negatives than available non-anchor entries fails.
  CHECK_THROWS(bank.sample_negatives(0, 6, rng));
  auto all = bank.sample_negatives(0, 5, rng);
  CHECK(all.size() == 5);
  // negatives_tensor stacks the chosen rows and refuses the anchor.
  auto t = bank.negatives_tensor({1, 3}, 0);
  CHECK(t.shape() == Shape{2, 4});
  CHECK(t.data()[0] == bank.rep(1)[0]);
  CHECK(t.data()[4] == bank.rep(3)[0]);
  CHECK_THROWS(bank.negatives_tensor({1, 3}, 3));
}

TEST_CASE("deconstruction classification loss on uniform scores") {
  T s = T::zeros(Shape{2, 4});
  const double got = dcl_cls_loss(s, s, {1, 3}).item();
  CHECK(got == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("adversary loss on uniform scores") {
  T d = T::zeros(Shape{2, 2});
  CHECK(dcl_adv_loss(d, d).item() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adversary loss prefers correct split") {
  // Strong logits for class 0 on originals and class 1 on shuffled: near zero.
  T orig = T::from_data(Shape{1, 2}, {10.0, -10.0});
  T shuf = T::from_data(Shape{1, 2}, {-10.0, 10.0});
  CHECK(dcl_adv_loss(orig, shuf).item() < 1e-8);
  // Swapped convention costs heavily.
  CHECK(dcl_adv_loss(shuf, orig).item() > 10.0);
}

TEST_CASE("location loss frozen value at zero predictions") {
  // k=2 coordinates are all +-1, so squared error is 1 everywhere. Each
  // branch averages to 2 (two coordinate channels), totalling 4.
  T pred = T::zeros(Shape{1, 2, 2, 2});
  T targets = T::from_data(Shape{1, 2, 2, 2},
                           coord_grid_chw<double>(identity_location_targets(2), 2));
  const double got = dcl_loc_loss(pred, pred, targets, LocMode::mse).item();
  CHECK(got == doctest::Approx(4.0).epsilon(1e-12));
  // l1 on the same data is identical since every residual has magnitude 1.
  const double l1 = dcl_loc_loss(pred, pred, targets, LocMode::l1).item();
  CHECK(l1 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("location loss is zero at exact predictions") {
  Rng rng(23);
  RegionPermutation perm = region_permutation(3, 1, rng);
  T targets = T::from_data(Shape{1, 2, 3, 3},
                           coord_grid_chw<double>(location_targets(perm), 3));
  T ident = T::from_data(Shape{1, 2, 3, 3},
                         coord_grid_chw<double>(identity_location_targets(3), 3));
  CHECK(dcl_loc_loss(ident, targets, targets, LocMode::mse).item() == doctest::Approx(0.0));
  CHECK(dcl_loc_loss(ident, targets, targets, LocMode::l1).item() == doctest::Approx(0.0));
}

TEST_CASE("location loss rejects out-of-range regression predictions") {
  T pred = T::full(Shape{1, 2, 2, 2}, 1.5);
  T targets = T::from_data(Shape{1, 2, 2, 2},
                           coord_grid_chw<double>(identity_location_targets(2), 2));
  CHECK_THROWS(dcl_loc_loss(pred, pred, targets, LocMode::mse));
}

TEST_CASE("cell classification location mode recovers indices from coordinates") {
  // With identity targets the correct cell for destination d is d itself, so
  // logits that put huge mass on the right cell drive the loss to zero.
  const int64_t k = 2;
  T targets = T::from_data(Shape{1, 2, k, k},
                           coord_grid_chw<double>(identity_location_targets(k), k));
  T pred(Shape{1, k * k, k, k});
  for (auto& v : pred.vec()) v = -30.0;
  for (int64_t cell = 0; cell < k * k; ++cell) {
    const int64_t y = cell / k, x = cell % k;
    pred.data()[(cell * k + y) * k + x] = 30.0;
  }
  const double got = dcl_loc_loss(pred, pred, targets, LocMode::bce).item();
  CHECK(got < 1e-8);
  // Uniform logits cost each cell ln 2 per candidate summed over k^2 cells.
  T flat = T::zeros(Shape{1, k * k, k, k});
  const double uniform = dcl_loc_loss(flat, flat, targets, LocMode::bce).item();
  CHECK(uniform == doctest::Approx(2.0 * 4.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("total objectives add their parts") {
  CHECK(dcl_total(T::scalar(1.0), T::scalar(2.0), T::scalar(3.0)).item() ==
        doctest::Approx(6.0).epsilon(1e-12));
  CHECK(pirl_total(T::scalar(1.5), T::scalar(2.5)).item() ==
        doctest::Approx(4.0).epsilon(1e-12));
}
