#include "fgssl/verify.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <utility>

#include "fgssl/grad_check.hpp"
#include "fgssl/losses.hpp"
#include "fgssl/model.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/transforms.hpp"

namespace fgssl {

namespace {

using T = Tensor<double>;
using Fn = std::function<T(const T&)>;

T randn(Shape shape, Rng& rng, double scale = 1.0) {
  T t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = scale * rng.normal();
  return t;
}

// Unit-norm rows for contrastive inputs.
T unit_rows(int64_t rows, int64_t dim, Rng& rng) {
  T t = randn(Shape{rows, dim}, rng);
  for (int64_t r = 0; r < rows; ++r) {
    double norm = 0.0;
    for (int64_t d = 0; d < dim; ++d) norm += t.data()[r * dim + d] * t.data()[r * dim + d];
    norm = std::sqrt(norm);
    for (int64_t d = 0; d < dim; ++d) t.data()[r * dim + d] /= norm;
  }
  return t;
}

CheckResult grad_case(const std::string& name, const Fn& f, const T& x, double tol = 1e-4) {
  CheckResult r;
  r.name = "grad." + name;
  r.tolerance = tol;
  r.observed = grad_check<double>(f, x, 1e-5);
  r.pass = r.observed < tol;
  return r;
}

T scalarize(const T& x, int64_t i) {
  return ops::reshape(ops::gather(ops::reshape(x, Shape{x.numel()}), {i}), Shape{});
}

}  // namespace

std::vector<CheckResult> verify_grad_suite() {
  std::vector<CheckResult> out;
  Rng rng(0x5eedf00d);

  auto wmean = [](const T& t) {
    // Deterministic weighted reduction so every element's gradient is probed
    // through distinct upstream values.
    T w(t.shape());
    for (int64_t i = 0; i < t.numel(); ++i) w.data()[i] = 0.25 + std::cos(1.7 * double(i + 1));
    return ops::mean(ops::mul(t, w));
  };

  // Elementwise and structural ops.
  const T a6 = randn(Shape{2, 3}, rng);
  out.push_back(grad_case("add", [&](const T& x) { return ops::sum(ops::add(x, a6)); }, randn(Shape{2, 3}, rng)));
  out.push_back(grad_case("sub", [&](const T& x) { return ops::sum(ops::sub(a6, x)); }, randn(Shape{2, 3}, rng)));
  out.push_back(grad_case("mul", [&](const T& x) { return wmean(ops::mul(x, a6)); }, randn(Shape{2, 3}, rng)));
  out.push_back(grad_case("mul_bcast", [&](const T& x) { return wmean(ops::mul(a6, x)); }, randn(Shape{1}, rng)));
  out.push_back(grad_case("scale", [&](const T& x) { return ops::sum(ops::scale(x, -1.7)); }, randn(Shape{5}, rng)));
  out.push_back(grad_case("neg", [&](const T& x) { return wmean(ops::neg(x)); }, randn(Shape{4}, rng)));
  out.push_back(grad_case("relu", [&](const T& x) { return wmean(ops::relu(x)); }, randn(Shape{7}, rng)));
  out.push_back(grad_case("abs", [&](const T& x) { return wmean(ops::abs(x)); }, randn(Shape{7}, rng)));
  out.push_back(grad_case("tanh", [&](const T& x) { return wmean(ops::tanh(x)); }, randn(Shape{6}, rng)));
  out.push_back(grad_case("exp", [&](const T& x) { return wmean(ops::exp(x)); }, randn(Shape{6}, rng, 0.5)));
  {
    T pos(Shape{5});
    for (int64_t i = 0; i < 5; ++i) pos.data()[i] = 0.3 + rng.uniform(0.0, 2.0);
    out.push_back(grad_case("log", [&](const T& x) { return wmean(ops::log(x)); }, pos));
  }
  out.push_back(grad_case("reshape", [&](const T& x) { return wmean(ops::reshape(x, Shape{6})); }, randn(Shape{2, 3}, rng)));
  out.push_back(grad_case("slice_rows", [&](const T& x) { return wmean(ops::slice_rows(x, 1, 3)); }, randn(Shape{4, 3}, rng)));
  out.push_back(grad_case("concat", [&](const T& x) { return wmean(ops::concat<double>({ops::reshape(x, Shape{6}), ops::reshape(x, Shape{6})})); }, randn(Shape{2, 3}, rng)));
  out.push_back(grad_case("gather", [&](const T& x) { return wmean(ops::gather(x, {0, 2, 2, 4})); }, randn(Shape{5}, rng)));
  out.push_back(grad_case("select_index", [&](const T& x) { return wmean(ops::select_index(x, {2, 0, 1})); }, randn(Shape{3, 4}, rng)));
  {
    const T rows = randn(Shape{3, 4}, rng);
    out.push_back(grad_case("add_rowvec", [&](const T& x) { return wmean(ops::add_rowvec(rows, x)); }, randn(Shape{4}, rng)));
  }

  // Linear algebra and convolution.
  {
    const T b = randn(Shape{3, 4}, rng);
    out.push_back(grad_case("matmul_lhs", [&](const T& x) { return wmean(ops::matmul(x, b)); }, randn(Shape{2, 3}, rng)));
    const T a = randn(Shape{2, 3}, rng);
    out.push_back(grad_case("matmul_rhs", [&](const T& x) { return wmean(ops::matmul(a, x)); }, randn(Shape{3, 4}, rng)));
  }
  {
    const T img = randn(Shape{1, 2, 6, 6}, rng);
    const T w = randn(Shape{3, 2, 3, 3}, rng, 0.5);
    const T b = randn(Shape{3}, rng, 0.1);
    out.push_back(grad_case("conv2d_x", [&](const T& x) { return wmean(ops::conv2d(x, w, b, 1, 1)); }, img));
    out.push_back(grad_case("conv2d_w", [&](const T& x) { return wmean(ops::conv2d(img, x, b, 1, 1)); }, w));
    out.push_back(grad_case("conv2d_b", [&](const T& x) { return wmean(ops::conv2d(img, w, x, 1, 1)); }, b));
    out.push_back(grad_case("conv2d_stride2", [&](const T& x) { return wmean(ops::conv2d(x, w, b, 2, 1)); }, randn(Shape{1, 2, 7, 7}, rng)));
  }
  out.push_back(grad_case("max_pool2", [&](const T& x) { return wmean(ops::max_pool2(x)); }, randn(Shape{1, 2, 4, 4}, rng)));
  out.push_back(grad_case("global_avg_pool", [&](const T& x) { return wmean(ops::global_avg_pool(x)); }, randn(Shape{2, 3, 4, 4}, rng)));
  out.push_back(grad_case("adaptive_avg_pool", [&](const T& x) { return wmean(ops::adaptive_avg_pool(x, 2, 2)); }, randn(Shape{1, 2, 6, 6}, rng)));

  // Reductions and softmax family.
  out.push_back(grad_case("sum", [&](const T& x) { return ops::sum(x); }, randn(Shape{3, 3}, rng)));
  out.push_back(grad_case("mean", [&](const T& x) { return ops::mean(x); }, randn(Shape{3, 3}, rng)));
  out.push_back(grad_case("max", [&](const T& x) { return ops::max(x); }, randn(Shape{3, 3}, rng)));
  out.push_back(grad_case("sum_axis", [&](const T& x) { return wmean(ops::sum(x, 1)); }, randn(Shape{3, 4}, rng)));
  out.push_back(grad_case("mean_axis", [&](const T& x) { return wmean(ops::mean(x, 0)); }, randn(Shape{3, 4}, rng)));
  out.push_back(grad_case("max_axis", [&](const T& x) { return wmean(ops::max(x, 1)); }, randn(Shape{3, 4}, rng)));
  out.push_back(grad_case("softmax", [&](const T& x) { return wmean(ops::softmax(x, 1)); }, randn(Shape{2, 5}, rng)));
  out.push_back(grad_case("log_softmax", [&](const T& x) { return wmean(ops::log_softmax(x, 1)); }, randn(Shape{2, 5}, rng)));
  out.push_back(grad_case("logsumexp", [&](const T& x) { return ops::logsumexp(x); }, randn(Shape{6}, rng)));
  out.push_back(grad_case("l2_normalize", [&](const T& x) { return wmean(ops::l2_normalize(x)); }, randn(Shape{5}, rng)));
  {
    T tgt(Shape{2, 3});
    for (int64_t i = 0; i < 6; ++i) tgt.data()[i] = rng.uniform();
    out.push_back(grad_case("bce_logits", [&](const T& x) { return wmean(ops::bce_logits(x, tgt)); }, randn(Shape{2, 3}, rng)));
  }

  // Losses.
  out.push_back(grad_case("cross_entropy", [&](const T& x) { return cross_entropy(x, 2); }, randn(Shape{5}, rng)));
  out.push_back(grad_case("cross_entropy_mean", [&](const T& x) { return cross_entropy_mean(x, {1, 0, 3}); }, randn(Shape{3, 4}, rng)));
  out.push_back(grad_case("gce_loss", [&](const T& x) { return gce_loss(x, 1, 2); }, randn(Shape{5}, rng)));
  out.push_back(grad_case("gce_loss_mean", [&](const T& x) { return gce_loss_mean(x, {0, 2}, 3); }, randn(Shape{2, 5}, rng)));
  out.push_back(grad_case("rotation_total", [&](const T& x) { return rotation_total(scalarize(x, 0), scalarize(x, 1), 0.3); }, randn(Shape{2}, rng)));
  {
    const T negs = unit_rows(3, 6, rng);
    auto split_pair = [](const T& x) {
      T a = ops::l2_normalize(ops::reshape(ops::slice_rows(x, 0, 1), Shape{6}));
      T b = ops::l2_normalize(ops::reshape(ops::slice_rows(x, 1, 2), Shape{6}));
      return std::make_pair(a, b);
    };
    out.push_back(grad_case("nce_h", [&](const T& x) {
      auto [a, b] = split_pair(x);
      return nce_h(a, b, negs, 0.5);
    }, unit_rows(2, 6, rng)));
    out.push_back(grad_case("pirl_loss", [&](const T& x) {
      auto [a, b] = split_pair(x);
      return pirl_loss(a, b, negs, 0.5);
    }, unit_rows(2, 6, rng)));
    out.push_back(grad_case("pirl_loss_empty", [&](const T& x) {
      auto [a, b] = split_pair(x);
      return pirl_loss(a, b, T(), 0.5);
    }, unit_rows(2, 6, rng)));
  }
  out.push_back(grad_case("dcl_cls_loss", [&](const T& x) {
    return dcl_cls_loss(ops::slice_rows(x, 0, 2), ops::slice_rows(x, 2, 4), {1, 3});
  }, randn(Shape{4, 4}, rng)));
  out.push_back(grad_case("dcl_adv_loss", [&](const T& x) {
    return dcl_adv_loss(ops::slice_rows(x, 0, 2), ops::slice_rows(x, 2, 4));
  }, randn(Shape{4, 2}, rng)));
  {
    Rng prng(0xabc);
    RegionPermutation perm = region_permutation(3, 1, prng);
    const auto grid = coord_grid_chw<double>(location_targets(perm), 3);
    T targets = T::from_data(Shape{1, 2, 3, 3}, grid);
    auto loc_case = [&](LocMode mode, Shape pred_shape) {
      return grad_case("dcl_loc_" + to_string(mode), [&, mode](const T& x) {
        T squashed = mode == LocMode::bce ? x : ops::tanh(x);
        return dcl_loc_loss(ops::slice_rows(squashed, 0, 1), ops::slice_rows(squashed, 1, 2),
                            targets, mode);
      }, randn(pred_shape, rng));
    };
    out.push_back(loc_case(LocMode::mse, Shape{2, 2, 3, 3}));
    out.push_back(loc_case(LocMode::l1, Shape{2, 2, 3, 3}));
    out.push_back(loc_case(LocMode::bce, Shape{2, 9, 3, 3}));
  }
  out.push_back(grad_case("dcl_total", [&](const T& x) {
    return dcl_total(scalarize(x, 0), scalarize(x, 1), scalarize(x, 2));
  }, randn(Shape{3}, rng)));
  out.push_back(grad_case("pirl_total", [&](const T& x) {
    return pirl_total(scalarize(x, 0), scalarize(x, 1));
  }, randn(Shape{2}, rng)));

  // Composite: conv -> relu -> pool -> GAP -> linear -> CE, the training path
  // in miniature.
  {
    const T w1 = randn(Shape{4, 3, 3, 3}, rng, 0.4);
    const T b1 = randn(Shape{4}, rng, 0.1);
    const T w2 = randn(Shape{4, 3}, rng, 0.5);
    const T b2 = randn(Shape{3}, rng, 0.1);
    const T img = randn(Shape{2, 3, 8, 8}, rng);
    auto net = [&](const T& x, const T& cw, const T& lw) {
      T f = ops::global_avg_pool(ops::max_pool2(ops::relu(ops::conv2d(x, cw, b1, 1, 1))));
      return cross_entropy_mean(ops::add_rowvec(ops::matmul(f, lw), b2), {0, 2});
    };
    out.push_back(grad_case("net_input", [&](const T& x) { return net(x, w1, w2); }, img));
    out.push_back(grad_case("net_conv_w", [&](const T& x) { return net(img, x, w2); }, w1));
    out.push_back(grad_case("net_linear_w", [&](const T& x) { return net(img, w1, x); }, w2));
  }

  return out;
}

std::vector<CheckResult> verify_perm_suite() {
  std::vector<CheckResult> out;
  {
    CheckResult r;
    r.name = "perm.constraint_10000";
    r.tolerance = 1.0;  // |sigma(i) - i| / (2D) must stay below 1
    r.note = "k in {4,7}, D in {1,2,3}, bijectivity plus movement bound on both axes";
    double worst_ratio = 0.0;
    bool ok = true;
    const int64_t ks[] = {4, 7};
    const int64_t ds[] = {1, 2, 3};
    for (int64_t trial = 0; trial < 10000 && ok; ++trial) {
      const int64_t k = ks[trial % 2];
      const int64_t d = ds[(trial / 2) % 3];
      Rng rng(derive_stream(0x9e37, {static_cast<uint64_t>(trial)}));
      RegionPermutation perm = region_permutation(k, d, rng);
      auto check_axis = [&](const std::vector<std::vector<int64_t>>& perms) {
        for (const auto& p : perms) {
          std::vector<bool> seen(static_cast<size_t>(k), false);
          for (int64_t i = 0; i < k; ++i) {
            const int64_t dest = p[static_cast<size_t>(i)];
            if (dest < 0 || dest >= k || seen[static_cast<size_t>(dest)]) ok = false;
            if (!ok) return;
            seen[static_cast<size_t>(dest)] = true;
            const double ratio =
                static_cast<double>(std::llabs(dest - i)) / static_cast<double>(2 * d);
            worst_ratio = std::max(worst_ratio, ratio);
            if (ratio >= 1.0) ok = false;
          }
        }
      };
      check_axis(perm.row_perms);
      check_axis(perm.col_perms);
    }
    r.observed = worst_ratio;
    r.pass = ok && worst_ratio < 1.0;
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "perm.roundtrip_100";
    r.tolerance = 0.0;
    r.note = "undo(apply(img)) must be bitwise identical";
    int64_t mismatches = 0;
    for (int64_t trial = 0; trial < 100; ++trial) {
      Rng rng(derive_stream(0x0c0ffee, {static_cast<uint64_t>(trial)}));
      const int64_t k = 2 + rng.uniform_int(0, 4);          // 2..6
      const int64_t cell = 2 + rng.uniform_int(0, 3);       // 2..5 pixels per cell
      const int64_t side = k * cell;
      Image img(side, side);
      for (auto& v : img.data) v = static_cast<float>(rng.uniform());
      const int64_t d = rng.uniform_int(1, k - 1);
      RegionPermutation perm = region_permutation(k, d, rng);
      Image back = undo_region_shuffle(apply_region_shuffle(img, perm), perm);
      if (back.data != img.data) ++mismatches;
    }
    r.observed = static_cast<double>(mismatches);
    r.pass = mismatches == 0;
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> verify_loss_suite() {
  std::vector<CheckResult> out;
  Rng rng(0x10556);

  {
    CheckResult r;
    r.name = "loss.gce_equals_ce_at_full_k";
    r.tolerance = 1e-12;
    double worst = 0.0;
    for (int64_t trial = 0; trial < 1000; ++trial) {
      const int64_t n = rng.uniform_int(2, 40);
      T scores = randn(Shape{n}, rng, 3.0);
      const int64_t label = rng.uniform_int(0, n - 1);
      const double gce = gce_loss(scores, label, n - 1).item();
      const double ce = cross_entropy(scores, label).item();
      worst = std::max(worst, std::abs(gce - ce));
    }
    r.observed = worst;
    r.pass = worst < r.tolerance;
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "loss.gce_monotone_in_k";
    r.tolerance = 1e-13;
    double worst = 0.0;
    for (int64_t trial = 0; trial < 200; ++trial) {
      const int64_t n = rng.uniform_int(3, 20);
      T scores = randn(Shape{n}, rng, 2.0);
      const int64_t label = rng.uniform_int(0, n - 1);
      double prev = gce_loss(scores, label, 1).item();
      for (int64_t k = 2; k <= n - 1; ++k) {
        const double cur = gce_loss(scores, label, k).item();
        worst = std::max(worst, prev - cur);  // positive would mean a decrease
        prev = cur;
      }
    }
    r.observed = worst;
    r.pass = worst < r.tolerance;
    r.note = "larger k may only grow the loss";
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "loss.bank_ema_closed_form";
    r.tolerance = 1e-10;
    const int64_t dim = 8;
    const double beta = 0.5;
    MemoryBank<double> bank({10, 20, 30, 40, 50}, dim, 0.07, beta, 77);
    // Independent recursion over the same update sequence.
    std::vector<std::vector<double>> oracle;
    for (int64_t id : bank.ids()) {
      const double* m = bank.rep(id);
      oracle.emplace_back(m, m + dim);
    }
    double worst = 0.0, worst_norm = 0.0;
    for (int64_t step = 0; step < 40; ++step) {
      const int64_t slot = rng.uniform_int(0, 4);
      const int64_t id = bank.ids()[static_cast<size_t>(slot)];
      T rep = unit_rows(1, dim, rng);
      bank.update(id, rep.data(), dim);
      auto& m = oracle[static_cast<size_t>(slot)];
      double norm = 0.0;
      for (int64_t d = 0; d < dim; ++d) {
        m[static_cast<size_t>(d)] = beta * m[static_cast<size_t>(d)] + (1.0 - beta) * rep.data()[d];
        norm += m[static_cast<size_t>(d)] * m[static_cast<size_t>(d)];
      }
      norm = std::sqrt(norm);
      for (auto& v : m) v /= norm;
    }
    for (size_t slot = 0; slot < oracle.size(); ++slot) {
      const double* m = bank.rep(bank.ids()[slot]);
      double norm = 0.0;
      for (int64_t d = 0; d < dim; ++d) {
        worst = std::max(worst, std::abs(m[d] - oracle[slot][static_cast<size_t>(d)]));
        norm += m[d] * m[d];
      }
      worst_norm = std::max(worst_norm, std::abs(std::sqrt(norm) - 1.0));
    }
    r.observed = worst;
    r.pass = worst < r.tolerance && worst_norm < 1e-6;
    r.note = "entry drift vs independent recursion; norms within 1e-6 of 1";
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "loss.dcl_cls_product_form";
    r.tolerance = 1e-10;
    double worst = 0.0;
    for (int64_t trial = 0; trial < 100; ++trial) {
      const int64_t b = rng.uniform_int(1, 5), n = rng.uniform_int(2, 9);
      T s1 = randn(Shape{b, n}, rng, 2.0), s2 = randn(Shape{b, n}, rng, 2.0);
      std::vector<int64_t> labels;
      for (int64_t i = 0; i < b; ++i) labels.push_back(rng.uniform_int(0, n - 1));
      const double got = dcl_cls_loss(s1, s2, labels).item();
      double want = 0.0;
      for (int64_t i = 0; i < b; ++i) {
        auto prob = [&](const T& s) {
          double mx = s.data()[i * n];
          for (int64_t j = 1; j < n; ++j) mx = std::max(mx, s.data()[i * n + j]);
          double z = 0.0;
          for (int64_t j = 0; j < n; ++j) z += std::exp(s.data()[i * n + j] - mx);
          return std::exp(s.data()[i * n + labels[static_cast<size_t>(i)]] - mx) / z;
        };
        want -= std::log(prob(s1) * prob(s2));
      }
      want /= static_cast<double>(b);
      worst = std::max(worst, std::abs(got - want));
    }
    r.observed = worst;
    r.pass = worst < r.tolerance;
    r.note = "matches -mean log[C(I)_l * C(phi)_l]";
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "loss.pirl_two_term_oracle";
    r.tolerance = 1e-10;
    double worst = 0.0;
    const double tau = 0.4;
    for (int64_t trial = 0; trial < 50; ++trial) {
      const int64_t dim = 6, kneg = 4;
      T pair = unit_rows(2, dim, rng);
      T negs = unit_rows(kneg, dim, rng);
      T a = T::from_data(Shape{dim}, std::vector<double>(pair.data(), pair.data() + dim));
      T b = T::from_data(Shape{dim}, std::vector<double>(pair.data() + dim, pair.data() + 2 * dim));
      const double got = pirl_loss(a, b, negs, tau).item();
      auto dot = [&](const double* x, const double* y) {
        double s = 0.0;
        for (int64_t d = 0; d < dim; ++d) s += x[d] * y[d];
        return s;
      };
      auto h = [&](const double* x, const double* y) {
        const double num = std::exp(dot(x, y) / tau);
        double den = num;
        for (int64_t j = 0; j < kneg; ++j) den += std::exp(dot(y, negs.data() + j * dim) / tau);
        return num / den;
      };
      // First term compares the pair; each second term treats negative j as
      // the candidate, with the denominator summing similarities of n_j
      // against the whole negative set.
      double want = -std::log(h(a.data(), b.data()));
      for (int64_t j = 0; j < kneg; ++j) {
        const double num = std::exp(dot(b.data(), negs.data() + j * dim) / tau);
        double den = num;
        for (int64_t i = 0; i < kneg; ++i) {
          den += std::exp(dot(negs.data() + j * dim, negs.data() + i * dim) / tau);
        }
        want -= std::log(1.0 - num / den);
      }
      worst = std::max(worst, std::abs(got - want));
    }
    r.observed = worst;
    r.pass = worst < r.tolerance;
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "loss.nce_h_monotone_in_negative";
    r.tolerance = 0.0;
    // Rotate one negative toward b; h must strictly decrease.
    const int64_t dim = 4;
    T a = T::from_data(Shape{dim}, {1, 0, 0, 0});
    T b = T::from_data(Shape{dim}, {1, 0, 0, 0});
    double prev = 2.0;
    bool ok = true;
    for (int64_t step = 0; step <= 10; ++step) {
      const double angle = 1.5 - 0.14 * static_cast<double>(step);
      T neg = T::from_data(Shape{1, dim}, {std::cos(angle), std::sin(angle), 0, 0});
      const double h = nce_h(a, b, neg, 0.3).item();
      if (!(h < prev)) ok = false;
      if (h <= 0.0 || h > 1.0) ok = false;
      prev = h;
    }
    r.observed = prev;
    r.pass = ok;
    r.note = "h stays in (0,1] and falls as the negative aligns with b";
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "loss.contrastive_boundaries";
    r.tolerance = 0.0;
    T a = T::from_data(Shape{3}, {0.6, 0.8, 0.0});
    const double h_empty = nce_h(a, a, T(), 0.07).item();
    const double pirl_empty = pirl_loss(a, a, T(), 0.07).item();
    r.observed = std::max(std::abs(h_empty - 1.0), std::abs(pirl_empty));
    r.pass = h_empty == 1.0 && pirl_empty == 0.0;
    r.note = "empty negatives: h exactly 1, loss exactly 0";
    out.push_back(r);
  }
  return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return true;
}

void print_results(const std::vector<CheckResult>& results, std::ostream& os) {
  for (const auto& r : results) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  observed=" << r.observed
       << " tolerance=" << r.tolerance;
    if (!r.note.empty()) os << "  (" << r.note << ")";
    os << '\n';
  }
}

}  // namespace fgssl
