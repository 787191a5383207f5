#pragma once

// Classification and self-supervision losses. All of them are built from
// tape ops, so gradients flow without any loss-specific backward code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "fgssl/errors.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/tensor.hpp"

namespace fgssl {

enum class LocMode { mse, l1, bce };

// -log softmax(scores)[label] for one sample.
template <class S>
Tensor<S> cross_entropy(const Tensor<S>& scores, int64_t label) {
  FGSSL_CHECK(scores.rank() == 1, "cross_entropy: scores must be rank 1");
  FGSSL_CHECK(label >= 0 && label < scores.numel(), "cross_entropy: label out of range");
  ops::ensure_finite(scores, "cross_entropy scores");
  Tensor<S> ls = ops::log_softmax(scores, 0);
  return ops::neg(ops::reshape(ops::gather(ls, {label}), Shape{}));
}

// Batch mean of per-row cross entropy for [B,N] scores.
template <class S>
Tensor<S> cross_entropy_mean(const Tensor<S>& scores, const std::vector<int64_t>& labels) {
  FGSSL_CHECK(scores.rank() == 2, "cross_entropy_mean: scores must be rank 2");
  FGSSL_CHECK(scores.dim(0) == static_cast<int64_t>(labels.size()),
              "cross_entropy_mean: one label per row required");
  ops::ensure_finite(scores, "cross_entropy scores");
  Tensor<S> ls = ops::log_softmax(scores, 1);
  Tensor<S> picked = ops::select_index(ls, labels);
  return ops::scale(ops::sum(picked), S(-1) / static_cast<S>(labels.size()));
}

// Top-k-negatives cross entropy: the softmax runs over the label plus the k
// highest-scoring non-label classes only (score ties resolve to the lower
// class index). k = N-1 recovers plain cross entropy.
template <class S>
Tensor<S> gce_loss(const Tensor<S>& scores, int64_t label, int64_t k) {
  FGSSL_CHECK(scores.rank() == 1, "gce_loss: scores must be rank 1");
  const int64_t n = scores.numel();
  FGSSL_CHECK(label >= 0 && label < n, "gce_loss: label out of range");
  if (k < 1 || k > n - 1) {
    throw ConfigError("gce_loss: k must lie in [1, N-1], got " + std::to_string(k) + " for N = " +
                      std::to_string(n));
  }
  ops::ensure_finite(scores, "gce scores");
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  const S* ps = scores.data();
  std::stable_sort(order.begin(), order.end(),
                   [ps](int64_t a, int64_t b) { return ps[a] > ps[b]; });
  std::vector<int64_t> picked{label};
  for (int64_t i : order) {
    if (i == label) continue;
    if (static_cast<int64_t>(picked.size()) > k) break;
    picked.push_back(i);
  }
  picked.resize(static_cast<size_t>(k) + 1);
  Tensor<S> restricted = ops::gather(scores, picked);
  Tensor<S> lse = ops::logsumexp(restricted);
  Tensor<S> s_label = ops::reshape(ops::gather(scores, {label}), Shape{});
  return ops::sub(lse, s_label);
}

template <class S>
Tensor<S> gce_loss_mean(const Tensor<S>& scores, const std::vector<int64_t>& labels, int64_t k) {
  FGSSL_CHECK(scores.rank() == 2, "gce_loss_mean: scores must be rank 2");
  FGSSL_CHECK(scores.dim(0) == static_cast<int64_t>(labels.size()),
              "gce_loss_mean: one label per row required");
  std::vector<Tensor<S>> per_sample;
  for (int64_t b = 0; b < scores.dim(0); ++b) {
    Tensor<S> row = ops::reshape(ops::slice_rows(scores, b, b + 1), Shape{scores.dim(1)});
    per_sample.push_back(ops::reshape(gce_loss(row, labels[static_cast<size_t>(b)], k), Shape{1}));
  }
  return ops::scale(ops::sum(ops::concat(per_sample)), S(1) / static_cast<S>(per_sample.size()));
}

// (1-lambda)*cls + lambda*rot. The lambda=0 boundary must reproduce the
// classification loss bit-for-bit, which scale-by-1 plus add-of-0 does.
template <class S>
Tensor<S> rotation_total(const Tensor<S>& cls_loss, const Tensor<S>& rot_loss, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("rotation_total: lambda outside [0,1]");
  }
  return ops::add(ops::scale(cls_loss, static_cast<S>(1.0 - lambda)),
                  ops::scale(rot_loss, static_cast<S>(lambda)));
}

namespace detail {

template <class S>
void check_unit(const Tensor<S>& v, const char* what) {
  S acc = S(0);
  for (const S x : v.vec()) acc += x * x;
  FGSSL_CHECK(acc > S(0), std::string(what) + ": zero vector");
  FGSSL_CHECK(std::abs(std::sqrt(static_cast<double>(acc)) - 1.0) < 1e-3,
              std::string(what) + ": expects L2-normalized input");
}

// Similarities of v against every row of a [K,E] matrix, on the tape.
template <class S>
Tensor<S> row_dots(const Tensor<S>& rows, const Tensor<S>& v) {
  return ops::reshape(ops::matmul(rows, ops::reshape(v, Shape{v.numel(), 1})), Shape{rows.dim(0)});
}

}  // namespace detail

// Contrastive ratio h(a,b): exp(s(a,b)/tau) over itself plus similarities of
// b against the negatives. Inputs are unit vectors so cosine similarity is a
// dot product. Empty negatives give exactly 1.
template <class S>
Tensor<S> nce_h(const Tensor<S>& a, const Tensor<S>& b, const Tensor<S>& negatives, S tau) {
  FGSSL_CHECK(tau > S(0), "nce_h: tau must be positive");
  FGSSL_CHECK(a.rank() == 1 && b.rank() == 1 && a.numel() == b.numel(),
              "nce_h: a and b must be equal-length vectors");
  detail::check_unit(a, "nce_h");
  detail::check_unit(b, "nce_h");
  const S inv_tau = S(1) / tau;
  Tensor<S> s_ab = ops::scale(ops::sum(ops::mul(a, b)), inv_tau);
  std::vector<Tensor<S>> parts{ops::reshape(s_ab, Shape{1})};
  if (negatives.defined() && negatives.numel() > 0) {
    FGSSL_CHECK(negatives.rank() == 2 && negatives.dim(1) == a.numel(),
                "nce_h: negatives must be [K,E] with matching E");
    parts.push_back(ops::scale(detail::row_dots(negatives, b), inv_tau));
  }
  Tensor<S> lse = ops::logsumexp(ops::concat(parts));
  return ops::exp(ops::sub(s_ab, lse));
}

// Two-term contrastive loss: -log h(v_I, v_It) minus the sum over negatives
// of log(1 - h(v_It, n_j)), both terms over the same negative set. Written
// in log-sum-exp form rather than through nce_h so large negative sets stay
// stable and vectorized.
template <class S>
Tensor<S> pirl_loss(const Tensor<S>& v_img, const Tensor<S>& v_patch, const Tensor<S>& negatives,
                    S tau) {
  FGSSL_CHECK(tau > S(0), "pirl_loss: tau must be positive");
  detail::check_unit(v_img, "pirl_loss");
  detail::check_unit(v_patch, "pirl_loss");
  const S inv_tau = S(1) / tau;
  Tensor<S> s_pos = ops::scale(ops::sum(ops::mul(v_img, v_patch)), inv_tau);

  if (!negatives.defined() || negatives.numel() == 0) {
    return ops::sub(s_pos, s_pos);  // exact zero on the tape
  }
  FGSSL_CHECK(negatives.rank() == 2 && negatives.dim(1) == v_img.numel(),
              "pirl_loss: negatives must be [K,E] with matching E");
  const int64_t k = negatives.dim(0), e = negatives.dim(1);

  // Similarities of the patch embedding against the negatives; shared by the
  // positive term's denominator and the per-negative terms.
  Tensor<S> sims = ops::scale(detail::row_dots(negatives, v_patch), inv_tau);

  Tensor<S> z = ops::concat<S>({ops::reshape(s_pos, Shape{1}), sims});
  Tensor<S> term1 = ops::sub(ops::logsumexp(z), s_pos);

  // Denominator constants S_j = sum_i exp(s(n_j, n_i)/tau) involve only the
  // negatives, so they carry no gradient and are computed off the tape. The
  // pairwise dots go through the blocked reduction kernel; sums of the
  // exponentials accumulate in double either way, while the exponential
  // itself runs in the scalar type so the double path stays bit-comparable
  // to a direct evaluation.
  const S* pn = negatives.data();
  std::vector<S> gram(static_cast<size_t>(k * k), S(0));
  ops::detail::gemm_acc(pn, pn, gram.data(), k, k, e);
  std::vector<S> denom(static_cast<size_t>(k));
  double log_denom_sum = 0.0;
  for (int64_t j = 0; j < k; ++j) {
    const S* grow = gram.data() + j * k;
    double acc = 0.0;
    for (int64_t i = 0; i < k; ++i) {
      if constexpr (std::is_same_v<S, float>) {
        acc += std::exp(grow[i] * inv_tau);
      } else {
        acc += std::exp(static_cast<double>(grow[i]) * static_cast<double>(inv_tau));
      }
    }
    denom[static_cast<size_t>(j)] = static_cast<S>(acc);
    log_denom_sum += std::log(acc);
  }
  // -log(1 - h(v_It, n_j)) = log(e_j + S_j) - log(S_j).
  Tensor<S> e_j = ops::exp(sims);
  Tensor<S> shifted = ops::add(e_j, Tensor<S>::from_data(Shape{k}, denom));
  Tensor<S> term2 = ops::sub(ops::sum(ops::log(shifted)),
                             Tensor<S>::scalar(static_cast<S>(log_denom_sum)));
  return ops::add(term1, term2);
}

// Per-image EMA table of unit representations, keyed by stable sample id.
template <class S>
class MemoryBank {
 public:
  MemoryBank(const std::vector<int64_t>& ids, int64_t dim, S tau, S beta, uint64_t seed)
      : dim_(dim), tau_(tau), beta_(beta) {
    FGSSL_CHECK(dim > 0, "memory bank: dim must be positive");
    FGSSL_CHECK(tau > S(0), "memory bank: tau must be positive");
    FGSSL_CHECK(beta >= S(0) && beta <= S(1), "memory bank: beta outside [0,1]");
    FGSSL_CHECK(!ids.empty(), "memory bank: no ids");
    ids_ = ids;
    reps_.assign(ids.size() * static_cast<size_t>(dim), S(0));
    for (size_t r = 0; r < ids_.size(); ++r) {
      FGSSL_CHECK(index_.emplace(ids_[r], r).second, "memory bank: duplicate id");
      Rng rng(derive_stream(seed, {stream::kBank, static_cast<uint64_t>(ids_[r])}));
      double norm2 = 0.0;
      std::vector<double> draw(static_cast<size_t>(dim));
      for (auto& v : draw) {
        v = rng.normal();
        norm2 += v * v;
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (int64_t d = 0; d < dim; ++d) {
        reps_[r * static_cast<size_t>(dim) + static_cast<size_t>(d)] =
            static_cast<S>(draw[static_cast<size_t>(d)] * inv);
      }
    }
  }

  int64_t size() const { return static_cast<int64_t>(ids_.size()); }
  int64_t dim() const { return dim_; }
  S tau() const { return tau_; }
  S beta() const { return beta_; }
  const std::vector<int64_t>& ids() const { return ids_; }
  bool contains(int64_t id) const { return index_.count(id) > 0; }

  const S* rep(int64_t id) const {
    auto it = index_.find(id);
    FGSSL_CHECK(it != index_.end(), "memory bank: unknown id " + std::to_string(id));
    return reps_.data() + it->second * static_cast<size_t>(dim_);
  }

  // m <- normalize(beta*m + (1-beta)*rep); rep must itself be unit length.
  void update(int64_t id, const S* rep_data, int64_t n) {
    FGSSL_CHECK(n == dim_, "memory bank: rep dimension mismatch");
    auto it = index_.find(id);
    FGSSL_CHECK(it != index_.end(), "memory bank: unknown id " + std::to_string(id));
    double in_norm2 = 0.0;
    for (int64_t d = 0; d < n; ++d) {
      in_norm2 += static_cast<double>(rep_data[d]) * static_cast<double>(rep_data[d]);
    }
    FGSSL_CHECK(std::abs(std::sqrt(in_norm2) - 1.0) < 1e-3,
                "memory bank: update expects an L2-normalized representation");
    S* m = reps_.data() + it->second * static_cast<size_t>(dim_);
    double norm2 = 0.0;
    for (int64_t d = 0; d < n; ++d) {
      const double v = static_cast<double>(beta_) * static_cast<double>(m[d]) +
                       (1.0 - static_cast<double>(beta_)) * static_cast<double>(rep_data[d]);
      m[d] = static_cast<S>(v);
      norm2 += v * v;
    }
    FGSSL_CHECK(norm2 > 0.0, "memory bank: update produced a zero vector");
    const S inv = static_cast<S>(1.0 / std::sqrt(norm2));
    for (int64_t d = 0; d < n; ++d) m[d] *= inv;
  }

  // Uniform draw without replacement of `count` ids, excluding the anchor.
  std::vector<int64_t> sample_negatives(int64_t anchor_id, int64_t count, Rng& rng) const {
    FGSSL_CHECK(contains(anchor_id), "memory bank: unknown anchor id");
    FGSSL_CHECK(count >= 0 && count <= size() - 1,
                "memory bank: cannot draw " + std::to_string(count) + " negatives from " +
                    std::to_string(size() - 1) + " candidates");
    std::vector<int64_t> pool;
    pool.reserve(ids_.size() - 1);
    for (int64_t id : ids_) {
      if (id != anchor_id) pool.push_back(id);
    }
    for (int64_t i = 0; i < count; ++i) {
      const int64_t j = rng.uniform_int(i, static_cast<int64_t>(pool.size()) - 1);
      std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    pool.resize(static_cast<size_t>(count));
    return pool;
  }

  // Constant [K,E] tensor of stored representations. The anchor must not be
  // among them: its own representation is not a valid negative.
  Tensor<S> negatives_tensor(const std::vector<int64_t>& neg_ids, int64_t anchor_id) const {
    std::vector<S> data;
    data.reserve(neg_ids.size() * static_cast<size_t>(dim_));
    for (int64_t id : neg_ids) {
      FGSSL_CHECK(id != anchor_id, "memory bank: anchor id present in its own negatives");
      const S* r = rep(id);
      data.insert(data.end(), r, r + dim_);
    }
    return Tensor<S>::from_data(Shape{static_cast<int64_t>(neg_ids.size()), dim_}, std::move(data));
  }

 private:
  int64_t dim_;
  S tau_, beta_;
  std::vector<int64_t> ids_;
  std::unordered_map<int64_t, size_t> index_;
  std::vector<S> reps_;
};

// Classification over both branches: mean over the batch of
// CE(scores_I, l) + CE(scores_phi, l), the log of the product form.
template <class S>
Tensor<S> dcl_cls_loss(const Tensor<S>& scores_orig, const Tensor<S>& scores_shuffled,
                       const std::vector<int64_t>& labels) {
  FGSSL_CHECK(scores_orig.rank() == 2 && scores_shuffled.rank() == 2 &&
                  scores_orig.shape() == scores_shuffled.shape(),
              "dcl_cls_loss: branch score shapes must match");
  FGSSL_CHECK(scores_orig.dim(0) == static_cast<int64_t>(labels.size()),
              "dcl_cls_loss: one label per row required");
  Tensor<S> ce_orig = cross_entropy_mean(scores_orig, labels);
  Tensor<S> ce_shuf = cross_entropy_mean(scores_shuffled, labels);
  return ops::add(ce_orig, ce_shuf);
}

// Binary provenance discrimination: originals are class 0, shuffled images
// class 1; per-pair CE sum, meaned over the batch.
template <class S>
Tensor<S> dcl_adv_loss(const Tensor<S>& disc_orig, const Tensor<S>& disc_shuffled) {
  FGSSL_CHECK(disc_orig.rank() == 2 && disc_orig.dim(1) == 2 && disc_shuffled.rank() == 2 &&
                  disc_shuffled.dim(1) == 2 && disc_orig.dim(0) == disc_shuffled.dim(0),
              "dcl_adv_loss: need [B,2] scores for both branches");
  const int64_t b = disc_orig.dim(0);
  std::vector<int64_t> zeros(static_cast<size_t>(b), 0), ones(static_cast<size_t>(b), 1);
  Tensor<S> ce_orig = cross_entropy_mean(disc_orig, zeros);
  Tensor<S> ce_shuf = cross_entropy_mean(disc_shuffled, ones);
  return ops::add(ce_orig, ce_shuf);
}

namespace detail {

// Cell index grid for the classification reading of the location head:
// channel = flat index of the source cell. Recovered exactly from the
// normalized coordinate targets.
template <class S>
std::vector<int64_t> cells_from_targets(const Tensor<S>& targets) {
  const int64_t b = targets.dim(0), k = targets.dim(2);
  std::vector<int64_t> cells(static_cast<size_t>(b * k * k));
  const S* pt = targets.data();
  for (int64_t n = 0; n < b; ++n) {
    for (int64_t i = 0; i < k; ++i) {
      for (int64_t j = 0; j < k; ++j) {
        const double row_t = static_cast<double>(pt[((n * 2 + 0) * k + i) * k + j]);
        const double col_t = static_cast<double>(pt[((n * 2 + 1) * k + i) * k + j]);
        const int64_t si = static_cast<int64_t>(std::llround((row_t + 1.0) / 2.0 * static_cast<double>(k - 1)));
        const int64_t sj = static_cast<int64_t>(std::llround((col_t + 1.0) / 2.0 * static_cast<double>(k - 1)));
        FGSSL_CHECK(si >= 0 && si < k && sj >= 0 && sj < k,
                    "dcl_loc_loss: targets do not lie on the normalized grid");
        cells[static_cast<size_t>((n * k + i) * k + j)] = si * k + sj;
      }
    }
  }
  return cells;
}

template <class S>
Tensor<S> identity_coord_targets(int64_t b, int64_t k) {
  std::vector<S> t(static_cast<size_t>(b * 2 * k * k));
  for (int64_t n = 0; n < b; ++n) {
    for (int64_t i = 0; i < k; ++i) {
      for (int64_t j = 0; j < k; ++j) {
        t[static_cast<size_t>(((n * 2 + 0) * k + i) * k + j)] =
            static_cast<S>(2.0 * static_cast<double>(i) / static_cast<double>(k - 1) - 1.0);
        t[static_cast<size_t>(((n * 2 + 1) * k + i) * k + j)] =
            static_cast<S>(2.0 * static_cast<double>(j) / static_cast<double>(k - 1) - 1.0);
      }
    }
  }
  return Tensor<S>::from_data(Shape{b, 2, k, k}, std::move(t));
}

template <class S>
Tensor<S> one_hot_cell_targets(const std::vector<int64_t>& cells, int64_t b, int64_t k) {
  std::vector<S> t(static_cast<size_t>(b * k * k * k * k), S(0));
  for (int64_t n = 0; n < b; ++n) {
    for (int64_t cell = 0; cell < k * k; ++cell) {
      const int64_t ch = cells[static_cast<size_t>(n * k * k + cell)];
      t[static_cast<size_t>(((n * k * k + ch) * k + cell / k) * k + cell % k)] = S(1);
    }
  }
  return Tensor<S>::from_data(Shape{b, k * k, k, k}, std::move(t));
}

}  // namespace detail

// Repacks a [k,k,2] row-major (row_t, col_t) grid, as produced by
// location_targets, into the channel-first [2,k,k] layout the location head
// emits. Returned without a batch axis; stack rows for a batch.
template <class S>
std::vector<S> coord_grid_chw(const std::vector<float>& grid_kk2, int64_t k) {
  FGSSL_CHECK(static_cast<int64_t>(grid_kk2.size()) == k * k * 2,
              "coord_grid_chw: grid size must be k*k*2");
  std::vector<S> out(grid_kk2.size());
  for (int64_t c = 0; c < 2; ++c) {
    for (int64_t cell = 0; cell < k * k; ++cell) {
      out[static_cast<size_t>(c * k * k + cell)] = static_cast<S>(grid_kk2[static_cast<size_t>(cell * 2 + c)]);
    }
  }
  return out;
}

// Location reconstruction over both branches, per-patch averaged then batch
// averaged. Predictions and targets are channel-first: [B,2,k,k] coordinate
// grids for the regression modes, [B,k^2,k,k] logits for bce. Rank-3 inputs
// are treated as a batch of one. Targets always arrive as the [B,2,k,k]
// coordinate grid of the shuffled branch; the unshuffled branch is scored
// against the identity grid internally.
template <class S>
Tensor<S> dcl_loc_loss(const Tensor<S>& pred_orig_in, const Tensor<S>& pred_shuffled_in,
                       const Tensor<S>& targets_shuffled_in, LocMode mode) {
  Tensor<S> pred_orig = pred_orig_in, pred_shuffled = pred_shuffled_in,
            targets_shuffled = targets_shuffled_in;
  if (targets_shuffled.rank() == 3) {
    auto lift = [](const Tensor<S>& t) {
      Shape s = t.shape();
      s.insert(s.begin(), 1);
      return ops::reshape(t, s);
    };
    pred_orig = lift(pred_orig);
    pred_shuffled = lift(pred_shuffled);
    targets_shuffled = lift(targets_shuffled);
  }
  FGSSL_CHECK(targets_shuffled.rank() == 4 && targets_shuffled.dim(1) == 2,
              "dcl_loc_loss: targets must be [B,2,k,k]");
  FGSSL_CHECK(pred_orig.shape() == pred_shuffled.shape(), "dcl_loc_loss: branch shapes must match");
  const int64_t b = targets_shuffled.dim(0), k = targets_shuffled.dim(2);
  FGSSL_CHECK(targets_shuffled.dim(3) == k, "dcl_loc_loss: target grid must be square");
  FGSSL_CHECK(k >= 2, "dcl_loc_loss: grid side must be at least 2");
  const S norm = S(1) / static_cast<S>(b * k * k);

  if (mode == LocMode::mse || mode == LocMode::l1) {
    FGSSL_CHECK(pred_orig.shape() == targets_shuffled.shape(),
                "dcl_loc_loss: predictions must be [B,2,k,k] in regression modes");
    for (const Tensor<S>* p : {&pred_orig, &pred_shuffled}) {
      for (const S v : p->vec()) {
        FGSSL_CHECK(v >= S(-1) && v <= S(1),
                    "dcl_loc_loss: regression predictions must lie in [-1,1]");
      }
    }
    Tensor<S> t_id = detail::identity_coord_targets<S>(b, k);
    Tensor<S> d_shuf = ops::sub(pred_shuffled, targets_shuffled);
    Tensor<S> d_orig = ops::sub(pred_orig, t_id);
    if (mode == LocMode::mse) {
      return ops::scale(ops::add(ops::sum(ops::mul(d_shuf, d_shuf)), ops::sum(ops::mul(d_orig, d_orig))), norm);
    }
    return ops::scale(ops::add(ops::sum(ops::abs(d_shuf)), ops::sum(ops::abs(d_orig))), norm);
  }
  if (mode == LocMode::bce) {
    FGSSL_CHECK(pred_orig.rank() == 4 && pred_orig.dim(1) == k * k && pred_orig.dim(2) == k &&
                    pred_orig.dim(3) == k,
                "dcl_loc_loss: bce mode needs [B,k^2,k,k] logits");
    const auto cells = detail::cells_from_targets(targets_shuffled);
    std::vector<int64_t> id_cells(static_cast<size_t>(b * k * k));
    for (int64_t n = 0; n < b; ++n) {
      for (int64_t cell = 0; cell < k * k; ++cell) {
        id_cells[static_cast<size_t>(n * k * k + cell)] = cell;
      }
    }
    Tensor<S> t_shuf = detail::one_hot_cell_targets<S>(cells, b, k);
    Tensor<S> t_id = detail::one_hot_cell_targets<S>(id_cells, b, k);
    return ops::scale(ops::add(ops::sum(ops::bce_logits(pred_shuffled, t_shuf)),
                               ops::sum(ops::bce_logits(pred_orig, t_id))),
                      norm);
  }
  throw ConfigError("dcl_loc_loss: unknown mode");
}

// Unweighted sums; term selection (ablations) happens in the caller.
template <class S>
Tensor<S> dcl_total(const Tensor<S>& cls, const Tensor<S>& adv, const Tensor<S>& loc) {
  return ops::add(ops::add(cls, adv), loc);
}

template <class S>
Tensor<S> pirl_total(const Tensor<S>& cls, const Tensor<S>& pirl) {
  return ops::add(cls, pirl);
}

}  // namespace fgssl
