#pragma once

// End-to-end optimization: SGD with momentum, the learning-rate and CE->GCE
// schedules, one training-step recipe per mode, and evaluation. Everything
// downstream of the config seed is deterministic; augmentation randomness is
// keyed by (purpose, epoch, sample id) so modes sharing a seed draw identical
// streams for the stages they share.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fgssl/dataset.hpp"
#include "fgssl/diversification.hpp"
#include "fgssl/errors.hpp"
#include "fgssl/image.hpp"
#include "fgssl/losses.hpp"
#include "fgssl/metrics.hpp"
#include "fgssl/model.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/tensor.hpp"
#include "fgssl/transforms.hpp"

namespace fgssl {

struct RcmConfig {
  int64_t k = 4;  // cells per side
  int64_t D = 2;  // movement bound

  bool operator==(const RcmConfig&) const = default;
};

struct PirlConfig {
  double tau = 0.07;
  double beta = 0.5;
  int64_t negatives = 1000;  // clamped to bank size - 1
  int64_t grid = 3;
  int64_t patch_size = 8;
  int64_t resize = 36;
  int64_t crop = 36;

  bool operator==(const PirlConfig&) const = default;
};

struct GceConfig {
  int64_t k = 5;
  int64_t warmup_epochs = 10;

  bool operator==(const GceConfig&) const = default;
};

struct PreprocessConfig {
  int64_t resize = 36;
  int64_t crop = 32;

  bool operator==(const PreprocessConfig&) const = default;
};

struct DclAblation {
  bool cls = true;
  bool adv = true;
  bool loc = true;

  bool operator==(const DclAblation&) const = default;
};

struct TrainConfig {
  TrainMode mode = TrainMode::baseline;
  int64_t epochs = 40;
  int64_t batch_size = 8;
  double lr = 0.01;
  double momentum = 0.9;
  double lr_decay_factor = 0.1;
  int64_t lr_decay_epoch = 20;
  double lambda = 0.1;  // rotation loss weight
  RcmConfig rcm;
  PirlConfig pirl;
  DbConfig db;
  GceConfig gce;
  LocMode loc_mode = LocMode::mse;
  DclAblation dcl_ablation;
  PreprocessConfig preprocess;
  double label_fraction = 1.0;
  uint64_t seed = 1;

  bool operator==(const TrainConfig&) const = default;
};

// The published full-scale regime, kept as a named preset.
inline TrainConfig full_scale_preset() {
  TrainConfig cfg;
  cfg.epochs = 110;
  cfg.lr = 0.001;
  cfg.lr_decay_epoch = 50;
  cfg.rcm.k = 7;
  return cfg;
}

inline void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(cfg.lr > 0.0)) throw ConfigError("lr must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw ConfigError("momentum must lie in [0,1)");
  if (!(cfg.lr_decay_factor > 0.0)) throw ConfigError("lr_decay_factor must be positive");
  if (cfg.lr_decay_epoch < 0) throw ConfigError("lr_decay_epoch must be nonnegative");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw ConfigError("lambda must lie in [0,1]");
  if (cfg.label_fraction <= 0.0 || cfg.label_fraction > 1.0) {
    throw ConfigError("label_fraction must lie in (0,1]");
  }
  if (cfg.preprocess.resize < 4) throw ConfigError("preprocess.resize too small");
  if (cfg.preprocess.crop < 4 || cfg.preprocess.crop > cfg.preprocess.resize) {
    throw ConfigError("preprocess.crop must lie in [4, preprocess.resize]");
  }
  if (cfg.preprocess.crop % 4 != 0) {
    throw ConfigError("preprocess.crop must be divisible by 4 (two pooling stages)");
  }
  if (cfg.rcm.k < 2) throw ConfigError("rcm.k must be at least 2");
  if (cfg.rcm.D < 0 || cfg.rcm.D >= cfg.rcm.k) throw ConfigError("rcm.D must lie in [0, k)");
  if (cfg.mode == TrainMode::dcl && cfg.preprocess.crop % cfg.rcm.k != 0) {
    throw ConfigError("rcm.k must divide preprocess.crop");
  }
  if (cfg.mode == TrainMode::dcl && !cfg.dcl_ablation.cls && !cfg.dcl_ablation.adv &&
      !cfg.dcl_ablation.loc) {
    throw ConfigError("dcl_ablation must keep at least one term");
  }
  if (!(cfg.pirl.tau > 0.0)) throw ConfigError("pirl.tau must be positive");
  if (cfg.pirl.beta < 0.0 || cfg.pirl.beta > 1.0) throw ConfigError("pirl.beta must lie in [0,1]");
  if (cfg.pirl.negatives < 0) throw ConfigError("pirl.negatives must be nonnegative");
  if (cfg.pirl.grid != 2 && cfg.pirl.grid != 3) throw ConfigError("pirl.grid must be 2 or 3");
  if (cfg.pirl.crop < 1 || cfg.pirl.crop > cfg.pirl.resize) {
    throw ConfigError("pirl.crop must lie in [1, pirl.resize]");
  }
  if (cfg.mode == TrainMode::pirl) {
    if (cfg.pirl.crop % cfg.pirl.grid != 0) throw ConfigError("pirl.grid must divide pirl.crop");
    const int64_t cell = cfg.pirl.crop / cfg.pirl.grid;
    if (cfg.pirl.patch_size < 4 || cfg.pirl.patch_size > cell) {
      throw ConfigError("pirl.patch_size must lie in [4, crop/grid]");
    }
    if (cfg.pirl.patch_size % 4 != 0) {
      throw ConfigError("pirl.patch_size must be divisible by 4 (two pooling stages)");
    }
  }
  if (cfg.gce.k < 1) throw ConfigError("gce.k must be at least 1");
  if (cfg.gce.warmup_epochs < 0) throw ConfigError("gce.warmup_epochs must be nonnegative");
  validate(cfg.db);
  if (cfg.mode == TrainMode::db_gce && !cfg.db.train_only) {
    throw ConfigError("db.train_only=false (evaluation-time suppression) is not supported");
  }
}

inline double lr_at(const TrainConfig& cfg, int64_t epoch) {
  return epoch < cfg.lr_decay_epoch ? cfg.lr : cfg.lr * cfg.lr_decay_factor;
}

// CE while epoch < warmup_epochs, GCE afterward.
inline bool use_gce_at(const GceConfig& cfg, int64_t epoch) {
  FGSSL_CHECK(epoch >= 0, "loss schedule: epoch must be nonnegative");
  return epoch >= cfg.warmup_epochs;
}

// buffer <- momentum*buffer + grad; param <- param - lr*buffer. Parameters
// whose gradient buffer was never touched this step coast on their momentum.
// At least one parameter must carry a gradient.
template <class S>
void sgd_step(const std::vector<Parameter<S>*>& params, double lr, double momentum) {
  bool any = false;
  for (const Parameter<S>* p : params) {
    if (p->value.has_grad()) {
      any = true;
      break;
    }
  }
  FGSSL_CHECK(any, "sgd_step: no gradients populated");
  const S m = static_cast<S>(momentum), step = static_cast<S>(lr);
  for (Parameter<S>* p : params) {
    const bool has = p->value.has_grad();
    const S* g = has ? p->value.grad_vec().data() : nullptr;
    S* v = p->value.data();
    S* buf = p->momentum.data();
    const int64_t n = p->value.numel();
    for (int64_t i = 0; i < n; ++i) {
      buf[i] = m * buf[i] + (has ? g[i] : S(0));
      v[i] -= step * buf[i];
    }
  }
}

namespace detail {

// Label's rank under the tie rule "lower index wins": the count of classes
// that beat the label outright plus earlier classes that tie it.
template <class S>
int64_t label_rank(const S* scores, int64_t n, int64_t label) {
  int64_t rank = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (scores[i] > scores[label] || (scores[i] == scores[label] && i < label)) ++rank;
  }
  return rank;
}

}  // namespace detail

// Top-1/top-2 percentages from already-preprocessed images.
template <class S>
std::pair<double, double> evaluate_images(Model<S>& model, const std::vector<Image>& images,
                                          const std::vector<int64_t>& labels) {
  FGSSL_CHECK(!images.empty(), "evaluate: empty test set");
  FGSSL_CHECK(images.size() == labels.size(), "evaluate: one label per image required");
  NoTapeScope<S> off_tape;
  int64_t top1 = 0, top2 = 0;
  const int64_t chunk = 100;
  const int64_t n = static_cast<int64_t>(images.size());
  for (int64_t begin = 0; begin < n; begin += chunk) {
    const int64_t end = std::min(n, begin + chunk);
    std::vector<Image> part(images.begin() + begin, images.begin() + end);
    Tensor<S> scores = model.class_scores(model.backbone(to_tensor<S>(part)));
    const int64_t classes = scores.dim(1);
    for (int64_t b = 0; b < end - begin; ++b) {
      const int64_t rank = detail::label_rank(scores.data() + b * classes, classes,
                                              labels[static_cast<size_t>(begin + b)]);
      if (rank == 0) ++top1;
      if (rank < 2) ++top2;
    }
  }
  return {100.0 * static_cast<double>(top1) / static_cast<double>(n),
          100.0 * static_cast<double>(top2) / static_cast<double>(n)};
}

// Test-time protocol: bilinear resize then center crop, classifier head only.
template <class S>
std::pair<double, double> evaluate(Model<S>& model, const Dataset& test,
                                   const PreprocessConfig& pp = PreprocessConfig{}) {
  FGSSL_CHECK(!test.samples.empty(), "evaluate: empty test set");
  std::vector<Image> images;
  std::vector<int64_t> labels;
  images.reserve(test.samples.size());
  labels.reserve(test.samples.size());
  for (const Sample& s : test.samples) {
    images.push_back(center_crop(resize(s.image, pp.resize, pp.resize), pp.crop, pp.crop));
    labels.push_back(s.label);
  }
  return evaluate_images(model, images, labels);
}

template <class S>
struct TrainResult {
  Model<S> model;
  std::vector<MetricsRow> history;
};

namespace detail {

struct EpochAccum {
  double total = 0.0, cls = 0.0, ssl = 0.0;
  int64_t count = 0;
  void add(double t, double c, double s, int64_t batch) {
    const double b = static_cast<double>(batch);
    total += t * b;
    cls += c * b;
    ssl += s * b;
    count += batch;
  }
};

template <class S>
double loss_value(const Tensor<S>& loss, int64_t epoch) {
  const double v = static_cast<double>(loss.item());
  if (!std::isfinite(v)) {
    throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
  }
  return v;
}

template <class S>
Tensor<S> row(const Tensor<S>& matrix, int64_t r) {
  return ops::reshape(ops::slice_rows(matrix, r, r + 1), Shape{matrix.dim(1)});
}

}  // namespace detail

// Runs the configured mode end to end and returns the final model plus the
// per-epoch metrics history. Training augmentation is resize + random crop;
// evaluation uses resize + center crop every epoch.
template <class S>
TrainResult<S> train(const TrainConfig& cfg, const Dataset& train_full, const Dataset& test) {
  validate(cfg);
  FGSSL_CHECK(train_full.size() > 0 && test.size() > 0, "train: datasets must be nonempty");
  const int64_t classes = train_full.num_classes;
  FGSSL_CHECK(classes >= 2, "train: need at least 2 classes");
  if (cfg.mode == TrainMode::db_gce) {
    if (cfg.gce.k > classes - 1) throw ConfigError("gce.k must be at most num_classes-1");
  }

  Dataset labeled = split_semi_supervised(train_full, SplitSpec{cfg.label_fraction, cfg.seed});
  const int64_t n = labeled.size();

  ModelArch arch;
  arch.num_classes = classes;
  arch.mode = cfg.mode;
  arch.loc_grid = cfg.rcm.k;
  arch.loc_mode = cfg.loc_mode;
  arch.patch_count = cfg.pirl.grid * cfg.pirl.grid;
  Model<S> model(arch, cfg.seed);
  auto params = model.parameters();

  // Deterministic per-run caches: the resize stage of training preprocessing
  // is epoch-independent, and the whole eval preprocessing is fixed.
  std::vector<Image> resized(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    resized[static_cast<size_t>(i)] =
        resize(labeled.samples[static_cast<size_t>(i)].image, cfg.preprocess.resize,
               cfg.preprocess.resize);
  }
  std::vector<Image> eval_images;
  std::vector<int64_t> eval_labels;
  eval_images.reserve(test.samples.size());
  eval_labels.reserve(test.samples.size());
  for (const Sample& s : test.samples) {
    eval_images.push_back(center_crop(resize(s.image, cfg.preprocess.resize, cfg.preprocess.resize),
                                      cfg.preprocess.crop, cfg.preprocess.crop));
    eval_labels.push_back(s.label);
  }

  std::unique_ptr<MemoryBank<S>> bank;
  if (cfg.mode == TrainMode::pirl) {
    std::vector<int64_t> ids;
    ids.reserve(labeled.samples.size());
    for (const Sample& s : labeled.samples) ids.push_back(s.id);
    bank = std::make_unique<MemoryBank<S>>(ids, arch.embed_dim, static_cast<S>(cfg.pirl.tau),
                                           static_cast<S>(cfg.pirl.beta), cfg.seed);
  }

  std::vector<MetricsRow> history;
  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg, epoch);
    Rng shuffle_rng(derive_stream(cfg.seed, {stream::kShuffle, static_cast<uint64_t>(epoch)}));
    std::vector<int64_t> order = shuffle_rng.permutation(n);
    detail::EpochAccum accum;

    for (int64_t begin = 0; begin < n; begin += cfg.batch_size) {
      const int64_t end = std::min(n, begin + cfg.batch_size);
      const int64_t bsize = end - begin;

      std::vector<Image> aug(static_cast<size_t>(bsize));
      std::vector<int64_t> labels(static_cast<size_t>(bsize));
      std::vector<int64_t> ids(static_cast<size_t>(bsize));
      for (int64_t b = 0; b < bsize; ++b) {
        const auto& sample = labeled.samples[static_cast<size_t>(order[static_cast<size_t>(begin + b)])];
        Rng crop_rng(derive_stream(
            cfg.seed, {stream::kCrop, static_cast<uint64_t>(epoch), static_cast<uint64_t>(sample.id)}));
        aug[static_cast<size_t>(b)] =
            random_crop(resized[static_cast<size_t>(order[static_cast<size_t>(begin + b)])],
                        cfg.preprocess.crop, cfg.preprocess.crop, crop_rng);
        labels[static_cast<size_t>(b)] = sample.label;
        ids[static_cast<size_t>(b)] = sample.id;
      }

      GradGraph<S> graph;
      TapeScope<S> scope(graph);
      Tensor<S> total, pirl_reps;
      double ssl_value = 0.0, cls_value = 0.0;

      switch (cfg.mode) {
        case TrainMode::baseline: {
          Tensor<S> scores = model.class_scores(model.backbone(to_tensor<S>(aug)));
          total = cross_entropy_mean(scores, labels);
          cls_value = detail::loss_value(total, epoch);
          break;
        }
        case TrainMode::rotation: {
          // Rotation-major layout: entries [r*B, (r+1)*B) hold rotation r, so
          // the leading B rows are the unrotated images the classifier sees.
          std::vector<Image> four(static_cast<size_t>(4 * bsize));
          std::vector<int64_t> rot_labels(static_cast<size_t>(4 * bsize));
          for (int64_t r = 0; r < 4; ++r) {
            for (int64_t b = 0; b < bsize; ++b) {
              four[static_cast<size_t>(r * bsize + b)] =
                  rotate90(aug[static_cast<size_t>(b)], static_cast<int>(r));
              rot_labels[static_cast<size_t>(r * bsize + b)] = r;
            }
          }
          Tensor<S> feats = model.backbone(to_tensor<S>(four));
          Tensor<S> cls = cross_entropy_mean(
              model.class_scores(ops::slice_rows(feats, 0, bsize)), labels);
          Tensor<S> rot = cross_entropy_mean(model.rotation_scores(feats), rot_labels);
          total = rotation_total(cls, rot, cfg.lambda);
          cls_value = detail::loss_value(cls, epoch);
          ssl_value = detail::loss_value(rot, epoch);
          break;
        }
        case TrainMode::pirl: {
          std::vector<Image> patches;
          patches.reserve(static_cast<size_t>(bsize * arch.patch_count));
          for (int64_t b = 0; b < bsize; ++b) {
            const auto& sample =
                labeled.samples[static_cast<size_t>(order[static_cast<size_t>(begin + b)])];
            Rng patch_rng(derive_stream(cfg.seed, {stream::kPatches, static_cast<uint64_t>(epoch),
                                                   static_cast<uint64_t>(sample.id)}));
            PatchSet set = extract_jigsaw_patches(sample.image, cfg.pirl.resize, cfg.pirl.crop,
                                                  cfg.pirl.grid, cfg.pirl.patch_size, patch_rng);
            for (auto& p : set.patches) patches.push_back(std::move(p));
          }
          Tensor<S> feats = model.backbone(to_tensor<S>(aug));
          Tensor<S> cls = cross_entropy_mean(model.class_scores(feats), labels);
          auto emb = model.pirl_embed_features(feats, to_tensor<S>(patches));
          const int64_t want = std::min<int64_t>(cfg.pirl.negatives, bank->size() - 1);
          std::vector<Tensor<S>> per_sample;
          for (int64_t b = 0; b < bsize; ++b) {
            Rng neg_rng(derive_stream(cfg.seed, {stream::kNegatives, static_cast<uint64_t>(epoch),
                                                 static_cast<uint64_t>(ids[static_cast<size_t>(b)])}));
            const auto neg_ids =
                bank->sample_negatives(ids[static_cast<size_t>(b)], want, neg_rng);
            Tensor<S> negs = bank->negatives_tensor(neg_ids, ids[static_cast<size_t>(b)]);
            per_sample.push_back(ops::reshape(
                pirl_loss(detail::row(emb.v_img, b), detail::row(emb.v_patch, b), negs,
                          static_cast<S>(cfg.pirl.tau)),
                Shape{1}));
          }
          Tensor<S> ssl =
              ops::scale(ops::sum(ops::concat(per_sample)), S(1) / static_cast<S>(bsize));
          total = pirl_total(cls, ssl);
          cls_value = detail::loss_value(cls, epoch);
          ssl_value = detail::loss_value(ssl, epoch);
          // Bank refresh happens after the optimizer step; stash the rows.
          pirl_reps = emb.v_img;
          break;
        }
        case TrainMode::dcl: {
          std::vector<Image> both(static_cast<size_t>(2 * bsize));
          std::vector<S> target_data;
          target_data.reserve(static_cast<size_t>(bsize * 2 * cfg.rcm.k * cfg.rcm.k));
          for (int64_t b = 0; b < bsize; ++b) {
            Rng region_rng(derive_stream(cfg.seed, {stream::kRegion, static_cast<uint64_t>(epoch),
                                                    static_cast<uint64_t>(ids[static_cast<size_t>(b)])}));
            RegionPermutation perm = region_permutation(cfg.rcm.k, cfg.rcm.D, region_rng);
            both[static_cast<size_t>(b)] = aug[static_cast<size_t>(b)];
            both[static_cast<size_t>(bsize + b)] =
                apply_region_shuffle(aug[static_cast<size_t>(b)], perm);
            const auto grid = coord_grid_chw<S>(location_targets(perm), cfg.rcm.k);
            target_data.insert(target_data.end(), grid.begin(), grid.end());
          }
          Tensor<S> feats = model.backbone(to_tensor<S>(both));
          Tensor<S> f_orig = ops::slice_rows(feats, 0, bsize);
          Tensor<S> f_shuf = ops::slice_rows(feats, bsize, 2 * bsize);
          Tensor<S> scores_orig = model.class_scores(f_orig);

          std::vector<Tensor<S>> terms;
          if (cfg.dcl_ablation.cls) {
            terms.push_back(dcl_cls_loss(scores_orig, model.class_scores(f_shuf), labels));
          }
          if (cfg.dcl_ablation.adv) {
            terms.push_back(
                dcl_adv_loss(model.adversary_scores(f_orig), model.adversary_scores(f_shuf)));
          }
          if (cfg.dcl_ablation.loc) {
            Tensor<S> targets = Tensor<S>::from_data(
                Shape{bsize, 2, cfg.rcm.k, cfg.rcm.k}, std::move(target_data));
            terms.push_back(dcl_loc_loss(model.location_map(f_orig), model.location_map(f_shuf),
                                         targets, cfg.loc_mode));
          }
          total = terms[0];
          for (size_t t = 1; t < terms.size(); ++t) total = ops::add(total, terms[t]);
          ssl_value = detail::loss_value(total, epoch);
          {
            // Plain CE on the original images, off the tape: a diagnostic
            // column comparable across modes, not part of the objective.
            NoTapeScope<S> off;
            cls_value = detail::loss_value(cross_entropy_mean(scores_orig, labels), epoch);
          }
          break;
        }
        case TrainMode::db_gce: {
          Tensor<S> maps = model.cam_maps(model.backbone(to_tensor<S>(aug)));
          const int64_t mh = maps.dim(2), mw = maps.dim(3);
          const int64_t per = classes * mh * mw;
          std::vector<S> factor(static_cast<size_t>(bsize * per));
          for (int64_t b = 0; b < bsize; ++b) {
            Rng mask_rng(derive_stream(cfg.seed, {stream::kMask, static_cast<uint64_t>(epoch),
                                                  static_cast<uint64_t>(ids[static_cast<size_t>(b)])}));
            std::vector<S> slice(maps.data() + b * per, maps.data() + (b + 1) * per);
            Tensor<S> view = Tensor<S>::from_data(Shape{classes, mh, mw}, std::move(slice));
            const auto mask = suppression_mask(view, cfg.db, mask_rng);
            for (int64_t i = 0; i < per; ++i) {
              factor[static_cast<size_t>(b * per + i)] =
                  mask[static_cast<size_t>(i)] ? static_cast<S>(cfg.db.alpha) : S(1);
            }
          }
          Tensor<S> suppressed =
              ops::mul(maps, Tensor<S>::from_data(maps.shape(), std::move(factor)));
          Tensor<S> scores = ops::global_avg_pool(suppressed);
          total = use_gce_at(cfg.gce, epoch) ? gce_loss_mean(scores, labels, cfg.gce.k)
                                             : cross_entropy_mean(scores, labels);
          cls_value = detail::loss_value(total, epoch);
          break;
        }
      }

      const double total_value = detail::loss_value(total, epoch);
      model.zero_grad();
      graph.backward(total);
      sgd_step(params, lr, cfg.momentum);

      if (cfg.mode == TrainMode::pirl) {
        for (int64_t b = 0; b < bsize; ++b) {
          bank->update(ids[static_cast<size_t>(b)], pirl_reps.data() + b * arch.embed_dim,
                       arch.embed_dim);
        }
      }
      const double ssl_col = cfg.mode == TrainMode::dcl ? total_value : ssl_value;
      accum.add(total_value, cls_value, ssl_col, bsize);
    }

    auto [top1, top2] = evaluate_images(model, eval_images, eval_labels);
    MetricsRow row;
    row.epoch = epoch;
    row.train_total_loss = accum.total / static_cast<double>(accum.count);
    row.train_cls_loss = accum.cls / static_cast<double>(accum.count);
    row.train_ssl_loss = accum.ssl / static_cast<double>(accum.count);
    row.test_top1 = top1;
    row.test_top2 = top2;
    row.lr = lr;
    history.push_back(row);
  }

  return TrainResult<S>{std::move(model), std::move(history)};
}

}  // namespace fgssl
