#pragma once

// Small convolutional backbone with per-variant heads, plus the checkpoint
// format. Parameters are identified by stable dotted names; initialization
// is a pure function of (seed, name).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fgssl/errors.hpp"
#include "fgssl/losses.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/tensor.hpp"

namespace fgssl {

enum class TrainMode { baseline, rotation, pirl, dcl, db_gce };

inline std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::baseline: return "baseline";
    case TrainMode::rotation: return "rotation";
    case TrainMode::pirl: return "pirl";
    case TrainMode::dcl: return "dcl";
    case TrainMode::db_gce: return "db_gce";
  }
  throw ConfigError("unknown train mode");
}

inline TrainMode parse_train_mode(const std::string& s) {
  if (s == "baseline") return TrainMode::baseline;
  if (s == "rotation") return TrainMode::rotation;
  if (s == "pirl") return TrainMode::pirl;
  if (s == "dcl") return TrainMode::dcl;
  if (s == "db_gce") return TrainMode::db_gce;
  throw ConfigError("unknown mode '" + s + "' (expected baseline|rotation|pirl|dcl|db_gce)");
}

inline std::string to_string(LocMode m) {
  switch (m) {
    case LocMode::mse: return "mse";
    case LocMode::l1: return "l1";
    case LocMode::bce: return "bce";
  }
  throw ConfigError("unknown location mode");
}

inline LocMode parse_loc_mode(const std::string& s) {
  if (s == "mse") return LocMode::mse;
  if (s == "l1") return LocMode::l1;
  if (s == "bce") return LocMode::bce;
  throw ConfigError("unknown location mode '" + s + "' (expected mse|l1|bce)");
}

struct ModelArch {
  int64_t num_classes = 20;
  TrainMode mode = TrainMode::baseline;
  int64_t loc_grid = 4;       // location head pool side (dcl)
  LocMode loc_mode = LocMode::mse;
  int64_t patch_count = 9;    // patches per image (pirl)
  int64_t embed_dim = 32;     // contrastive embedding width (pirl)
};

template <class S>
struct Parameter {
  std::string name;
  Tensor<S> value;
  std::vector<S> momentum;  // SGD velocity, same length as value
};

// Backbone: 3->16 conv3x3 + relu + pool2, 16->32 conv3x3 + relu + pool2,
// 32->64 conv3x3 + relu. Heads vary by mode; db_gce replaces the linear
// classifier with a 1x1 conv whose per-class maps feed GAP.
template <class S>
class Model {
 public:
  Model(const ModelArch& arch, uint64_t seed) : arch_(arch) {
    FGSSL_CHECK(arch.num_classes >= 2, "model: need at least 2 classes");
    FGSSL_CHECK(arch.embed_dim >= 1, "model: embedding dim must be positive");
    FGSSL_CHECK(arch.patch_count >= 1, "model: patch count must be positive");
    FGSSL_CHECK(arch.loc_grid >= 2, "model: location grid must be at least 2");
    const int64_t n = arch.num_classes;
    add_conv("backbone.conv1.weight", "backbone.conv1.bias", 16, 3, 3, seed);
    add_conv("backbone.conv2.weight", "backbone.conv2.bias", 32, 16, 3, seed);
    add_conv("backbone.conv3.weight", "backbone.conv3.bias", 64, 32, 3, seed);
    switch (arch.mode) {
      case TrainMode::baseline:
        add_linear("heads.cls", 64, n, seed);
        break;
      case TrainMode::rotation:
        add_linear("heads.cls", 64, n, seed);
        add_linear("heads.rot", 64, 4, seed);
        break;
      case TrainMode::pirl:
        add_linear("heads.cls", 64, n, seed);
        add_linear("heads.pirl_f", 64, arch.embed_dim, seed);
        add_linear("heads.pirl_g", arch.patch_count * 64, arch.embed_dim, seed);
        break;
      case TrainMode::dcl: {
        add_linear("heads.cls", 64, n, seed);
        add_linear("heads.adv", 64, 2, seed);
        const int64_t loc_out = arch.loc_mode == LocMode::bce ? arch.loc_grid * arch.loc_grid : 2;
        add_conv("heads.loc.weight", "heads.loc.bias", loc_out, 64, 1, seed);
        break;
      }
      case TrainMode::db_gce:
        add_conv("heads.cam.weight", "heads.cam.bias", n, 64, 1, seed);
        break;
    }
  }

  const ModelArch& arch() const { return arch_; }

  std::vector<Parameter<S>*> parameters() {
    std::vector<Parameter<S>*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  Parameter<S>& param(const std::string& name) {
    auto it = index_.find(name);
    FGSSL_CHECK(it != index_.end(), "model: no parameter named '" + name + "'");
    return *params_[it->second];
  }
  bool has_param(const std::string& name) const { return index_.count(name) > 0; }

  void zero_grad() {
    for (auto& p : params_) p->value.zero_grad();
  }

  // Feature extractor shared by every branch. Accepts [3,H,W] or [N,3,H,W];
  // spatial dims must be divisible by 4 (two pool stages).
  Tensor<S> backbone(const Tensor<S>& images) {
    FGSSL_CHECK(images.rank() == 3 || images.rank() == 4, "backbone: rank 3 or 4 input required");
    const int64_t h = images.dim(images.rank() - 2), w = images.dim(images.rank() - 1);
    FGSSL_CHECK(h % 4 == 0 && w % 4 == 0, "backbone: spatial dims must be divisible by 4");
    Tensor<S> x = ops::conv2d(images, param("backbone.conv1.weight").value,
                              param("backbone.conv1.bias").value, 1, 1);
    x = ops::max_pool2(ops::relu(x));
    x = ops::conv2d(x, param("backbone.conv2.weight").value, param("backbone.conv2.bias").value, 1, 1);
    x = ops::max_pool2(ops::relu(x));
    x = ops::conv2d(x, param("backbone.conv3.weight").value, param("backbone.conv3.bias").value, 1, 1);
    return ops::relu(x);
  }

  // GAP + linear readouts over backbone features [N,64,h,w].
  Tensor<S> class_scores(const Tensor<S>& features) {
    if (arch_.mode == TrainMode::db_gce) {
      return ops::global_avg_pool(cam_maps(features));
    }
    return linear_head(features, "heads.cls");
  }
  Tensor<S> rotation_scores(const Tensor<S>& features) { return linear_head(features, "heads.rot"); }
  Tensor<S> adversary_scores(const Tensor<S>& features) { return linear_head(features, "heads.adv"); }

  // Location head: 1x1 conv then adaptive pool to the grid side. Regression
  // modes pass through tanh, so outputs sit strictly inside (-1,1); the
  // classification mode returns raw logits.
  Tensor<S> location_map(const Tensor<S>& features) {
    FGSSL_CHECK(has_param("heads.loc.weight"), "location_map: model has no location head");
    Tensor<S> m = ops::conv2d(features, param("heads.loc.weight").value,
                              param("heads.loc.bias").value, 1, 0);
    m = ops::adaptive_avg_pool(m, arch_.loc_grid, arch_.loc_grid);
    if (arch_.loc_mode == LocMode::bce) return m;
    return ops::tanh(m);
  }

  // Per-class activation maps A = cam(F), [N_batch, num_classes, h, w].
  Tensor<S> cam_maps(const Tensor<S>& features) {
    FGSSL_CHECK(has_param("heads.cam.weight"),
                "cam_maps: model was not built with a 1x1-conv classifier");
    return ops::conv2d(features, param("heads.cam.weight").value, param("heads.cam.bias").value, 1, 0);
  }
  Tensor<S> cam_forward(const Tensor<S>& images) { return cam_maps(backbone(images)); }

  // Contrastive embeddings. v_img embeds the pooled image features through
  // pirl_f; v_patch pools each patch, concatenates the n pooled vectors in
  // patch order, and projects through pirl_g. Both are L2-normalized rows.
  struct PirlEmbeddings {
    Tensor<S> v_img;    // [B,E]
    Tensor<S> v_patch;  // [B,E]
  };
  PirlEmbeddings pirl_embed_features(const Tensor<S>& image_features,
                                     const Tensor<S>& patch_images) {
    const int64_t n = arch_.patch_count;
    FGSSL_CHECK(image_features.rank() == 4, "pirl_embed: image features must be [B,64,h,w]");
    const int64_t b = image_features.dim(0);
    FGSSL_CHECK(patch_images.rank() == 4 && patch_images.dim(0) == b * n,
                "pirl_embed: expected " + std::to_string(b * n) + " patches in image order");
    Tensor<S> v_img = ops::l2_normalize(linear_rows(ops::global_avg_pool(image_features), "heads.pirl_f"));
    Tensor<S> pooled = ops::global_avg_pool(backbone(patch_images));   // [B*n,64]
    Tensor<S> grouped = ops::reshape(pooled, Shape{b, n * 64});
    Tensor<S> v_patch = ops::l2_normalize(linear_rows(grouped, "heads.pirl_g"));
    return {v_img, v_patch};
  }
  PirlEmbeddings pirl_embed(const Tensor<S>& images, const Tensor<S>& patch_images) {
    return pirl_embed_features(backbone(images), patch_images);
  }

 private:
  void add_param(const std::string& name, Shape shape, int64_t fan_in, uint64_t seed) {
    auto p = std::make_unique<Parameter<S>>();
    p->name = name;
    p->value = Tensor<S>::zeros(std::move(shape), true);
    p->momentum.assign(static_cast<size_t>(p->value.numel()), S(0));
    if (fan_in > 0) {
      Rng rng(derive_stream(seed, {stream::kInit, fnv1a64(name)}));
      const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
      S* d = p->value.data();
      for (int64_t i = 0; i < p->value.numel(); ++i) {
        d[i] = static_cast<S>(rng.normal(0.0, stddev));
      }
    }
    FGSSL_CHECK(index_.emplace(name, params_.size()).second, "model: duplicate parameter name");
    params_.push_back(std::move(p));
  }

  void add_conv(const std::string& wname, const std::string& bname, int64_t out_ch, int64_t in_ch,
                int64_t ksize, uint64_t seed) {
    add_param(wname, Shape{out_ch, in_ch, ksize, ksize}, in_ch * ksize * ksize, seed);
    add_param(bname, Shape{out_ch}, 0, seed);
  }

  void add_linear(const std::string& prefix, int64_t in_dim, int64_t out_dim, uint64_t seed) {
    add_param(prefix + ".weight", Shape{in_dim, out_dim}, in_dim, seed);
    add_param(prefix + ".bias", Shape{out_dim}, 0, seed);
  }

  Tensor<S> linear_rows(const Tensor<S>& rows, const std::string& prefix) {
    return ops::add_rowvec(ops::matmul(rows, param(prefix + ".weight").value),
                           param(prefix + ".bias").value);
  }
  Tensor<S> linear_head(const Tensor<S>& features, const std::string& prefix) {
    FGSSL_CHECK(features.rank() == 4, "head: features must be batched [B,C,h,w]");
    return linear_rows(ops::global_avg_pool(features), prefix);
  }

  ModelArch arch_;
  std::vector<std::unique_ptr<Parameter<S>>> params_;
  std::unordered_map<std::string, size_t> index_;
};

// Checkpoint file layout, all integers little-endian:
//   magic "SSLFGVC1" (8 bytes)
//   u64 epoch, u64 config hash, u32 record count
//   per record: u32 name length, name bytes, u32 rank, u64 dims, f32 payload
struct CheckpointRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct CheckpointData {
  uint64_t epoch = 0;
  uint64_t config_hash = 0;
  std::vector<CheckpointRecord> records;
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <class T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("checkpoint: truncated payload");
  return v;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'S', 'S', 'L', 'F', 'G', 'V', 'C', '1'};

template <class S>
void save_checkpoint(Model<S>& model, const std::string& path, uint64_t epoch,
                     uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kCheckpointMagic, 8);
  detail::write_pod(os, epoch);
  detail::write_pod(os, config_hash);
  auto params = model.parameters();
  detail::write_pod(os, static_cast<uint32_t>(params.size()));
  for (const Parameter<S>* p : params) {
    detail::write_pod(os, static_cast<uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::write_pod(os, static_cast<uint32_t>(p->value.rank()));
    for (int64_t d : p->value.shape()) detail::write_pod(os, static_cast<uint64_t>(d));
    const S* v = p->value.data();
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      detail::write_pod(os, static_cast<float>(v[i]));
    }
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

inline CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw IoError("checkpoint: bad magic in '" + path + "'");
  }
  CheckpointData data;
  data.epoch = detail::read_pod<uint64_t>(is);
  data.config_hash = detail::read_pod<uint64_t>(is);
  const uint32_t count = detail::read_pod<uint32_t>(is);
  data.records.resize(count);
  for (auto& rec : data.records) {
    const uint32_t name_len = detail::read_pod<uint32_t>(is);
    FGSSL_CHECK(name_len > 0 && name_len < 4096, "checkpoint: implausible name length");
    rec.name.resize(name_len);
    is.read(rec.name.data(), name_len);
    if (!is) throw IoError("checkpoint: truncated payload");
    const uint32_t rank = detail::read_pod<uint32_t>(is);
    FGSSL_CHECK(rank <= 8, "checkpoint: implausible tensor rank");
    rec.shape.resize(rank);
    int64_t numel = 1;
    for (auto& d : rec.shape) {
      d = static_cast<int64_t>(detail::read_pod<uint64_t>(is));
      FGSSL_CHECK(d > 0 && d < (int64_t(1) << 32), "checkpoint: implausible dimension");
      numel *= d;
    }
    rec.values.resize(static_cast<size_t>(numel));
    is.read(reinterpret_cast<char*>(rec.values.data()),
            static_cast<std::streamsize>(sizeof(float) * rec.values.size()));
    if (!is) throw IoError("checkpoint: truncated payload");
  }
  char extra;
  if (is.read(&extra, 1)) throw IoError("checkpoint: trailing bytes after records");
  return data;
}

// Copies checkpoint values into an existing model; every record must match a
// parameter of the same name and shape, and every parameter must be covered.
template <class S>
void load_into(Model<S>& model, const CheckpointData& data) {
  auto params = model.parameters();
  FGSSL_CHECK(params.size() == data.records.size(),
              "checkpoint: holds " + std::to_string(data.records.size()) + " records but model has " +
                  std::to_string(params.size()) + " parameters");
  for (const auto& rec : data.records) {
    Parameter<S>& p = model.param(rec.name);
    FGSSL_CHECK(p.value.shape() == rec.shape,
                "checkpoint: shape mismatch for parameter '" + rec.name + "' (stored " +
                    shape_str(rec.shape) + ", model " + shape_str(p.value.shape()) + ")");
    S* d = p.value.data();
    for (size_t i = 0; i < rec.values.size(); ++i) d[i] = static_cast<S>(rec.values[i]);
    std::fill(p.momentum.begin(), p.momentum.end(), S(0));
  }
}

// Reconstructs the architecture from record names alone, so `eval` and `cam`
// need no side-channel config.
inline ModelArch arch_from_checkpoint(const CheckpointData& data) {
  ModelArch arch;
  auto find = [&](const std::string& name) -> const CheckpointRecord* {
    for (const auto& r : data.records) {
      if (r.name == name) return &r;
    }
    return nullptr;
  };
  if (const auto* cam = find("heads.cam.weight")) {
    arch.mode = TrainMode::db_gce;
    arch.num_classes = cam->shape.at(0);
    return arch;
  }
  const auto* cls = find("heads.cls.weight");
  FGSSL_CHECK(cls != nullptr, "checkpoint: no classifier head found");
  arch.num_classes = cls->shape.at(1);
  if (find("heads.rot.weight")) {
    arch.mode = TrainMode::rotation;
  } else if (const auto* g = find("heads.pirl_g.weight")) {
    arch.mode = TrainMode::pirl;
    arch.patch_count = g->shape.at(0) / 64;
    arch.embed_dim = g->shape.at(1);
  } else if (const auto* loc = find("heads.loc.weight")) {
    arch.mode = TrainMode::dcl;
    const int64_t out_ch = loc->shape.at(0);
    if (out_ch == 2) {
      arch.loc_mode = LocMode::mse;
    } else {
      arch.loc_mode = LocMode::bce;
      const auto side = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(out_ch))));
      FGSSL_CHECK(side * side == out_ch, "checkpoint: location head size is not a square");
      arch.loc_grid = side;
    }
  } else {
    arch.mode = TrainMode::baseline;
  }
  return arch;
}

template <class S>
Model<S> model_from_checkpoint(const CheckpointData& data) {
  Model<S> model(arch_from_checkpoint(data), 0);
  load_into(model, data);
  return model;
}

}  // namespace fgssl
