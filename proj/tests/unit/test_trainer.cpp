#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "fgssl/dataset.hpp"
#include "fgssl/errors.hpp"
#include "fgssl/metrics.hpp"
#include "fgssl/trainer.hpp"

using namespace fgssl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TrainConfig tiny_config(TrainMode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  cfg.lr = 0.01;
  cfg.seed = 3;
  cfg.preprocess.resize = 18;
  cfg.preprocess.crop = 16;
  cfg.rcm.k = 4;
  cfg.rcm.D = 2;
  cfg.pirl.grid = 2;
  cfg.pirl.resize = 16;
  cfg.pirl.crop = 16;
  cfg.pirl.patch_size = 8;
  cfg.pirl.negatives = 3;
  cfg.gce.k = 1;
  cfg.gce.warmup_epochs = 1;
  return cfg;
}

}  // namespace

TEST_CASE("sgd step applies the momentum recursion") {
  Parameter<double> p;
  p.name = "w";
  p.value = Tensor<double>::from_data(Shape{2}, {1.0, 2.0}, true);
  p.momentum = {0.0, 0.0};
  p.value.grad() = {0.5, -1.0};
  std::vector<Parameter<double>*> params{&p};
  sgd_step(params, 0.1, 0.9);
  // First step: buf = g, v -= lr*g.
  CHECK(p.value.data()[0] == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-12));
  CHECK(p.value.data()[1] == doctest::Approx(2.0 + 0.1 * 1.0).epsilon(1e-12));
  p.value.grad() = {0.5, -1.0};
  sgd_step(params, 0.1, 0.9);
  // Second step with the same gradient: buf = 1.9*g.
  CHECK(p.value.data()[0] == doctest::Approx(1.0 - 0.1 * 0.5 * (1.0 + 1.9)).epsilon(1e-12));
  CHECK(p.value.data()[1] == doctest::Approx(2.0 + 0.1 * 1.0 * (1.0 + 1.9)).epsilon(1e-12));
}

TEST_CASE("sgd step requires at least one populated gradient") {
  Parameter<double> p;
  p.name = "w";
  p.value = Tensor<double>::from_data(Shape{1}, {1.0}, true);
  p.momentum = {0.0};
  std::vector<Parameter<double>*> params{&p};
  CHECK_THROWS(sgd_step(params, 0.1, 0.9));
}

TEST_CASE("parameters without gradients coast on momentum") {
  Parameter<double> a, b;
  a.name = "a";
  a.value = Tensor<double>::from_data(Shape{1}, {0.0}, true);
  a.momentum = {1.0};  // pre-charged buffer, no fresh gradient
  b.name = "b";
  b.value = Tensor<double>::from_data(Shape{1}, {0.0}, true);
  b.momentum = {0.0};
  b.value.grad() = {1.0};
  std::vector<Parameter<double>*> params{&a, &b};
  sgd_step(params, 0.1, 0.5);
  CHECK(a.value.data()[0] == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(b.value.data()[0] == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("learning rate schedule is a single step decay") {
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.lr_decay_factor = 0.1;
  cfg.lr_decay_epoch = 20;
  CHECK(lr_at(cfg, 0) == doctest::Approx(0.1));
  CHECK(lr_at(cfg, 19) == doctest::Approx(0.1));
  CHECK(lr_at(cfg, 20) == doctest::Approx(0.01));
  CHECK(lr_at(cfg, 100) == doctest::Approx(0.01));
}

TEST_CASE("truncated loss schedule waits out the warmup") {
  GceConfig gce;
  gce.warmup_epochs = 10;
  CHECK_FALSE(use_gce_at(gce, 0));
  CHECK_FALSE(use_gce_at(gce, 9));
  CHECK(use_gce_at(gce, 10));
  CHECK(use_gce_at(gce, 11));
}

TEST_CASE("label rank counts beats and earlier ties") {
  const double scores[4] = {0.0, 1.0, 0.0, -1.0};
  CHECK(detail::label_rank(scores, 4, 1) == 0);
  CHECK(detail::label_rank(scores, 4, 0) == 1);  // beaten by class 1 only
  CHECK(detail::label_rank(scores, 4, 2) == 2);  // also ties with earlier class 0
  CHECK(detail::label_rank(scores, 4, 3) == 3);
}

TEST_CASE("evaluation scores a constant-score model by the tie rule") {
  // Zeroed backbone makes every image produce the class-head bias as its
  // score vector.
  Model<float> m(ModelArch{.num_classes = 3}, 1);
  for (auto* p : m.parameters()) {
    for (auto& v : p->value.vec()) v = 0.0f;
  }
  m.param("heads.cls.bias").value.vec() = {0.0f, 1.0f, 0.0f};
  std::vector<Image> images;
  std::vector<int64_t> labels = {1, 1, 0, 2};
  for (size_t i = 0; i < labels.size(); ++i) {
    Image img(16, 16);
    for (auto& v : img.data) v = 0.25f;
    images.push_back(img);
  }
  auto [top1, top2] = evaluate_images(m, images, labels);
  // Predictions are always class 1: top1 hits the two label-1 samples. The
  // label-0 sample ranks second on the lower-index tie rule; label 2 ranks
  // third.
  CHECK(top1 == doctest::Approx(50.0));
  CHECK(top2 == doctest::Approx(75.0));
  CHECK(top2 >= top1);
}

TEST_CASE("evaluation applies resize then center crop") {
  auto [train, test] = generate_synthetic(2, 1, 2, 16, 5);
  Model<float> m(ModelArch{.num_classes = 2}, 1);
  PreprocessConfig pp;
  pp.resize = 18;
  pp.crop = 16;
  auto [top1, top2] = evaluate(m, test, pp);
  CHECK(top1 >= 0.0);
  CHECK(top1 <= 100.0);
  CHECK(top2 >= top1);
  Dataset empty;
  CHECK_THROWS(evaluate(m, empty, pp));
}

TEST_CASE("config validation rejects inconsistent setups") {
  TrainConfig cfg = tiny_config(TrainMode::baseline);
  validate(cfg);

  TrainConfig bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.lr = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.lambda = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.preprocess.crop = 15;  // not divisible by 4
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.preprocess.crop = 20;
  bad.preprocess.resize = 18;  // crop larger than resize
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = tiny_config(TrainMode::dcl);
  bad.rcm.k = 3;  // does not divide crop 16
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = tiny_config(TrainMode::dcl);
  bad.dcl_ablation.cls = false;
  bad.dcl_ablation.adv = false;
  bad.dcl_ablation.loc = false;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = tiny_config(TrainMode::pirl);
  bad.pirl.grid = 4;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = tiny_config(TrainMode::pirl);
  bad.pirl.patch_size = 12;  // exceeds the 8-pixel cell
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = tiny_config(TrainMode::db_gce);
  bad.db.train_only = false;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = tiny_config(TrainMode::db_gce);
  bad.gce.k = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("training rejects a truncation width wider than the class count") {
  auto [train_set, test_set] = generate_synthetic(2, 2, 1, 16, 6);
  TrainConfig cfg = tiny_config(TrainMode::db_gce);
  cfg.gce.k = 5;  // only 1 valid competitor exists for 2 classes
  CHECK_THROWS_AS(train<float>(cfg, train_set, test_set), ConfigError);
}

TEST_CASE("every mode trains one epoch and reports finite metrics") {
  auto [train_set, test_set] = generate_synthetic(2, 4, 2, 16, 11);
  for (TrainMode mode : {TrainMode::baseline, TrainMode::rotation, TrainMode::pirl,
                         TrainMode::dcl, TrainMode::db_gce}) {
    CAPTURE(to_string(mode));
    TrainConfig cfg = tiny_config(mode);
    TrainResult<float> r = train<float>(cfg, train_set, test_set);
    REQUIRE(r.history.size() == 1);
    const MetricsRow& row = r.history[0];
    CHECK(row.epoch == 0);
    CHECK(std::isfinite(row.train_total_loss));
    CHECK(std::isfinite(row.train_cls_loss));
    CHECK(std::isfinite(row.train_ssl_loss));
    CHECK(row.test_top1 >= 0.0);
    CHECK(row.test_top1 <= 100.0);
    CHECK(row.test_top2 >= row.test_top1);
    CHECK(row.lr == doctest::Approx(cfg.lr));
    if (mode == TrainMode::baseline) CHECK(row.train_ssl_loss == 0.0);
  }
}

TEST_CASE("training is deterministic per seed") {
  auto [train_set, test_set] = generate_synthetic(2, 4, 2, 16, 12);
  TrainConfig cfg = tiny_config(TrainMode::rotation);
  cfg.epochs = 2;
  TrainResult<float> a = train<float>(cfg, train_set, test_set);
  TrainResult<float> b = train<float>(cfg, train_set, test_set);
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_total_loss == b.history[i].train_total_loss);
    CHECK(a.history[i].test_top1 == b.history[i].test_top1);
  }
  CHECK(a.model.param("backbone.conv1.weight").value.vec() ==
        b.model.param("backbone.conv1.weight").value.vec());
  // A different seed moves the trajectory.
  cfg.seed = 4;
  TrainResult<float> c = train<float>(cfg, train_set, test_set);
  CHECK(a.history.back().train_total_loss != c.history.back().train_total_loss);
}

TEST_CASE("label fraction shrinks the supervised set") {
  auto [train_set, test_set] = generate_synthetic(2, 10, 1, 16, 13);
  TrainConfig cfg = tiny_config(TrainMode::baseline);
  cfg.label_fraction = 0.2;
  // 2 labeled samples per class; one half-size batch covers each epoch.
  TrainResult<float> r = train<float>(cfg, train_set, test_set);
  CHECK(r.history.size() == 1);
  cfg.label_fraction = 0.0;
  CHECK_THROWS_AS(train<float>(cfg, train_set, test_set), ConfigError);
}

TEST_CASE("metrics history roundtrips through csv") {
  std::vector<MetricsRow> rows;
  for (int64_t e = 0; e < 3; ++e) {
    MetricsRow r;
    r.epoch = e;
    r.train_total_loss = 1.5 - 0.25 * static_cast<double>(e);
    r.train_cls_loss = 1.0 / 3.0 + static_cast<double>(e);
    r.train_ssl_loss = 0.125;
    r.test_top1 = 50.0 + static_cast<double>(e);
    r.test_top2 = 60.0 + static_cast<double>(e);
    r.lr = e < 2 ? 0.01 : 0.001;
    rows.push_back(r);
  }
  const std::string csv = temp_path("fgssl_metrics.csv");
  const std::string json = temp_path("fgssl_summary.json");
  write_metrics(rows, csv, json, "mode = baseline\n");

  std::ifstream in(csv);
  std::string line;
  int64_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);  // header plus one row per epoch

  auto back = read_metrics_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].epoch == rows[i].epoch);
    CHECK(back[i].train_total_loss == rows[i].train_total_loss);
    CHECK(back[i].train_cls_loss == rows[i].train_cls_loss);
    CHECK(back[i].train_ssl_loss == rows[i].train_ssl_loss);
    CHECK(back[i].test_top1 == rows[i].test_top1);
    CHECK(back[i].test_top2 == rows[i].test_top2);
    CHECK(back[i].lr == rows[i].lr);
  }

  // The summary reports the best and final epochs.
  std::ifstream js(json);
  std::string text((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"best_top1\": 52.0") != std::string::npos);
  CHECK(text.find("\"final_epoch\": 2") != std::string::npos);
  std::remove(csv.c_str());
  std::remove(json.c_str());
}

TEST_CASE("metrics reader rejects malformed files") {
  const std::string csv = temp_path("fgssl_metrics_bad.csv");
  {
    std::ofstream out(csv);
    out << "epoch,train_total_loss\n0,1.0\n";
  }
  CHECK_THROWS_AS(read_metrics_csv(csv), IoError);
  {
    std::ofstream out(csv);
    out << "epoch,train_total_loss,train_cls_loss,train_ssl_loss,test_top1,test_top2,lr\n";
    out << "0,1.0,2.0,abc,4.0,5.0,0.1\n";
  }
  CHECK_THROWS_AS(read_metrics_csv(csv), IoError);
  std::remove(csv.c_str());
}
