// Microbenchmarks for the hot paths: conv forward/backward, the blocked
// matmul, region shuffling, and one optimizer step per training mode on a
// tiny dataset. Shapes mirror the default 32px preset.

#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "fgssl/dataset.hpp"
#include "fgssl/model.hpp"
#include "fgssl/ops.hpp"
#include "fgssl/rng.hpp"
#include "fgssl/tensor.hpp"
#include "fgssl/trainer.hpp"
#include "fgssl/transforms.hpp"

namespace {

using namespace fgssl;

Tensor<float> random_tensor(Shape shape, uint64_t seed) {
  Rng rng(seed);
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  std::vector<float> data(static_cast<size_t>(n));
  for (float& v : data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return Tensor<float>::from_data(std::move(shape), std::move(data));
}

void bm_conv2d_forward(benchmark::State& state) {
  const auto x = random_tensor(Shape{8, 16, 16, 16}, 1);
  const auto w = random_tensor(Shape{32, 16, 3, 3}, 2);
  const auto b = random_tensor(Shape{32}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::conv2d(x, w, b, 1, 1));
  }
}
BENCHMARK(bm_conv2d_forward);

void bm_conv2d_backward(benchmark::State& state) {
  for (auto _ : state) {
    GradGraph<float> graph;
    TapeScope<float> scope(graph);
    auto x = random_tensor(Shape{8, 16, 16, 16}, 1);
    x.set_requires_grad(true);
    auto w = random_tensor(Shape{32, 16, 3, 3}, 2);
    w.set_requires_grad(true);
    auto y = ops::conv2d(x, w, Tensor<float>(), 1, 1);
    graph.backward(ops::sum(y));
    benchmark::DoNotOptimize(w.grad());
  }
}
BENCHMARK(bm_conv2d_backward);

void bm_matmul(benchmark::State& state) {
  const auto a = random_tensor(Shape{64, 256}, 4);
  const auto b = random_tensor(Shape{256, 64}, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::matmul(a, b));
  }
}
BENCHMARK(bm_matmul);

void bm_region_shuffle(benchmark::State& state) {
  auto [train, test] = generate_synthetic(2, 1, 1, 32, 7);
  const Image& img = train.samples[0].image;
  Rng rng(11);
  for (auto _ : state) {
    const auto perm = region_permutation(4, 2, rng);
    benchmark::DoNotOptimize(apply_region_shuffle(img, perm));
  }
}
BENCHMARK(bm_region_shuffle);

void bm_train_epoch(benchmark::State& state, TrainMode mode) {
  auto [train, test] = generate_synthetic(6, 4, 2, 32, 7);
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.pirl.negatives = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fgssl::train<float>(cfg, train, test));
  }
}
BENCHMARK_CAPTURE(bm_train_epoch, baseline, TrainMode::baseline);
BENCHMARK_CAPTURE(bm_train_epoch, rotation, TrainMode::rotation);
BENCHMARK_CAPTURE(bm_train_epoch, pirl, TrainMode::pirl);
BENCHMARK_CAPTURE(bm_train_epoch, dcl, TrainMode::dcl);
BENCHMARK_CAPTURE(bm_train_epoch, db_gce, TrainMode::db_gce);

void bm_eval(benchmark::State& state) {
  auto [train, test] = generate_synthetic(4, 1, 8, 32, 7);
  Model<float> model(ModelArch{4, TrainMode::baseline, 4, LocMode::mse, 9, 32}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(model, test));
  }
}
BENCHMARK(bm_eval);

}  // namespace

BENCHMARK_MAIN();
