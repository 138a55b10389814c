#include <benchmark/benchmark.h>

#include "m2m/generation.hpp"
#include "m2m/rebalance.hpp"
#include "m2m/trainer.hpp"

namespace {

using namespace m2m;

struct Fixture {
  LabeledDataset train;
  DenseNet g;
  DenseNet f;

  Fixture() {
    LabeledDataset balanced = gaussian_mixture(10, 200, 16, 3.0, 5);
    train = make_long_tail(balanced, 50.0, 6);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 128;
    tc.schedule.base = 0.1;
    tc.hidden = {64, 64};
    g = train_erm(train, tc, 7).net;
    f = train_erm(train, tc, 8).net;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_Translate(benchmark::State& state) {
  auto& fx = fixture();
  M2mConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  cfg.step_size = 0.4;
  Rng rng(9);
  const auto x0 = fx.train.row(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(translate({{&fx.g}}, fx.f, x0, 0, 9, cfg, rng));
  }
}
BENCHMARK(BM_Translate)->Arg(5)->Arg(10)->Arg(20);

void BM_GenerateForBatch(benchmark::State& state) {
  auto& fx = fixture();
  M2mConfig cfg;
  cfg.beta = 0.99;
  cfg.gamma = 0.99;
  cfg.step_size = 0.4;
  const Generator generator(&fx.f, {&fx.g}, &fx.train, cfg, 10);
  Rng rng(11);
  int step = 0;
  for (auto _ : state) {
    Batch batch = class_balanced_batch(fx.train, 64, rng);
    generator.generate_for_batch(batch, 0, step++, nullptr);
    benchmark::DoNotOptimize(batch);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_GenerateForBatch);

void BM_SeedClassDistribution(benchmark::State& state) {
  const std::vector<int> counts = {5000, 2997, 1797, 1077, 646, 387, 232, 139, 83, 50};
  for (auto _ : state) {
    benchmark::DoNotOptimize(seed_class_distribution(counts, 9, 0.999));
  }
}
BENCHMARK(BM_SeedClassDistribution);

void BM_ClassBalancedBatch(benchmark::State& state) {
  auto& fx = fixture();
  Rng rng(13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(class_balanced_batch(fx.train, 128, rng));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_ClassBalancedBatch);

void BM_SmoteSample(benchmark::State& state) {
  auto& fx = fixture();
  Rng rng(15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smote_sample(fx.train, 0, 5, rng));
  }
}
BENCHMARK(BM_SmoteSample);

}  // namespace

BENCHMARK_MAIN();
