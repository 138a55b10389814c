#include <benchmark/benchmark.h>

#include "m2m/net.hpp"
#include "m2m/optimizer.hpp"

namespace {

using namespace m2m;

DenseNet make_net(int dim, int width, int classes) {
  Rng rng(7);
  const std::vector<int> hidden = {width, width};
  return DenseNet::make_mlp(static_cast<std::size_t>(dim), hidden,
                            static_cast<std::size_t>(classes), rng);
}

Matrix make_batch(int rows, int dim) {
  Rng rng(11);
  Matrix batch(static_cast<std::size_t>(rows), static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < batch.size(); ++i) batch.data()[i] = rng.uniform(-1.0, 1.0);
  return batch;
}

void BM_Forward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const DenseNet net = make_net(16, width, 10);
  const Matrix batch = make_batch(128, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(batch));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Arg(128);

void BM_TrainStep(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  DenseNet net = make_net(16, width, 10);
  const Matrix batch = make_batch(128, 16);
  std::vector<int> labels(128);
  Rng rng(13);
  for (auto& y : labels) y = static_cast<int>(rng.index(10));
  SgdMomentum opt(0.9, 5e-5);
  opt.set_learning_rate(0.01);
  for (auto _ : state) {
    const ForwardCache cache = net.forward_cache(batch);
    const CeResult ce = cross_entropy(cache.logits(), labels);
    opt.step(net, net.backward_params(cache, ce.dlogits));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(64)->Arg(128);

void BM_InputGradient(benchmark::State& state) {
  const DenseNet net = make_net(16, 64, 10);
  Rng rng(17);
  std::vector<double> x(16);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(input_gradient(net, x, CeToward{3}));
  }
}
BENCHMARK(BM_InputGradient);

}  // namespace

BENCHMARK_MAIN();
