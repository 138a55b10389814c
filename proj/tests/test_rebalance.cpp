#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "m2m/rebalance.hpp"

using namespace m2m;

namespace {

LabeledDataset tiny_dataset(const std::vector<int>& counts_per_label) {
  std::size_t n = 0;
  for (int c : counts_per_label) n += static_cast<std::size_t>(c);
  Matrix inputs(n, 2);
  std::vector<int> labels;
  labels.reserve(n);
  std::size_t row = 0;
  for (std::size_t label = 0; label < counts_per_label.size(); ++label) {
    for (int i = 0; i < counts_per_label[label]; ++i, ++row) {
      inputs(row, 0) = static_cast<double>(label);
      inputs(row, 1) = static_cast<double>(i);
      labels.push_back(static_cast<int>(label));
    }
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

}  // namespace

TEST_CASE("class_balanced_batch: per-class frequency concentrates at m/K") {
  LabeledDataset data = tiny_dataset({60, 30});
  Rng rng(404);
  Batch batch = class_balanced_batch(data, 10000, rng);
  long count0 = 0;
  for (int y : batch.y) count0 += y == 0 ? 1 : 0;
  // binomial(10000, 1/2): 3 sigma = 150
  CHECK(std::abs(count0 - 5000) < 150);
}

TEST_CASE("class_balanced_batch: a single class fills the whole batch") {
  LabeledDataset data = tiny_dataset({7});
  Rng rng(1);
  Batch batch = class_balanced_batch(data, 32, rng);
  for (int y : batch.y) CHECK(y == 0);
}

TEST_CASE("class_balanced_batch: a singleton class repeats without error") {
  LabeledDataset data = tiny_dataset({5, 1});
  Rng rng(2);
  Batch batch = class_balanced_batch(data, 64, rng);
  long singleton_draws = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (batch.y[i] == 1) {
      ++singleton_draws;
      CHECK(batch.x(i, 1) == 0.0);  // the only sample of that class
    }
  CHECK(singleton_draws > 0);
}

TEST_CASE("rw_weights: balanced counts give uniform weights") {
  const std::vector<int> counts = {40, 40, 40};
  for (double w : rw_weights(counts)) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rw_weights: inverse-frequency, normalized to mean one") {
  const std::vector<int> counts = {100, 1};
  const auto w = rw_weights(counts);
  CHECK(w[0] == doctest::Approx(0.01 / 0.505).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(1.0 / 0.505).epsilon(1e-12));
  const std::vector<int> big = {5000, 50};
  const auto wb = rw_weights(big);
  CHECK(wb[1] / wb[0] == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("cbrw_weights: beta zero degenerates to uniform") {
  const std::vector<int> counts = {5000, 50, 3};
  for (double w : cbrw_weights(counts, 0.0)) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cbrw_weights: count one has effective number one for any beta") {
  const std::vector<int> counts = {1, 1};
  for (double beta : {0.1, 0.9, 0.9999})
    for (double w : cbrw_weights(counts, beta)) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cbrw_weights: matches hand-computed effective numbers at beta 0.9999") {
  const std::vector<int> counts = {5000, 50};
  const double beta = 0.9999;
  // independent arithmetic route: beta^N = exp(N * log1p(-(1-beta)))
  const double eff0 = -std::expm1(5000.0 * std::log1p(-(1.0 - beta))) / (1.0 - beta);
  const double eff1 = -std::expm1(50.0 * std::log1p(-(1.0 - beta))) / (1.0 - beta);
  CHECK(eff0 == doctest::Approx(3934.8).epsilon(1e-3));
  CHECK(eff1 == doctest::Approx(49.88).epsilon(1e-3));
  const double mean = 0.5 * (1.0 / eff0 + 1.0 / eff1);
  const auto w = cbrw_weights(counts, beta);
  CHECK(w[0] == doctest::Approx((1.0 / eff0) / mean).epsilon(1e-9));
  CHECK(w[1] == doctest::Approx((1.0 / eff1) / mean).epsilon(1e-9));
}

TEST_CASE("cbrw_weights converge to rw_weights as beta approaches one") {
  const std::vector<int> counts = {10000, 500, 37, 4};
  const auto rw = rw_weights(counts);
  const auto cb = cbrw_weights(counts, 1.0 - 1e-9);
  for (std::size_t k = 0; k < counts.size(); ++k)
    CHECK(std::abs(cb[k] - rw[k]) / rw[k] < 1e-3);
}

TEST_CASE("weights are positive with mean exactly one") {
  const std::vector<int> counts = {812, 77, 13, 2, 1};
  for (const auto& w : {rw_weights(counts), cbrw_weights(counts, 0.999)}) {
    double sum = 0.0;
    for (double v : w) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum / static_cast<double>(w.size()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("smote_sample: identical endpoints give back the same point") {
  Matrix inputs = Matrix::from_rows({{1.0, 2.0}, {1.0, 2.0}, {9.0, 9.0}});
  LabeledDataset data = LabeledDataset::from_samples(std::move(inputs), {0, 0, 1});
  Rng rng(5);
  const auto x = smote_sample(data, 0, 5, rng);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 2.0);
}

TEST_CASE("smote_sample: interpolation stays on the segment") {
  Matrix inputs = Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}});
  LabeledDataset data = LabeledDataset::from_samples(std::move(inputs), {0, 0});
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto x = smote_sample(data, 0, 5, rng);
    CHECK(x[0] == doctest::Approx(x[1]).epsilon(1e-15));  // on the diagonal
    CHECK(x[0] >= 0.0);
    CHECK(x[0] <= 1.0);
  }
}

TEST_CASE("smote_sample: singleton class falls back to duplication and flags it") {
  Matrix inputs = Matrix::from_rows({{3.0, 4.0}, {0.0, 0.0}, {0.0, 1.0}});
  LabeledDataset data = LabeledDataset::from_samples(std::move(inputs), {1, 0, 0});
  Rng rng(7);
  bool duplicated = false;
  const auto x = smote_sample(data, 1, 5, rng, &duplicated);
  CHECK(duplicated);
  CHECK(x[0] == 3.0);
  CHECK(x[1] == 4.0);
}

TEST_CASE("smote synthetics never leave the class bounding box") {
  Rng data_rng(8);
  Matrix inputs(40, 3);
  std::vector<int> labels(40, 0);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 3; ++j) inputs(i, j) = data_rng.uniform(-5.0, 5.0);
  std::vector<double> lo(3, 1e9), hi(3, -1e9);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      lo[j] = std::min(lo[j], inputs(i, j));
      hi[j] = std::max(hi[j], inputs(i, j));
    }
  LabeledDataset data = LabeledDataset::from_samples(std::move(inputs), std::move(labels));
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto x = smote_sample(data, 0, 5, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(x[j] >= lo[j] - 1e-12);
      CHECK(x[j] <= hi[j] + 1e-12);
    }
  }
}

TEST_CASE("smote_balance: every class reaches the head count") {
  LabeledDataset data = tiny_dataset({50, 20, 5});
  LabeledDataset balanced = smote_balance(data, 5, 77);
  for (int c : balanced.class_counts()) CHECK(c == 50);
  CHECK(balanced.size() == 150);
}

TEST_CASE("apply_strategy: deferred re-sampling switches over at the defer epoch") {
  StrategySpec drs;
  drs.kind = StrategyKind::rs;
  drs.deferred = true;
  drs.defer_epoch = 160;
  const std::vector<int> counts = {500, 50};
  EpochPlan before = apply_strategy(drs, 159, counts);
  CHECK_FALSE(before.class_balanced);
  CHECK(before.class_weights.empty());
  EpochPlan at = apply_strategy(drs, 160, counts);
  CHECK(at.class_balanced);
  CHECK_FALSE(at.generation_active);
}

TEST_CASE("apply_strategy: non-deferred re-weighting applies from epoch zero") {
  StrategySpec rw;
  rw.kind = StrategyKind::rw;
  const std::vector<int> counts = {100, 10};
  EpochPlan plan = apply_strategy(rw, 0, counts);
  REQUIRE(plan.class_weights.size() == 2);
  CHECK(plan.class_weights[1] / plan.class_weights[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("apply_strategy: m2m is class-balanced with generation once active") {
  StrategySpec spec;
  spec.kind = StrategyKind::m2m;
  spec.deferred = true;
  spec.defer_epoch = 10;
  const std::vector<int> counts = {100, 10};
  CHECK_FALSE(apply_strategy(spec, 9, counts).generation_active);
  EpochPlan active = apply_strategy(spec, 10, counts);
  CHECK(active.class_balanced);
  CHECK(active.generation_active);
}

TEST_CASE("strategy validation rejects bad deferred settings") {
  StrategySpec erm;
  erm.kind = StrategyKind::erm;
  erm.deferred = true;
  erm.defer_epoch = 5;
  CHECK_THROWS_AS(erm.validate(10), ConfigError);

  StrategySpec late;
  late.kind = StrategyKind::rs;
  late.deferred = true;
  late.defer_epoch = 10;
  CHECK_THROWS_AS(late.validate(10), ConfigError);
}
