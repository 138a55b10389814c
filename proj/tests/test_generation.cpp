#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "m2m/generation.hpp"
#include "m2m/trainer.hpp"
#include "support/simplex_grid.hpp"

using namespace m2m;

namespace {

DenseNet random_linear_net(std::size_t in, std::size_t out, std::uint64_t seed) {
  Rng rng(seed);
  return DenseNet::make_mlp(in, std::span<const int>{}, out, rng);
}

double l2(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

LabeledDataset counted_dataset(const std::vector<int>& counts, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t n = 0;
  for (int c : counts) n += static_cast<std::size_t>(c);
  Matrix inputs(n, static_cast<std::size_t>(dim));
  std::vector<int> labels;
  labels.reserve(n);
  std::size_t row = 0;
  for (std::size_t cls = 0; cls < counts.size(); ++cls)
    for (int i = 0; i < counts[cls]; ++i, ++row) {
      for (int j = 0; j < dim; ++j)
        inputs(row, static_cast<std::size_t>(j)) = rng.normal() + 3.0 * static_cast<double>(cls);
      labels.push_back(static_cast<int>(cls));
    }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

}  // namespace

TEST_CASE("reject_probability: non-positive gap always rejects") {
  CHECK(reject_probability(10, 10, 0.999) == 1.0);
  CHECK(reject_probability(5, 50, 0.9) == 1.0);
}

TEST_CASE("reject_probability: the published thresholds give ~1% rejection") {
  // accept > 99% exactly when the gap exceeds the threshold
  CHECK(reject_probability(4602, 0, 0.999) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(1.0 - reject_probability(4603, 0, 0.999) > 0.99);
  CHECK(1.0 - reject_probability(4602, 0, 0.999) < 0.99);
  CHECK(reject_probability(46049, 0, 0.9999) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(1.0 - reject_probability(46050, 0, 0.9999) > 0.99);
}

TEST_CASE("reject_probability: empirical Bernoulli frequency matches the formula") {
  const double p = reject_probability(10, 0, 0.9);  // 0.9^10
  CHECK(p == doctest::Approx(std::pow(0.9, 10.0)).epsilon(1e-12));
  Rng rng(31337);
  const int draws = 20000;
  long rejected = 0;
  for (int i = 0; i < draws; ++i) rejected += rng.bernoulli(p) ? 1 : 0;
  const double freq = static_cast<double>(rejected) / draws;
  const double sigma = std::sqrt(p * (1.0 - p) / draws);
  CHECK(std::abs(freq - p) < 3.0 * sigma);
}

TEST_CASE("seed_class_distribution: single larger class takes all the mass") {
  const std::vector<int> counts = {100, 10};
  const auto q = seed_class_distribution(counts, 1, 0.99);
  REQUIRE(q.has_value());
  CHECK((*q)[0] == 1.0);
  CHECK((*q)[1] == 0.0);
}

TEST_CASE("seed_class_distribution: the head class has no seed distribution") {
  const std::vector<int> counts = {100, 10};
  CHECK_FALSE(seed_class_distribution(counts, 0, 0.99).has_value());
}

TEST_CASE("seed_class_distribution: three-class hand evaluation") {
  const std::vector<int> counts = {1000, 500, 100};
  const auto q = seed_class_distribution(counts, 2, 0.999);
  REQUIRE(q.has_value());
  const double u0 = 1.0 - std::pow(0.999, 900.0);
  const double u1 = 1.0 - std::pow(0.999, 400.0);
  CHECK(u0 == doctest::Approx(0.5934).epsilon(1e-3));
  CHECK(u1 == doctest::Approx(0.3297).epsilon(1e-3));
  CHECK((*q)[0] == doctest::Approx(u0 / (u0 + u1)).epsilon(1e-12));
  CHECK((*q)[0] == doctest::Approx(0.6428).epsilon(1e-3));
  CHECK((*q)[1] == doctest::Approx(0.3572).epsilon(1e-3));
  CHECK((*q)[2] == 0.0);
}

TEST_CASE("seed distribution maximizes acceptance log-probability plus entropy") {
  Rng rng(2024);
  const int grid_by_k[7] = {0, 0, 1200, 300, 170, 100, 60};
  for (int trial = 0; trial < 6; ++trial) {
    const int k_classes = 2 + static_cast<int>(rng.index(5));  // up to 6
    std::vector<int> counts(static_cast<std::size_t>(k_classes));
    for (auto& c : counts) c = 20 + static_cast<int>(rng.index(1980));
    std::sort(counts.rbegin(), counts.rend());
    counts.back() = std::min(counts.back(), counts[counts.size() - 2] - 10);
    if (counts.back() < 1) counts.back() = 1;
    const double beta = trial % 2 == 0 ? 0.9 : 0.99;
    const int target = k_classes - 1;

    const auto q = seed_class_distribution(counts, target, beta);
    REQUIRE(q.has_value());
    std::vector<double> p_accept(counts.size());
    for (std::size_t k0 = 0; k0 < counts.size(); ++k0) {
      const long gap = counts[k0] - counts[static_cast<std::size_t>(target)];
      p_accept[k0] = gap > 0 ? 1.0 - std::pow(beta, static_cast<double>(gap)) : 0.0;
    }
    const double analytic = m2m_test::seed_objective(*q, p_accept);
    const double grid = m2m_test::grid_max_seed_objective(
        p_accept, grid_by_k[static_cast<std::size_t>(k_classes)]);
    CHECK(analytic >= grid - 1e-9);  // no grid point beats the analytic optimum
    CHECK(grid >= analytic - 1e-3);  // and the grid comes within the stated gap
  }
}

TEST_CASE("seed-class sampling frequencies match the distribution") {
  const std::vector<int> counts = {1000, 500, 100};
  const auto q = seed_class_distribution(counts, 2, 0.999);
  REQUIRE(q.has_value());
  Rng rng(777);
  const int draws = 100000;
  std::vector<long> hits(3, 0);
  for (int i = 0; i < draws; ++i) ++hits[static_cast<std::size_t>(rng.categorical(*q))];
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = (*q)[k];
    const double sigma = std::sqrt(std::max(p * (1.0 - p) / draws, 1e-12));
    CHECK(std::abs(static_cast<double>(hits[k]) / draws - p) < 4.0 * sigma + 1e-9);
  }
}

TEST_CASE("translate: displacement never exceeds T * eta") {
  DenseNet g = random_linear_net(6, 3, 1);
  DenseNet f = random_linear_net(6, 3, 2);
  M2mConfig cfg;
  cfg.steps = 10;
  cfg.step_size = 0.1;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x0(6);
    for (auto& v : x0) v = rng.uniform(-2.0, 2.0);
    const TranslateResult res = translate({{&g}}, f, x0, 0, 2, cfg, rng);
    CHECK(res.displacement <= cfg.steps * cfg.step_size + 1e-12);
    CHECK(l2(res.x, res.start) == doctest::Approx(res.displacement).epsilon(1e-12));
  }
}

TEST_CASE("translate: vanishing step size leaves the seed in place") {
  DenseNet g = random_linear_net(4, 2, 4);
  DenseNet f = random_linear_net(4, 2, 5);
  M2mConfig cfg;
  cfg.steps = 1;
  cfg.step_size = 1e-12;
  cfg.noise_scale = 0.0;
  Rng rng(6);
  const std::vector<double> x0 = {0.3, -0.7, 1.1, 0.0};
  const TranslateResult res = translate({{&g}}, f, x0, 0, 1, cfg, rng);
  CHECK(l2(res.x, x0) <= 2e-12);
  CHECK(res.final_loss == doctest::Approx(ce_value(g, x0, 1)).epsilon(1e-9));
}

TEST_CASE("translate: one step on a linear generator strictly lowers the loss") {
  DenseNet g = random_linear_net(5, 4, 7);
  DenseNet f = random_linear_net(5, 4, 8);
  M2mConfig cfg;
  cfg.lambda = 0.0;
  cfg.steps = 1;
  cfg.step_size = 0.05;
  cfg.noise_scale = 0.0;
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x0(5);
    for (auto& v : x0) v = rng.uniform(-2.0, 2.0);
    const double before = ce_value(g, x0, 3);
    const TranslateResult res = translate({{&g}}, f, x0, 0, 3, cfg, rng);
    CHECK(res.final_loss < before);
  }
}

TEST_CASE("translate: loss is non-increasing across steps on the convex surrogate") {
  DenseNet g = random_linear_net(6, 3, 10);
  DenseNet f = random_linear_net(6, 3, 11);
  M2mConfig base;
  base.lambda = 0.0;
  base.step_size = 0.1;
  base.noise_scale = 0.0;
  Rng rng(12);
  for (int i = 0; i < 8; ++i) {
    std::vector<double> x0(6);
    for (auto& v : x0) v = rng.uniform(-1.5, 1.5);
    double prev = ce_value(g, x0, 2);
    // run translate step by step so each partial trajectory is observable
    std::vector<double> x = x0;
    for (int t = 1; t <= 10; ++t) {
      M2mConfig cfg = base;
      cfg.steps = 1;
      Rng step_rng(0);
      const TranslateResult res = translate({{&g}}, f, x, 0, 2, cfg, step_rng);
      CHECK(res.final_loss <= prev + 1e-8);
      prev = res.final_loss;
      x = res.x;
    }
  }
}

TEST_CASE("translate: an all-zero generator yields only stationary steps") {
  DenseLayer layer;
  layer.weights = Matrix(3, 4);
  layer.bias.assign(3, 0.0);
  DenseNet g({layer});
  DenseNet f = random_linear_net(4, 3, 13);
  M2mConfig cfg;
  cfg.lambda = 0.0;
  cfg.steps = 5;
  Rng rng(14);
  const std::vector<double> x0 = {1.0, 2.0, 3.0, 4.0};
  const TranslateResult res = translate({{&g}}, f, x0, 0, 1, cfg, rng);
  CHECK(res.stationary_steps == 5);
  CHECK(res.displacement == 0.0);
}

TEST_CASE("translate: seed class equal to target class is rejected") {
  DenseNet g = random_linear_net(3, 2, 15);
  M2mConfig cfg;
  Rng rng(16);
  const std::vector<double> x0 = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(translate({{&g}}, g, x0, 1, 1, cfg, rng), DomainError);
}

TEST_CASE("translate: a duplicated ensemble behaves exactly like a single net") {
  DenseNet g = random_linear_net(5, 3, 17);
  DenseNet f = random_linear_net(5, 3, 18);
  M2mConfig cfg;
  const std::vector<double> x0 = {0.1, 0.2, 0.3, 0.4, 0.5};
  Rng rng_a(19), rng_b(19);
  const TranslateResult solo = translate({{&g}}, f, x0, 0, 2, cfg, rng_a);
  const DenseNet* pair[2] = {&g, &g};
  const TranslateResult duo = translate(pair, f, x0, 0, 2, cfg, rng_b);
  CHECK(l2(solo.x, duo.x) < 1e-12);
  CHECK(solo.final_loss == doctest::Approx(duo.final_loss).epsilon(1e-12));
}

TEST_CASE("translate: the lambda regularizer pushes the seed-class logit down") {
  DenseNet g = random_linear_net(6, 4, 20);
  DenseNet f = random_linear_net(6, 4, 21);
  M2mConfig plain;
  plain.lambda = 0.0;
  plain.noise_scale = 0.0;
  M2mConfig regularized = plain;
  regularized.lambda = 5.0;
  const std::vector<double> x0 = {0.5, -0.5, 1.0, 0.0, 0.3, -1.0};
  Rng rng_a(22), rng_b(22);
  const TranslateResult without = translate({{&g}}, f, x0, 1, 3, plain, rng_a);
  const TranslateResult with = translate({{&g}}, f, x0, 1, 3, regularized, rng_b);
  const double logit_without = input_gradient(f, without.x, LogitOf{1}).value;
  const double logit_with = input_gradient(f, with.x, LogitOf{1}).value;
  CHECK(logit_with < logit_without);
}

TEST_CASE("M2mConfig validation rejects out-of-range fields") {
  M2mConfig cfg;
  cfg.beta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.disable_gamma = true;
  CHECK_NOTHROW(cfg.validate());  // gamma unused when disabled
}

TEST_CASE("generate_for_batch: head-class slots are never touched") {
  LabeledDataset data = counted_dataset({40, 8}, 3, 50);
  DenseNet f = random_linear_net(3, 2, 51);
  DenseNet g = random_linear_net(3, 2, 52);
  M2mConfig cfg;
  Generator generator(&f, {&g}, &data, cfg, 53);

  Batch batch;
  batch.x = Matrix(6, 3, 1.0);
  batch.y.assign(6, 0);  // every slot holds the head class
  batch.source_index.assign(6, 0);
  const Batch before = batch;
  GenerationLog log;
  generator.generate_for_batch(batch, 0, 0, &log);
  CHECK(log.records().empty());
  CHECK(batch.x == before.x);
  CHECK(batch.y == before.y);
}

TEST_CASE("generate_for_batch: balanced counts degenerate to plain re-sampling") {
  LabeledDataset data = counted_dataset({20, 20, 20}, 3, 54);
  DenseNet f = random_linear_net(3, 3, 55);
  DenseNet g = random_linear_net(3, 3, 56);
  Generator generator(&f, {&g}, &data, M2mConfig{}, 57);
  Rng rng(58);
  Batch batch = class_balanced_batch(data, 30, rng);
  const Batch before = batch;
  GenerationLog log;
  generator.generate_for_batch(batch, 2, 7, &log);
  CHECK(log.records().empty());
  CHECK(batch.x == before.x);
}

TEST_CASE("generate_for_batch: tail generation probability matches 1 - N_y/N_1") {
  LabeledDataset data = counted_dataset({500, 5}, 4, 59);
  DenseNet f = random_linear_net(4, 2, 60);
  DenseNet g = random_linear_net(4, 2, 61);
  M2mConfig cfg;
  Generator generator(&f, {&g}, &data, cfg, 62);

  // 2000 tail slots across many steps; attempts should concentrate at 0.99
  const int slots = 125, steps = 16;
  long attempts = 0;
  for (int step = 0; step < steps; ++step) {
    Batch batch;
    batch.x = Matrix(slots, 4);
    batch.y.assign(slots, 1);
    batch.source_index.assign(slots, -1);
    // seed candidates must exist in the batch: make slot 0 a head sample
    batch.y[0] = 0;
    batch.x.set_row(0, data.row(0));
    GenerationLog log;
    generator.generate_for_batch(batch, 0, step, &log);
    attempts += static_cast<long>(log.records().size());
  }
  const double total = static_cast<double>(slots - 1) * steps;
  const double freq = static_cast<double>(attempts) / total;
  const double sigma = std::sqrt(0.99 * 0.01 / total);
  CHECK(std::abs(freq - 0.99) < 4.0 * sigma);
}

TEST_CASE("generate_for_batch: accepted slots obey the loss threshold, rejected ones hold real rows") {
  LabeledDataset data = counted_dataset({60, 12}, 3, 63);
  TrainConfig tc;
  tc.epochs = 12;
  tc.batch_size = 32;
  tc.hidden = {16};
  tc.schedule.base = 0.05;
  const DenseNet g = train_erm(data, tc, 900).net;
  const DenseNet f = train_erm(data, tc, 901).net;
  M2mConfig cfg;
  cfg.beta = 0.9;  // large acceptance probability at gap 48
  Generator generator(&f, {&g}, &data, cfg, 64);

  Rng rng(65);
  long accepted = 0;
  for (int step = 0; step < 30; ++step) {
    Batch batch = class_balanced_batch(data, 16, rng);
    const Batch original = batch;
    GenerationLog log;
    generator.generate_for_batch(batch, 0, step, &log);
    std::size_t record_i = 0;
    for (const auto& record : log.records()) {
      (void)record_i;
      const std::size_t slot = static_cast<std::size_t>(record.slot);
      if (record.status == GenStatus::accepted) {
        ++accepted;
        CHECK(record.final_loss <= cfg.gamma + 1e-12);
        // g's confidence toward the target is at least e^-gamma
        const double ce = ce_value(g, batch.x.row(slot), record.target_class);
        CHECK(std::exp(-ce) >= std::exp(-cfg.gamma) - 1e-9);
        CHECK(record.displacement <= cfg.steps * cfg.step_size + 1e-12);
      } else if (record.status != GenStatus::replaced_real) {
        // the slot must now hold a real sample of the target class
        bool found = false;
        for (int idx : data.indices_of_class(record.target_class)) {
          if (l2(batch.x.row(slot), data.row(static_cast<std::size_t>(idx))) == 0.0) {
            found = true;
            break;
          }
        }
        CHECK(found);
        CHECK(batch.y[slot] == record.target_class);
      }
    }
  }
  CHECK(accepted > 0);
}

TEST_CASE("generate_for_batch: gamma zero forces every attempt to reject") {
  LabeledDataset data = counted_dataset({50, 10}, 3, 66);
  DenseNet f = random_linear_net(3, 2, 67);
  DenseNet g = random_linear_net(3, 2, 68);
  M2mConfig cfg;
  cfg.gamma = 1e-9;
  Generator generator(&f, {&g}, &data, cfg, 69);
  Rng rng(70);
  Batch batch = class_balanced_batch(data, 40, rng);
  GenerationLog log;
  generator.generate_for_batch(batch, 0, 0, &log);
  CHECK(log.records().size() > 0);
  CHECK(log.count(GenStatus::accepted) == 0);
  CHECK(log.count(GenStatus::rejected_gamma) > 0);
}

TEST_CASE("generate_for_batch: disable flags suppress their rejection kind") {
  LabeledDataset data = counted_dataset({50, 10}, 3, 71);
  DenseNet f = random_linear_net(3, 2, 72);
  DenseNet g = random_linear_net(3, 2, 73);
  M2mConfig cfg;
  cfg.gamma = 1e-9;          // would reject everything...
  cfg.disable_gamma = true;  // ...but the threshold is disabled
  cfg.disable_reject = true;
  Generator generator(&f, {&g}, &data, cfg, 74);
  Rng rng(75);
  Batch batch = class_balanced_batch(data, 40, rng);
  GenerationLog log;
  generator.generate_for_batch(batch, 0, 0, &log);
  CHECK(log.records().size() > 0);
  CHECK(log.count(GenStatus::rejected_gamma) == 0);
  CHECK(log.count(GenStatus::rejected_bernoulli) == 0);
  CHECK(log.count(GenStatus::accepted) == log.records().size());
}

TEST_CASE("generate_for_batch: clean_seed over-samples the untouched seed row") {
  LabeledDataset data = counted_dataset({50, 10}, 3, 76);
  DenseNet f = random_linear_net(3, 2, 77);
  DenseNet g = random_linear_net(3, 2, 78);
  M2mConfig cfg;
  cfg.clean_seed = true;
  cfg.disable_gamma = true;
  cfg.disable_reject = true;
  Generator generator(&f, {&g}, &data, cfg, 79);
  Rng rng(80);
  Batch batch = class_balanced_batch(data, 40, rng);
  const Batch original = batch;
  GenerationLog log;
  generator.generate_for_batch(batch, 0, 0, &log);
  REQUIRE(log.records().size() > 0);
  for (const auto& record : log.records()) {
    const auto slot = static_cast<std::size_t>(record.slot);
    // the slot content must be one of the original batch rows of the seed class
    bool found = false;
    for (std::size_t j = 0; j < original.size(); ++j)
      if (original.y[j] == record.seed_class &&
          l2(batch.x.row(slot), original.x.row(j)) == 0.0)
        found = true;
    CHECK(found);
    CHECK(batch.y[slot] == record.target_class);
  }
}

TEST_CASE("generate_for_batch: random_target_label excludes seed and target classes") {
  LabeledDataset data = counted_dataset({60, 30, 6}, 3, 81);
  DenseNet f = random_linear_net(3, 3, 82);
  DenseNet g = random_linear_net(3, 3, 83);
  M2mConfig cfg;
  cfg.random_target_label = true;
  cfg.disable_gamma = true;
  cfg.disable_reject = true;
  Generator generator(&f, {&g}, &data, cfg, 84);
  Rng rng(85);
  for (int step = 0; step < 10; ++step) {
    Batch batch = class_balanced_batch(data, 30, rng);
    GenerationLog log;
    generator.generate_for_batch(batch, 0, step, &log);
    for (const auto& record : log.records()) {
      if (record.status != GenStatus::accepted) continue;
      const int label = batch.y[static_cast<std::size_t>(record.slot)];
      CHECK(label != record.seed_class);
      CHECK(label != record.target_class);
      CHECK(label >= 0);
      CHECK(label < 3);
    }
  }
}

TEST_CASE("generate_for_batch: two classes cannot use random_target_label") {
  LabeledDataset data = counted_dataset({20, 4}, 2, 86);
  DenseNet f = random_linear_net(2, 2, 87);
  DenseNet g = random_linear_net(2, 2, 88);
  M2mConfig cfg;
  cfg.random_target_label = true;
  CHECK_THROWS_AS(Generator(&f, {&g}, &data, cfg, 89), ConfigError);
}

TEST_CASE("generate_for_batch: exhausted seed retries keep the real sample and log it") {
  LabeledDataset data = counted_dataset({40, 8}, 3, 140);
  DenseNet f = random_linear_net(3, 2, 141);
  DenseNet g = random_linear_net(3, 2, 142);
  M2mConfig cfg;
  Generator generator(&f, {&g}, &data, cfg, 143);

  // every slot holds the tail class, so no seed of class 0 exists in the batch
  Batch batch;
  const int tail_first = data.indices_of_class(1).front();
  batch.x = Matrix(12, 3);
  for (std::size_t i = 0; i < 12; ++i)
    batch.x.set_row(i, data.row(static_cast<std::size_t>(tail_first)));
  batch.y.assign(12, 1);
  batch.source_index.assign(12, tail_first);
  const Batch before = batch;

  GenerationLog log;
  generator.generate_for_batch(batch, 0, 0, &log);
  CHECK(log.records().size() > 0);
  CHECK(log.count(GenStatus::replaced_real) == log.records().size());
  CHECK(batch.x == before.x);  // slots keep their real samples
  for (const auto& record : log.records()) CHECK(record.seed_class == -1);
}

TEST_CASE("generate_for_batch: deterministic for a fixed master seed") {
  LabeledDataset data = counted_dataset({40, 8}, 3, 90);
  DenseNet f = random_linear_net(3, 2, 91);
  DenseNet g = random_linear_net(3, 2, 92);
  Generator generator(&f, {&g}, &data, M2mConfig{}, 93);
  Rng rng(94);
  Batch batch = class_balanced_batch(data, 24, rng);
  Batch copy = batch;
  GenerationLog log_a, log_b;
  generator.generate_for_batch(batch, 1, 2, &log_a);
  generator.generate_for_batch(copy, 1, 2, &log_b);
  CHECK(batch.x == copy.x);
  CHECK(batch.y == copy.y);
  CHECK(log_a.records().size() == log_b.records().size());
}

TEST_CASE("seed pools: a limit fixes the per-class candidate subsets") {
  LabeledDataset data = counted_dataset({100, 50, 10}, 3, 95);
  DenseNet f = random_linear_net(3, 3, 96);
  DenseNet g = random_linear_net(3, 3, 97);
  M2mConfig cfg;
  cfg.seed_pool_limit = 7;
  Generator generator(&f, {&g}, &data, cfg, 98);
  for (int k = 0; k < 3; ++k) {
    const auto& pool = generator.seed_pools()[static_cast<std::size_t>(k)];
    CHECK(pool.size() == std::min<std::size_t>(7, data.indices_of_class(k).size()));
    std::set<int> allowed(data.indices_of_class(k).begin(), data.indices_of_class(k).end());
    for (int idx : pool) CHECK(allowed.count(idx) == 1);
  }
  Generator again(&f, {&g}, &data, cfg, 98);
  CHECK(again.seed_pools() == generator.seed_pools());
}

TEST_CASE("build_balanced: an already balanced dataset is returned unchanged") {
  LabeledDataset data = counted_dataset({25, 25}, 3, 99);
  DenseNet f = random_linear_net(3, 2, 100);
  DenseNet g = random_linear_net(3, 2, 101);
  GenerationLog log;
  LabeledDataset balanced = build_balanced_dataset(data, f, g, M2mConfig{}, 102, &log);
  CHECK(balanced.size() == data.size());
  CHECK(log.records().empty());
  CHECK(balanced.inputs() == data.inputs());
}

TEST_CASE("build_balanced: deficits are filled exactly and contracts hold") {
  LabeledDataset data = counted_dataset({100, 10}, 3, 103);
  TrainConfig tc;
  tc.epochs = 10;
  tc.batch_size = 32;
  tc.hidden = {16};
  tc.schedule.base = 0.05;
  const DenseNet g = train_erm(data, tc, 902).net;
  const DenseNet f = train_erm(data, tc, 903).net;
  M2mConfig cfg;
  cfg.beta = 0.99;
  GenerationLog log;
  LabeledDataset balanced = build_balanced_dataset(data, f, g, cfg, 104, &log);
  CHECK(log.records().size() == 90);  // exactly N_1 - N_2 additions
  for (int c : balanced.class_counts()) CHECK(c == 100);
  CHECK(balanced.size() == 200);
  for (const auto& record : log.records()) {
    CHECK(record.displacement <= cfg.steps * cfg.step_size + 1e-12);
    if (record.status == GenStatus::accepted) CHECK(record.final_loss <= cfg.gamma + 1e-12);
  }
}

TEST_CASE("build_balanced: an untrained generator is mostly gamma-rejected") {
  LabeledDataset data = gaussian_mixture(10, 60, 16, 4.0, 105);
  LabeledDataset tail = make_long_tail(data, 20.0, 106);
  Rng net_rng(107);
  // deliberately untrained nets of the usual architecture
  DenseNet g = DenseNet::make_mlp(16, std::vector<int>{64, 64}, 10, net_rng);
  DenseNet f = DenseNet::make_mlp(16, std::vector<int>{64, 64}, 10, net_rng);
  M2mConfig cfg;
  cfg.disable_reject = false;
  GenerationLog log;
  build_balanced_dataset(tail, f, g, cfg, 109, &log);
  REQUIRE(log.records().size() > 100);
  const double gamma_fraction =
      static_cast<double>(log.count(GenStatus::rejected_gamma)) /
      static_cast<double>(log.records().size());
  CHECK(gamma_fraction > 0.5);
}
