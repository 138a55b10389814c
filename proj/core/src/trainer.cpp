#include "m2m/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "m2m/error.hpp"

namespace m2m {

namespace {
constexpr std::uint64_t kInitTag = 0x171;
constexpr std::uint64_t kBatchTag = 0xba7c;
constexpr std::uint64_t kSmoteTag = 0x50e;
constexpr std::uint64_t kGenTag = 0x9e4;
constexpr std::uint64_t kGenNetTag = 0x6e7;
}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (schedule.base < 0.0) throw ConfigError("train: learning rate must be non-negative");
  if (schedule.warmup_epochs < 0) throw ConfigError("train: warmup_epochs must be >= 0");
  for (const auto& [epoch, factor] : schedule.decay_steps)
    if (epoch < 0 || factor <= 0.0)
      throw ConfigError("train: decay steps need epoch >= 0 and factor > 0");
  if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be non-negative");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("train: momentum must lie in [0, 1)");
  if (hidden.empty()) throw ConfigError("train: at least one hidden layer required");
}

TrainResult train_erm(const LabeledDataset& train, const TrainConfig& cfg, std::uint64_t seed) {
  StrategySpec erm;
  return train_with_strategy(train, erm, cfg, seed);
}

TrainResult train_with_strategy(const LabeledDataset& train, const StrategySpec& strategy,
                                const TrainConfig& cfg, std::uint64_t seed,
                                const M2mConfig* m2m_cfg,
                                const std::vector<const DenseNet*>* generator_nets,
                                GenerationLog* log) {
  cfg.validate();
  strategy.validate(cfg.epochs);
  if (strategy.kind == StrategyKind::m2m) {
    if (!m2m_cfg) throw ConfigError("train: m2m strategy needs an M2mConfig");
    m2m_cfg->validate();
    if (!m2m_cfg->use_self_as_g &&
        (!generator_nets || generator_nets->empty()))
      throw ConfigError("train: m2m strategy needs pretrained generator nets");
  }

  // SMOTE balances the dataset up front and then trains uniformly over it.
  LabeledDataset smote_set;
  const LabeledDataset* sampling_set = &train;
  if (strategy.kind == StrategyKind::smote) {
    smote_set = smote_balance(train, strategy.smote_neighbors, derive_seed(seed, kSmoteTag));
    sampling_set = &smote_set;
  }

  Rng init_rng(derive_seed(seed, kInitTag));
  TrainResult result;
  result.net = DenseNet::make_mlp(train.dim(), cfg.hidden,
                                  static_cast<std::size_t>(train.num_classes()), init_rng);

  std::optional<Generator> generator;
  if (strategy.kind == StrategyKind::m2m) {
    std::vector<const DenseNet*> gens;
    if (m2m_cfg->use_self_as_g) {
      gens.push_back(&result.net);  // live training net
    } else {
      gens = *generator_nets;
    }
    generator.emplace(&result.net, std::move(gens), &train, *m2m_cfg,
                      derive_seed(seed, kGenTag));
  }

  Rng batch_rng(derive_seed(seed, kBatchTag));
  SgdMomentum optimizer(cfg.momentum, cfg.weight_decay);
  const int steps_per_epoch = static_cast<int>(
      (sampling_set->size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
      static_cast<std::size_t>(cfg.batch_size));

  result.epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    optimizer.set_learning_rate(cfg.schedule.rate(epoch));
    const EpochPlan plan = apply_strategy(strategy, epoch, train.class_counts());
    double loss_sum = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      Batch batch = plan.class_balanced
                        ? class_balanced_batch(*sampling_set, cfg.batch_size, batch_rng)
                        : uniform_batch(*sampling_set, cfg.batch_size, batch_rng);
      if (plan.generation_active && generator)
        generator->generate_for_batch(batch, epoch, step, log);

      const ForwardCache cache = result.net.forward_cache(batch.x);
      CeResult ce;
      if (plan.class_weights.empty()) {
        ce = cross_entropy(cache.logits(), batch.y);
      } else {
        std::vector<double> weights(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i)
          weights[i] = plan.class_weights[static_cast<std::size_t>(batch.y[i])];
        ce = cross_entropy(cache.logits(), batch.y, weights);
      }
      const Gradients grads = result.net.backward_params(cache, ce.dlogits);
      optimizer.step(result.net, grads);
      loss_sum += ce.loss;
    }
    result.epoch_losses.push_back(loss_sum / steps_per_epoch);
  }
  return result;
}

std::uint64_t dataset_fingerprint(const LabeledDataset& dataset) {
  // FNV-1a over dims, labels and raw input bits
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  const std::uint64_t header[2] = {dataset.size(), dataset.dim()};
  mix(header, sizeof(header));
  mix(dataset.labels().data(), dataset.labels().size() * sizeof(int));
  mix(dataset.inputs().data(), dataset.inputs().size() * sizeof(double));
  return h;
}

M2mTrainResult train_m2m(const LabeledDataset& train, const LabeledDataset& test,
                         const StrategySpec& strategy, const TrainConfig& cfg,
                         const M2mConfig& m2m_cfg, std::uint64_t seed,
                         const std::filesystem::path& cache_dir) {
  if (strategy.kind != StrategyKind::m2m)
    throw ConfigError("train_m2m: strategy kind must be m2m");
  std::vector<DenseNet> generator_storage;
  std::vector<const DenseNet*> generator_nets;
  if (!m2m_cfg.use_self_as_g) {
    for (int i = 0; i < m2m_cfg.ensemble_size; ++i)
      generator_storage.push_back(pretrain_generator_net(
          train, cfg, derive_seed(seed, kGenNetTag, static_cast<std::uint64_t>(i)), cache_dir));
    for (const auto& g : generator_storage) generator_nets.push_back(&g);
  }
  M2mTrainResult result;
  TrainResult trained = train_with_strategy(
      train, strategy, cfg, seed, &m2m_cfg,
      generator_nets.empty() ? nullptr : &generator_nets, &result.log);
  result.net = std::move(trained.net);
  result.report = evaluate(result.net, test, train.class_counts());
  return result;
}

DenseNet pretrain_generator_net(const LabeledDataset& train, const TrainConfig& cfg,
                                std::uint64_t seed, const std::filesystem::path& cache_dir) {
  std::filesystem::path cache_file;
  if (!cache_dir.empty()) {
    std::uint64_t key = dataset_fingerprint(train);
    key = derive_seed(key, seed, static_cast<std::uint64_t>(cfg.epochs),
                      static_cast<std::uint64_t>(cfg.batch_size));
    for (int w : cfg.hidden) key = derive_seed(key, static_cast<std::uint64_t>(w));
    char name[32];
    std::snprintf(name, sizeof(name), "g_%016llx.net", static_cast<unsigned long long>(key));
    cache_file = cache_dir / name;
    if (std::filesystem::exists(cache_file)) return DenseNet::load(cache_file);
  }
  TrainResult result = train_erm(train, cfg, seed);
  if (!cache_file.empty()) {
    std::filesystem::create_directories(cache_dir);
    result.net.save(cache_file);
  }
  return result.net;
}

}  // namespace m2m
