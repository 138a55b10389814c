#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "m2m/dataset.hpp"
#include "m2m/generation.hpp"
#include "m2m/metrics.hpp"
#include "m2m/net.hpp"
#include "m2m/optimizer.hpp"
#include "m2m/rebalance.hpp"

namespace m2m {

struct TrainConfig {
  int epochs = 60;
  int batch_size = 128;
  LrSchedule schedule;
  double weight_decay = 5e-5;
  double momentum = 0.9;
  std::vector<int> hidden = {64, 64};

  void validate() const;
};

struct TrainResult {
  DenseNet net;
  std::vector<double> epoch_losses;  // mean batch loss per epoch
};

/// Plain ERM training: uniform batches, unweighted cross-entropy.
TrainResult train_erm(const LabeledDataset& train, const TrainConfig& cfg, std::uint64_t seed);

/// Trains a classifier under the given re-balancing strategy. For m2m the
/// generator nets must be supplied (unless use_self_as_g is set) and batch
/// slots are rewritten by generate_for_batch once the strategy is active.
///
/// RNG streams: net init, batch composition, SMOTE balancing and generation
/// each draw from independent streams derived from `seed`, so configurations
/// that never generate consume the batch stream exactly like their plain
/// re-sampling counterparts.
TrainResult train_with_strategy(const LabeledDataset& train, const StrategySpec& strategy,
                                const TrainConfig& cfg, std::uint64_t seed,
                                const M2mConfig* m2m_cfg = nullptr,
                                const std::vector<const DenseNet*>* generator_nets = nullptr,
                                GenerationLog* log = nullptr);

/// Returns the ERM-pretrained generator net for the dataset, loading it from
/// `cache_dir` when a checkpoint for the same (dataset, config, seed) exists
/// and training + saving it otherwise. An empty cache_dir disables caching.
DenseNet pretrain_generator_net(const LabeledDataset& train, const TrainConfig& cfg,
                                std::uint64_t seed, const std::filesystem::path& cache_dir = {});

struct M2mTrainResult {
  DenseNet net;
  EvalReport report;
  GenerationLog log;
};

/// The full two-phase m2m pipeline: phase one pretrains (or loads from cache)
/// the generator nets by plain ERM; phase two trains f, deferring to plain
/// ERM until the strategy's defer epoch and then running class-balanced
/// batches with sample generation. Returns f with its balanced-test report.
M2mTrainResult train_m2m(const LabeledDataset& train, const LabeledDataset& test,
                         const StrategySpec& strategy, const TrainConfig& cfg,
                         const M2mConfig& m2m_cfg, std::uint64_t seed,
                         const std::filesystem::path& cache_dir = {});

/// Content hash of a dataset (dims, labels, raw input bits); used for the
/// generator-net cache key.
std::uint64_t dataset_fingerprint(const LabeledDataset& dataset);

}  // namespace m2m
