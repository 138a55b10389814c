#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "m2m/dataset.hpp"
#include "m2m/rng.hpp"

namespace m2m {

enum class StrategyKind { erm, rs, smote, rw, cbrw, m2m };

const char* to_string(StrategyKind kind);

/// A re-balancing strategy plus its scheduling. The deferred flag is valid
/// for rs, rw, cbrw and m2m; when set, the strategy behaves as plain ERM
/// until defer_epoch and switches over from that epoch on.
struct StrategySpec {
  StrategyKind kind = StrategyKind::erm;
  bool deferred = false;
  int defer_epoch = -1;  // resolved by the harness when left at -1
  double cbrw_beta = 0.9999;
  int smote_neighbors = 5;

  void validate(int total_epochs) const;
};

/// A mini-batch: materialized rows plus labels. source_index points back into
/// the dataset the row was copied from, or -1 for synthetic rows.
struct Batch {
  Matrix x;
  std::vector<int> y;
  std::vector<int> source_index;

  std::size_t size() const { return y.size(); }
};

/// Uniform-over-samples batch (with replacement); one draw per slot.
Batch uniform_batch(const LabeledDataset& dataset, int batch_size, Rng& rng);

/// Class-balanced batch: each slot draws a class uniformly, then a sample
/// uniformly within that class, so expected per-class frequency is m/K.
Batch class_balanced_batch(const LabeledDataset& dataset, int batch_size, Rng& rng);

/// Inverse-frequency weights, normalized to mean 1.
std::vector<double> rw_weights(std::span<const int> class_counts);

/// Class-balanced weights: inverse effective number (1 - beta^N_k)/(1 - beta),
/// normalized to mean 1.
std::vector<double> cbrw_weights(std::span<const int> class_counts, double beta);

/// One SMOTE draw for the given class: x_a plus a uniform step toward one of
/// its k nearest same-class neighbors. A singleton class falls back to plain
/// duplication; `duplicated` (when non-null) reports that the fallback fired.
std::vector<double> smote_sample(const LabeledDataset& dataset, int cls, int k_neighbors,
                                 Rng& rng, bool* duplicated = nullptr);

/// Offline SMOTE balancing: appends N_1 - N_k synthetic samples to every
/// class k so all classes reach the head count.
LabeledDataset smote_balance(const LabeledDataset& dataset, int k_neighbors,
                             std::uint64_t seed);

/// What a strategy does at a given epoch: which sampler to use, which
/// per-class loss weights to apply (empty = uniform), and whether sample
/// generation is active.
struct EpochPlan {
  bool class_balanced = false;
  std::vector<double> class_weights;
  bool generation_active = false;
};

/// Deferred strategies return plain ERM behavior before defer_epoch and the
/// strategy's sampler/weights at and after it.
EpochPlan apply_strategy(const StrategySpec& spec, int epoch, std::span<const int> class_counts);

}  // namespace m2m
