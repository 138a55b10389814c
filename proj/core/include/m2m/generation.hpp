#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "m2m/dataset.hpp"
#include "m2m/net.hpp"
#include "m2m/rebalance.hpp"

namespace m2m {

/// Hyperparameters of major-to-minor sample generation, plus the ablation
/// switches. Defaults follow the standard grid midpoints.
struct M2mConfig {
  double lambda = 0.1;      // weight of the seed-class logit regularizer
  double beta = 0.999;      // rejection base, in [0, 1)
  double gamma = 0.9;       // max generation loss for acceptance
  double step_size = 0.1;   // eta: length of each normalized gradient step
  int steps = 10;           // T
  double noise_scale = 0.01;  // init noise, uniform in +-noise_scale per coordinate

  // ablation switches
  bool use_self_as_g = false;       // generate against the training net itself
  bool clean_seed = false;          // over-sample the untouched seed instead of the synthetic
  bool random_target_label = false; // label accepted synthetics with a random other class
  bool disable_reject = false;      // skip the Bernoulli rejection
  bool disable_gamma = false;       // skip the loss threshold (gamma = infinity)
  int seed_pool_limit = 0;          // cap on per-class seed candidates; 0 = full
  int ensemble_size = 1;            // number of generator nets (loss averaged)

  double gen_prob_scale = 1.0;  // scales the per-sample generation probability
  int seed_retry_budget = 10;   // in-batch seed-class resample attempts

  void validate() const;
};

enum class GenStatus { accepted, rejected_bernoulli, rejected_gamma, replaced_real };

const char* to_string(GenStatus status);

/// One record per generation attempt.
struct GenerationOutcome {
  int epoch = -1;
  int step = -1;
  int slot = -1;
  int seed_class = -1;
  int target_class = -1;
  GenStatus status = GenStatus::replaced_real;
  double final_loss = 0.0;
  double displacement = 0.0;  // L2 distance from the noisy start
};

/// Collects generation attempts; written as CSV for ablation analysis.
class GenerationLog {
 public:
  void add(const GenerationOutcome& outcome) { records_.push_back(outcome); }
  const std::vector<GenerationOutcome>& records() const { return records_; }
  std::size_t count(GenStatus status) const;
  void write_csv(const std::filesystem::path& file) const;

 private:
  std::vector<GenerationOutcome> records_;
};

struct TranslateResult {
  std::vector<double> x;      // the synthetic sample
  std::vector<double> start;  // x0 + noise
  double final_loss = 0.0;    // generation loss of x toward the target class
  double displacement = 0.0;  // L2 distance from start to x
  int stationary_steps = 0;   // steps skipped because the gradient vanished
};

/// Translates a seed x0 of class k0 toward class k: T normalized gradient
/// steps on L(g; x, k) + lambda * f_{k0}(x), starting from x0 plus small
/// uniform noise. With several generator nets their losses (and gradients)
/// are averaged. Zero-gradient steps are skipped and counted.
TranslateResult translate(std::span<const DenseNet* const> g_ensemble, const DenseNet& f,
                          std::span<const double> x0, int k0, int k, const M2mConfig& cfg,
                          Rng& rng);

/// Probability of rejecting a synthetic generated from class k0 toward class
/// k: beta^max(N_k0 - N_k, 0).
double reject_probability(long n_k0, long n_k, double beta);

/// Seed-class distribution Q(k0 | k) proportional to the acceptance
/// probability 1 - beta^((N_k0 - N_k)^+). Classes no larger than the target
/// get zero mass. Returns nullopt when no class is larger than the target
/// (the caller falls back to duplicating real samples).
std::optional<std::vector<double>> seed_class_distribution(std::span<const int> class_counts,
                                                           int target, double beta);

/// Drives generation for a training phase: holds the nets, the training set
/// (for replacement draws), the per-class seed pools, and the config.
///
/// All randomness inside a batch comes from per-slot streams derived from
/// (master seed, epoch, step, slot), so results are independent of the order
/// slots are processed in and never perturb the caller's batch stream.
class Generator {
 public:
  Generator(const DenseNet* f, std::vector<const DenseNet*> g, const LabeledDataset* dataset,
            const M2mConfig& cfg, std::uint64_t master_seed);

  /// Batch-wise generation: each slot i independently fires with probability
  /// 1 - N_{y_i}/N_1; on acceptance the slot is replaced by the synthetic,
  /// on rejection by a uniform real sample of class y_i from the full
  /// training set. Seeds are drawn from the batch as it was on entry.
  void generate_for_batch(Batch& batch, int epoch, int step, GenerationLog* log) const;

  /// Offline balancing: appends N_1 - N_k samples to every class k, each an
  /// accepted synthetic or (on rejection) a duplicated real sample, so every
  /// class reaches the head count exactly.
  LabeledDataset build_balanced(GenerationLog* log) const;

  const std::vector<std::vector<int>>& seed_pools() const { return seed_pools_; }

 private:
  struct Attempt {
    std::vector<double> sample;
    int label = -1;
    GenStatus status = GenStatus::replaced_real;
    double final_loss = 0.0;
    double displacement = 0.0;
  };
  Attempt attempt(std::span<const double> x0, int k0, int target, Rng& rng) const;

  const DenseNet* f_;
  std::vector<const DenseNet*> g_;
  const LabeledDataset* dataset_;
  M2mConfig cfg_;
  std::uint64_t master_seed_;
  std::vector<std::vector<int>> seed_pools_;  // per-class candidate seed indices
};

/// Convenience wrapper for the offline variant.
LabeledDataset build_balanced_dataset(const LabeledDataset& dataset, const DenseNet& f,
                                      const DenseNet& g, const M2mConfig& cfg,
                                      std::uint64_t seed, GenerationLog* log = nullptr);

}  // namespace m2m
