#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "m2m/dataset.hpp"
#include "m2m/generation.hpp"
#include "m2m/metrics.hpp"
#include "m2m/rebalance.hpp"
#include "m2m/trainer.hpp"

namespace m2m {

/// Dataset source: a synthetic generator or a file pair.
struct DatasetSpec {
  std::string kind = "gaussian_mixture";  // gaussian_mixture | two_moons | rings | csv | idx
  int classes = 10;
  int per_class = 500;
  int dim = 16;
  double separation = 4.0;
  double noise = 0.1;
  std::filesystem::path csv_path;
  std::filesystem::path idx_images;
  std::filesystem::path idx_labels;
};

struct SplitSpec {
  double val_fraction = 0.1;
  int test_per_class = 100;
};

/// One result-table row: a strategy plus the m2m settings it runs with.
struct RunSpec {
  std::string label;
  StrategySpec strategy;
  M2mConfig m2m;
};

struct SweepGrid {
  std::vector<double> lambda = {0.01, 0.1, 0.5};
  std::vector<double> beta = {0.9, 0.99, 0.999};
  std::vector<double> gamma = {0.9, 0.99};
};

struct ExperimentConfig {
  DatasetSpec dataset;
  double rho = 0.0;  // imbalance ratio applied to the train split; 0 = none
  SplitSpec split;
  TrainConfig train;
  int defer_epoch = -1;  // default for deferred strategies; -1 = 80% of epochs
  std::vector<RunSpec> strategies;
  M2mConfig m2m;
  SweepGrid sweep_grid;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::filesystem::path output_dir;

  void validate() const;
  int resolved_defer_epoch() const;
};

/// Parses the documented JSON schema. Unknown keys anywhere are a hard error.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
std::string config_to_json(const ExperimentConfig& cfg);

struct RunRow {
  std::string label;
  int trials = 0;
  bool failed = false;
  std::string error;
  double bacc_mean = 0.0, bacc_std = 0.0;
  double gm_mean = 0.0, gm_std = 0.0;
  double major_mean = 0.0, minor_mean = 0.0;
};

/// Data for one trial seed: identical for every strategy at that seed.
SplitResult prepare_trial_data(const ExperimentConfig& cfg, std::uint64_t seed);

struct TrialResult {
  EvalReport test;
  std::optional<EvalReport> val;
};

/// Trains and evaluates one (strategy, seed) pair. When run_dir is non-empty
/// the report, curve, generation log and checkpoint are written there;
/// cache_dir (when non-empty) caches pretrained generator nets across runs.
TrialResult run_single(const ExperimentConfig& cfg, const RunSpec& spec, std::uint64_t seed,
                       const std::filesystem::path& run_dir = {},
                       const std::filesystem::path& cache_dir = {});

/// Runs every strategy over every seed, writes per-run artifacts and the
/// aggregated results under cfg.output_dir, and returns the table rows.
std::vector<RunRow> run(const ExperimentConfig& cfg);

struct SweepChoice {
  double lambda = 0.0, beta = 0.0, gamma = 0.0;
  double val_bacc_mean = 0.0;
};

/// Grid search over (lambda, beta, gamma), selecting the highest mean
/// validation bACC; ties prefer smaller lambda, then beta, then gamma.
SweepChoice sweep(const ExperimentConfig& cfg);

/// Re-renders the result table from a previous run directory.
std::vector<RunRow> collect_rows(const std::filesystem::path& results_json);

std::string render_table(std::span<const RunRow> rows);

/// Writes the (split, optionally long-tailed) dataset of the first seed as
/// train/val/test CSV files under cfg.output_dir.
void generate_data(const ExperimentConfig& cfg);

/// Sample mean and standard deviation (n-1 denominator; 0 when n < 2).
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace m2m
