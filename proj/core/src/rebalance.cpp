#include "m2m/rebalance.hpp"

#include <algorithm>
#include <cmath>

#include "m2m/error.hpp"

namespace m2m {

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::erm: return "erm";
    case StrategyKind::rs: return "rs";
    case StrategyKind::smote: return "smote";
    case StrategyKind::rw: return "rw";
    case StrategyKind::cbrw: return "cbrw";
    case StrategyKind::m2m: return "m2m";
  }
  return "?";
}

void StrategySpec::validate(int total_epochs) const {
  if (deferred) {
    if (kind == StrategyKind::erm || kind == StrategyKind::smote)
      throw ConfigError(std::string("deferred flag is not valid for strategy ") + to_string(kind));
    if (defer_epoch < 0 || defer_epoch >= total_epochs)
      throw ConfigError("defer_epoch must lie in [0, epochs)");
  }
  if (kind == StrategyKind::cbrw && (cbrw_beta < 0.0 || cbrw_beta >= 1.0))
    throw ConfigError("cbrw_beta must lie in [0, 1)");
  if (kind == StrategyKind::smote && smote_neighbors < 1)
    throw ConfigError("smote_neighbors must be >= 1");
}

namespace {

Batch make_batch(const LabeledDataset& dataset, const std::vector<int>& indices) {
  Batch b;
  b.x = Matrix(indices.size(), dataset.dim());
  b.y.resize(indices.size());
  b.source_index = indices;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    b.x.set_row(i, dataset.row(static_cast<std::size_t>(indices[i])));
    b.y[i] = dataset.label(static_cast<std::size_t>(indices[i]));
  }
  return b;
}

}  // namespace

Batch uniform_batch(const LabeledDataset& dataset, int batch_size, Rng& rng) {
  if (dataset.size() == 0) throw DatasetError("uniform_batch: empty dataset");
  std::vector<int> indices(static_cast<std::size_t>(batch_size));
  for (auto& i : indices) i = static_cast<int>(rng.index(dataset.size()));
  return make_batch(dataset, indices);
}

Batch class_balanced_batch(const LabeledDataset& dataset, int batch_size, Rng& rng) {
  const int k = dataset.num_classes();
  for (int c = 0; c < k; ++c)
    if (dataset.indices_of_class(c).empty())
      throw DatasetError("class_balanced_batch: empty class " + std::to_string(c));
  std::vector<int> indices(static_cast<std::size_t>(batch_size));
  for (auto& i : indices) {
    const int cls = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    const auto& pool = dataset.indices_of_class(cls);
    i = pool[rng.index(pool.size())];
  }
  return make_batch(dataset, indices);
}

namespace {

std::vector<double> normalize_mean_one(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  const double mean = sum / static_cast<double>(w.size());
  for (double& v : w) v /= mean;
  return w;
}

}  // namespace

std::vector<double> rw_weights(std::span<const int> class_counts) {
  std::vector<double> w(class_counts.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (class_counts[k] < 1) throw DatasetError("rw_weights: class count must be >= 1");
    w[k] = 1.0 / static_cast<double>(class_counts[k]);
  }
  return normalize_mean_one(std::move(w));
}

std::vector<double> cbrw_weights(std::span<const int> class_counts, double beta) {
  if (beta < 0.0 || beta >= 1.0) throw DomainError("cbrw_weights: beta must lie in [0, 1)");
  std::vector<double> w(class_counts.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (class_counts[k] < 1) throw DatasetError("cbrw_weights: class count must be >= 1");
    const double effective =
        (1.0 - std::pow(beta, static_cast<double>(class_counts[k]))) / (1.0 - beta);
    w[k] = 1.0 / effective;
  }
  return normalize_mean_one(std::move(w));
}

std::vector<double> smote_sample(const LabeledDataset& dataset, int cls, int k_neighbors,
                                 Rng& rng, bool* duplicated) {
  const auto& pool = dataset.indices_of_class(cls);
  if (pool.empty()) throw DatasetError("smote_sample: empty class");
  if (duplicated) *duplicated = false;
  const int a = pool[rng.index(pool.size())];
  const auto xa = dataset.row(static_cast<std::size_t>(a));
  if (pool.size() == 1) {
    if (duplicated) *duplicated = true;
    return {xa.begin(), xa.end()};
  }
  // k nearest same-class neighbors of x_a (Euclidean), ties broken by index
  std::vector<std::pair<double, int>> dists;
  dists.reserve(pool.size() - 1);
  for (int idx : pool) {
    if (idx == a) continue;
    const auto xb = dataset.row(static_cast<std::size_t>(idx));
    double d2 = 0.0;
    for (std::size_t j = 0; j < xa.size(); ++j) {
      const double diff = xa[j] - xb[j];
      d2 += diff * diff;
    }
    dists.emplace_back(d2, idx);
  }
  const std::size_t kn = std::min<std::size_t>(static_cast<std::size_t>(k_neighbors), dists.size());
  std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(kn), dists.end());
  const int b = dists[rng.index(kn)].second;
  const auto xb = dataset.row(static_cast<std::size_t>(b));
  const double u = rng.uniform();
  std::vector<double> out(xa.size());
  for (std::size_t j = 0; j < xa.size(); ++j) out[j] = xa[j] + u * (xb[j] - xa[j]);
  return out;
}

LabeledDataset smote_balance(const LabeledDataset& dataset, int k_neighbors,
                             std::uint64_t seed) {
  const auto& counts = dataset.class_counts();
  const int head = counts.front();
  std::size_t total = dataset.size();
  for (int c : counts) total += static_cast<std::size_t>(head - c);

  Matrix inputs(total, dataset.dim());
  std::vector<int> labels(total);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    inputs.set_row(i, dataset.row(i));
    labels[i] = dataset.label(i);
  }
  Rng rng(derive_seed(seed, 0x5307e));
  std::size_t row = dataset.size();
  for (int k = 0; k < dataset.num_classes(); ++k) {
    const int deficit = head - counts[static_cast<std::size_t>(k)];
    for (int i = 0; i < deficit; ++i, ++row) {
      const auto synthetic = smote_sample(dataset, k, k_neighbors, rng);
      inputs.set_row(row, synthetic);
      labels[row] = k;
    }
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

EpochPlan apply_strategy(const StrategySpec& spec, int epoch, std::span<const int> class_counts) {
  EpochPlan plan;
  if (spec.deferred && epoch < spec.defer_epoch) return plan;  // plain ERM phase
  switch (spec.kind) {
    case StrategyKind::erm:
    case StrategyKind::smote:
      break;  // smote trains uniformly over its pre-balanced dataset
    case StrategyKind::rs:
      plan.class_balanced = true;
      break;
    case StrategyKind::rw:
      plan.class_weights = rw_weights(class_counts);
      break;
    case StrategyKind::cbrw:
      plan.class_weights = cbrw_weights(class_counts, spec.cbrw_beta);
      break;
    case StrategyKind::m2m:
      plan.class_balanced = true;
      plan.generation_active = true;
      break;
  }
  return plan;
}

}  // namespace m2m
