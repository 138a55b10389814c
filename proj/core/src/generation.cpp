#include "m2m/generation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "m2m/error.hpp"

namespace m2m {

namespace {
constexpr std::uint64_t kPoolTag = 0x100f;
constexpr std::uint64_t kSlotTag = 0x510c;
constexpr std::uint64_t kOfflineTag = 0x0ff1;
}  // namespace

void M2mConfig::validate() const {
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("m2m: beta must lie in [0, 1)");
  if (steps < 1) throw ConfigError("m2m: steps must be >= 1");
  if (step_size <= 0.0) throw ConfigError("m2m: step_size must be positive");
  if (!disable_gamma && gamma <= 0.0)
    throw ConfigError("m2m: gamma must be positive unless disabled");
  if (lambda < 0.0) throw ConfigError("m2m: lambda must be non-negative");
  if (noise_scale < 0.0) throw ConfigError("m2m: noise_scale must be non-negative");
  if (gen_prob_scale < 0.0 || gen_prob_scale > 1.0)
    throw ConfigError("m2m: gen_prob_scale must lie in [0, 1]");
  if (seed_retry_budget < 1) throw ConfigError("m2m: seed_retry_budget must be >= 1");
  if (seed_pool_limit < 0) throw ConfigError("m2m: seed_pool_limit must be >= 0");
  if (ensemble_size < 1) throw ConfigError("m2m: ensemble_size must be >= 1");
}

const char* to_string(GenStatus status) {
  switch (status) {
    case GenStatus::accepted: return "accepted";
    case GenStatus::rejected_bernoulli: return "rejected_bernoulli";
    case GenStatus::rejected_gamma: return "rejected_gamma";
    case GenStatus::replaced_real: return "replaced_real";
  }
  return "?";
}

std::size_t GenerationLog::count(GenStatus status) const {
  std::size_t n = 0;
  for (const auto& r : records_)
    if (r.status == status) ++n;
  return n;
}

void GenerationLog::write_csv(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open generation log for writing: " + file.string());
  out << "epoch,step,slot,seed_class,target_class,status,final_loss,displacement\n";
  char buf[64];
  for (const auto& r : records_) {
    out << r.epoch << ',' << r.step << ',' << r.slot << ',' << r.seed_class << ','
        << r.target_class << ',' << to_string(r.status) << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.final_loss);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.displacement);
    out << buf << '\n';
  }
  if (!out) throw IoError("short write on generation log: " + file.string());
}

TranslateResult translate(std::span<const DenseNet* const> g_ensemble, const DenseNet& f,
                          std::span<const double> x0, int k0, int k, const M2mConfig& cfg,
                          Rng& rng) {
  cfg.validate();
  if (g_ensemble.empty()) throw DomainError("translate: empty generator ensemble");
  if (k == k0) throw DomainError("translate: target class equals seed class");
  for (const DenseNet* g : g_ensemble)
    if (g->input_dim() != x0.size())
      throw ShapeError("translate: seed width does not match generator input");

  TranslateResult result;
  result.x.assign(x0.begin(), x0.end());
  for (double& v : result.x) v += rng.uniform(-cfg.noise_scale, cfg.noise_scale);
  result.start = result.x;

  const double inv_m = 1.0 / static_cast<double>(g_ensemble.size());
  std::vector<double> grad(x0.size());
  for (int t = 0; t < cfg.steps; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const DenseNet* g : g_ensemble) {
      const InputGradient ig = input_gradient(*g, result.x, CeToward{k});
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += inv_m * ig.gradient[j];
    }
    if (cfg.lambda != 0.0) {
      const InputGradient fg = input_gradient(f, result.x, LogitOf{k0});
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += cfg.lambda * fg.gradient[j];
    }
    double norm_sq = 0.0;
    for (double v : grad) norm_sq += v * v;
    if (norm_sq == 0.0) {
      ++result.stationary_steps;  // stationary point; skip this step
      continue;
    }
    const double scale = cfg.step_size / std::sqrt(norm_sq);
    for (std::size_t j = 0; j < grad.size(); ++j) result.x[j] -= scale * grad[j];
  }

  double loss = 0.0;
  for (const DenseNet* g : g_ensemble) loss += inv_m * ce_value(*g, result.x, k);
  result.final_loss = loss;
  double disp_sq = 0.0;
  for (std::size_t j = 0; j < result.x.size(); ++j) {
    const double d = result.x[j] - result.start[j];
    disp_sq += d * d;
  }
  result.displacement = std::sqrt(disp_sq);
  return result;
}

double reject_probability(long n_k0, long n_k, double beta) {
  if (beta < 0.0 || beta >= 1.0) throw DomainError("reject_probability: beta must lie in [0, 1)");
  const long gap = n_k0 - n_k;
  if (gap <= 0) return 1.0;
  return std::pow(beta, static_cast<double>(gap));
}

std::optional<std::vector<double>> seed_class_distribution(std::span<const int> class_counts,
                                                           int target, double beta) {
  if (beta < 0.0 || beta >= 1.0)
    throw DomainError("seed_class_distribution: beta must lie in [0, 1)");
  if (target < 0 || static_cast<std::size_t>(target) >= class_counts.size())
    throw DomainError("seed_class_distribution: target class out of range");
  std::vector<double> q(class_counts.size(), 0.0);
  double total = 0.0;
  for (std::size_t k0 = 0; k0 < class_counts.size(); ++k0) {
    const long gap = static_cast<long>(class_counts[k0]) - class_counts[static_cast<std::size_t>(target)];
    if (gap > 0) {
      q[k0] = 1.0 - std::pow(beta, static_cast<double>(gap));
      total += q[k0];
    }
  }
  if (total <= 0.0) return std::nullopt;
  for (double& v : q) v /= total;
  return q;
}

Generator::Generator(const DenseNet* f, std::vector<const DenseNet*> g,
                     const LabeledDataset* dataset, const M2mConfig& cfg,
                     std::uint64_t master_seed)
    : f_(f), g_(std::move(g)), dataset_(dataset), cfg_(cfg), master_seed_(master_seed) {
  cfg_.validate();
  if (!f_ || !dataset_) throw DomainError("Generator: null net or dataset");
  if (g_.empty()) throw DomainError("Generator: empty generator list");
  for (const DenseNet* net : g_)
    if (!net || net->input_dim() != dataset_->dim() ||
        net->output_dim() != static_cast<std::size_t>(dataset_->num_classes()))
      throw ShapeError("Generator: generator net does not match dataset dimensions");
  if (cfg_.random_target_label && dataset_->num_classes() < 3)
    throw ConfigError("Generator: random_target_label needs at least 3 classes");

  // Seed pools are fixed before training starts. With no limit each class
  // exposes all of its samples; with a limit, a uniform subset of that size.
  Rng pool_rng(derive_seed(master_seed_, kPoolTag));
  seed_pools_.resize(static_cast<std::size_t>(dataset_->num_classes()));
  for (int k = 0; k < dataset_->num_classes(); ++k) {
    std::vector<int> pool = dataset_->indices_of_class(k);
    if (cfg_.seed_pool_limit > 0 &&
        static_cast<std::size_t>(cfg_.seed_pool_limit) < pool.size()) {
      pool_rng.partial_shuffle(std::span<int>(pool),
                               static_cast<std::size_t>(cfg_.seed_pool_limit));
      pool.resize(static_cast<std::size_t>(cfg_.seed_pool_limit));
    }
    seed_pools_[static_cast<std::size_t>(k)] = std::move(pool);
  }
}

Generator::Attempt Generator::attempt(std::span<const double> x0, int k0, int target,
                                      Rng& rng) const {
  const auto& counts = dataset_->class_counts();
  const TranslateResult res = translate(g_, *f_, x0, k0, target, cfg_, rng);

  // The Bernoulli draw happens unconditionally (before the threshold test) so
  // RNG consumption does not depend on the achieved loss.
  bool bernoulli_fired = false;
  if (!cfg_.disable_reject) {
    const double p = reject_probability(counts[static_cast<std::size_t>(k0)],
                                        counts[static_cast<std::size_t>(target)], cfg_.beta);
    bernoulli_fired = rng.bernoulli(p);
  }
  const bool gamma_fired = !cfg_.disable_gamma && res.final_loss > cfg_.gamma;

  Attempt out;
  out.final_loss = res.final_loss;
  out.displacement = res.displacement;
  if (gamma_fired || bernoulli_fired) {
    out.status = gamma_fired ? GenStatus::rejected_gamma : GenStatus::rejected_bernoulli;
    const auto& pool = dataset_->indices_of_class(target);
    const int idx = pool[rng.index(pool.size())];
    const auto row = dataset_->row(static_cast<std::size_t>(idx));
    out.sample.assign(row.begin(), row.end());
    out.label = target;
  } else {
    out.status = GenStatus::accepted;
    if (cfg_.clean_seed) {
      out.sample.assign(x0.begin(), x0.end());
    } else {
      out.sample = res.x;
    }
    out.label = target;
    if (cfg_.random_target_label) {
      // uniform over classes excluding the seed and target classes
      const int k_classes = dataset_->num_classes();
      int draw = static_cast<int>(rng.index(static_cast<std::size_t>(k_classes - 2)));
      for (int excluded : {std::min(k0, target), std::max(k0, target)})
        if (draw >= excluded) ++draw;
      out.label = draw;
    }
  }
  return out;
}

void Generator::generate_for_batch(Batch& batch, int epoch, int step,
                                   GenerationLog* log) const {
  const auto& counts = dataset_->class_counts();
  const double n1 = static_cast<double>(counts.front());
  const Batch original = batch;  // seeds come from the batch as it was on entry

  for (std::size_t slot = 0; slot < original.size(); ++slot) {
    const int y = original.y[slot];
    const double p =
        cfg_.gen_prob_scale * (1.0 - static_cast<double>(counts[static_cast<std::size_t>(y)]) / n1);
    if (p <= 0.0) continue;

    Rng rng(derive_seed(master_seed_, kSlotTag, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(slot)));
    if (!rng.bernoulli(p)) continue;

    GenerationOutcome outcome;
    outcome.epoch = epoch;
    outcome.step = step;
    outcome.slot = static_cast<int>(slot);
    outcome.target_class = y;

    const auto q = seed_class_distribution(counts, y, cfg_.beta);
    if (!q) {
      if (log) log->add(outcome);  // no larger class exists; keep the real sample
      continue;
    }

    int k0 = -1;
    std::vector<int> eligible;
    if (cfg_.seed_pool_limit > 0) {
      // limited pools draw seeds from the fixed subset directly
      k0 = rng.categorical(*q);
    } else {
      for (int attempt_i = 0; attempt_i < cfg_.seed_retry_budget; ++attempt_i) {
        const int candidate = rng.categorical(*q);
        eligible.clear();
        for (std::size_t j = 0; j < original.size(); ++j)
          if (original.y[j] == candidate) eligible.push_back(static_cast<int>(j));
        if (!eligible.empty()) {
          k0 = candidate;
          break;
        }
      }
      if (k0 < 0) {
        if (log) log->add(outcome);  // retry budget exhausted; slot keeps its real sample
        continue;
      }
    }
    outcome.seed_class = k0;

    std::vector<double> seed_row;
    if (cfg_.seed_pool_limit > 0) {
      const auto& pool = seed_pools_[static_cast<std::size_t>(k0)];
      const int idx = pool[rng.index(pool.size())];
      const auto row = dataset_->row(static_cast<std::size_t>(idx));
      seed_row.assign(row.begin(), row.end());
    } else {
      const int src_slot = eligible[rng.index(eligible.size())];
      const auto row = original.x.row(static_cast<std::size_t>(src_slot));
      seed_row.assign(row.begin(), row.end());
    }

    const Attempt result = attempt(seed_row, k0, y, rng);
    outcome.status = result.status;
    outcome.final_loss = result.final_loss;
    outcome.displacement = result.displacement;
    batch.x.set_row(slot, result.sample);
    batch.y[slot] = result.label;
    batch.source_index[slot] = -1;  // synthetic, or an untracked replacement draw
    if (log) log->add(outcome);
  }
}

LabeledDataset Generator::build_balanced(GenerationLog* log) const {
  const auto& counts = dataset_->class_counts();
  const int head = counts.front();
  std::size_t total = dataset_->size();
  for (int c : counts) total += static_cast<std::size_t>(head - c);

  Matrix inputs(total, dataset_->dim());
  std::vector<int> labels(total);
  for (std::size_t i = 0; i < dataset_->size(); ++i) {
    inputs.set_row(i, dataset_->row(i));
    labels[i] = dataset_->label(i);
  }

  std::size_t row = dataset_->size();
  for (int k = 1; k < dataset_->num_classes(); ++k) {
    const int deficit = head - counts[static_cast<std::size_t>(k)];
    const auto q = seed_class_distribution(counts, k, cfg_.beta);
    for (int i = 0; i < deficit; ++i, ++row) {
      Rng rng(derive_seed(master_seed_, kOfflineTag, static_cast<std::uint64_t>(k),
                          static_cast<std::uint64_t>(i)));
      GenerationOutcome outcome;
      outcome.step = i;
      outcome.slot = i;
      outcome.target_class = k;
      const int k0 = rng.categorical(*q);
      outcome.seed_class = k0;
      const auto& pool = seed_pools_[static_cast<std::size_t>(k0)];
      const int seed_idx = pool[rng.index(pool.size())];

      // The relabeling ablation is a batch-wise training ablation; here every
      // appended sample keeps label k so the output stays exactly balanced.
      Attempt result = attempt(dataset_->row(static_cast<std::size_t>(seed_idx)), k0, k, rng);
      outcome.status = result.status;
      outcome.final_loss = result.final_loss;
      outcome.displacement = result.displacement;
      inputs.set_row(row, result.sample);
      labels[row] = k;
      if (log) log->add(outcome);
    }
  }
  return LabeledDataset::from_samples(std::move(inputs), std::move(labels));
}

LabeledDataset build_balanced_dataset(const LabeledDataset& dataset, const DenseNet& f,
                                      const DenseNet& g, const M2mConfig& cfg,
                                      std::uint64_t seed, GenerationLog* log) {
  const Generator generator(&f, {&g}, &dataset, cfg, seed);
  return generator.build_balanced(log);
}

}  // namespace m2m
