#include "m2m/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "m2m/error.hpp"

namespace m2m {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDataTag = 0xda7a;
constexpr std::uint64_t kSplitTag = 0x5b11;
constexpr std::uint64_t kTailTag = 0x7a11;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ConfigError("unknown key \"" + key + "\" in " + context);
  }
}

DatasetSpec parse_dataset(const json& j) {
  DatasetSpec spec;
  if (!j.contains("kind")) throw ConfigError("dataset: missing \"kind\"");
  spec.kind = j.at("kind").get<std::string>();
  if (spec.kind == "gaussian_mixture") {
    check_keys(j, {"kind", "classes", "per_class", "dim", "separation"}, "dataset");
    spec.classes = j.value("classes", spec.classes);
    spec.per_class = j.value("per_class", spec.per_class);
    spec.dim = j.value("dim", spec.dim);
    spec.separation = j.value("separation", spec.separation);
  } else if (spec.kind == "two_moons") {
    check_keys(j, {"kind", "per_class", "noise"}, "dataset");
    spec.per_class = j.value("per_class", spec.per_class);
    spec.noise = j.value("noise", spec.noise);
  } else if (spec.kind == "rings") {
    check_keys(j, {"kind", "classes", "per_class", "noise"}, "dataset");
    spec.classes = j.value("classes", spec.classes);
    spec.per_class = j.value("per_class", spec.per_class);
    spec.noise = j.value("noise", spec.noise);
  } else if (spec.kind == "csv") {
    check_keys(j, {"kind", "path"}, "dataset");
    spec.csv_path = j.at("path").get<std::string>();
  } else if (spec.kind == "idx") {
    check_keys(j, {"kind", "images", "labels"}, "dataset");
    spec.idx_images = j.at("images").get<std::string>();
    spec.idx_labels = j.at("labels").get<std::string>();
  } else {
    throw ConfigError("dataset: unknown kind \"" + spec.kind + "\"");
  }
  return spec;
}

M2mConfig parse_m2m(const json& j, M2mConfig base) {
  check_keys(j,
             {"lambda", "beta", "gamma", "step_size", "steps", "noise_scale", "use_self_as_g",
              "clean_seed", "random_target_label", "disable_reject", "disable_gamma",
              "seed_pool_limit", "ensemble_size", "gen_prob_scale", "seed_retry_budget"},
             "m2m");
  base.lambda = j.value("lambda", base.lambda);
  base.beta = j.value("beta", base.beta);
  base.gamma = j.value("gamma", base.gamma);
  base.step_size = j.value("step_size", base.step_size);
  base.steps = j.value("steps", base.steps);
  base.noise_scale = j.value("noise_scale", base.noise_scale);
  base.use_self_as_g = j.value("use_self_as_g", base.use_self_as_g);
  base.clean_seed = j.value("clean_seed", base.clean_seed);
  base.random_target_label = j.value("random_target_label", base.random_target_label);
  base.disable_reject = j.value("disable_reject", base.disable_reject);
  base.disable_gamma = j.value("disable_gamma", base.disable_gamma);
  base.seed_pool_limit = j.value("seed_pool_limit", base.seed_pool_limit);
  base.ensemble_size = j.value("ensemble_size", base.ensemble_size);
  base.gen_prob_scale = j.value("gen_prob_scale", base.gen_prob_scale);
  base.seed_retry_budget = j.value("seed_retry_budget", base.seed_retry_budget);
  return base;
}

StrategyKind kind_from_string(const std::string& s) {
  if (s == "erm") return StrategyKind::erm;
  if (s == "rs") return StrategyKind::rs;
  if (s == "smote") return StrategyKind::smote;
  if (s == "rw") return StrategyKind::rw;
  if (s == "cbrw") return StrategyKind::cbrw;
  if (s == "m2m") return StrategyKind::m2m;
  throw ConfigError("unknown strategy kind \"" + s + "\"");
}

RunSpec parse_strategy(const json& j, const M2mConfig& base_m2m) {
  RunSpec spec;
  spec.m2m = base_m2m;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    spec.label = s;
    if (s == "drs") {
      spec.strategy.kind = StrategyKind::rs;
      spec.strategy.deferred = true;
    } else if (s == "drw") {
      spec.strategy.kind = StrategyKind::rw;
      spec.strategy.deferred = true;
    } else if (s == "m2m") {
      spec.strategy.kind = StrategyKind::m2m;
      spec.strategy.deferred = true;  // deferred scheduling is the default for m2m
    } else if (s == "m2m-rs") {
      spec.strategy.kind = StrategyKind::m2m;
      spec.strategy.deferred = false;
    } else {
      spec.strategy.kind = kind_from_string(s);
    }
    return spec;
  }
  if (!j.is_object()) throw ConfigError("strategies: entries must be strings or objects");
  check_keys(j, {"kind", "label", "deferred", "defer_epoch", "cbrw_beta", "smote_neighbors", "m2m"},
             "strategies entry");
  if (!j.contains("kind")) throw ConfigError("strategies: object entry missing \"kind\"");
  spec.strategy.kind = kind_from_string(j.at("kind").get<std::string>());
  spec.strategy.deferred =
      j.value("deferred", spec.strategy.kind == StrategyKind::m2m);
  spec.strategy.defer_epoch = j.value("defer_epoch", -1);
  spec.strategy.cbrw_beta = j.value("cbrw_beta", spec.strategy.cbrw_beta);
  spec.strategy.smote_neighbors = j.value("smote_neighbors", spec.strategy.smote_neighbors);
  spec.label = j.value("label", std::string(to_string(spec.strategy.kind)));
  if (j.contains("m2m")) spec.m2m = parse_m2m(j.at("m2m"), spec.m2m);
  return spec;
}

}  // namespace

int ExperimentConfig::resolved_defer_epoch() const {
  if (defer_epoch >= 0) return defer_epoch;
  return static_cast<int>(0.8 * train.epochs);
}

void ExperimentConfig::validate() const {
  train.validate();
  m2m.validate();
  if (rho != 0.0 && rho <= 1.0) throw ConfigError("imbalance: rho must be > 1");
  if (strategies.empty()) throw ConfigError("config: at least one strategy required");
  if (seeds.empty()) throw ConfigError("config: at least one seed required");
  std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) throw ConfigError("config: seeds must be distinct");
  std::set<std::string> labels;
  for (const auto& spec : strategies) {
    if (!labels.insert(spec.label).second)
      throw ConfigError("config: duplicate strategy label \"" + spec.label + "\"");
    spec.strategy.validate(train.epochs);
    spec.m2m.validate();
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"dataset", "imbalance", "split", "network", "train", "strategies", "m2m", "sweep",
              "seeds", "output_dir"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("dataset")) throw ConfigError("config: missing \"dataset\"");
  cfg.dataset = parse_dataset(j.at("dataset"));
  if (j.contains("imbalance")) {
    check_keys(j.at("imbalance"), {"rho"}, "imbalance");
    cfg.rho = j.at("imbalance").value("rho", 0.0);
  }
  if (j.contains("split")) {
    check_keys(j.at("split"), {"val_fraction", "test_per_class"}, "split");
    cfg.split.val_fraction = j.at("split").value("val_fraction", cfg.split.val_fraction);
    cfg.split.test_per_class = j.at("split").value("test_per_class", cfg.split.test_per_class);
  }
  if (j.contains("network")) {
    check_keys(j.at("network"), {"hidden"}, "network");
    cfg.train.hidden = j.at("network").value("hidden", cfg.train.hidden);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t,
               {"epochs", "batch_size", "lr", "warmup_epochs", "lr_steps", "weight_decay",
                "momentum", "defer_epoch"},
               "train");
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.schedule.base = t.value("lr", cfg.train.schedule.base);
    cfg.train.schedule.warmup_epochs = t.value("warmup_epochs", cfg.train.schedule.warmup_epochs);
    if (t.contains("lr_steps")) {
      cfg.train.schedule.decay_steps.clear();
      for (const auto& step : t.at("lr_steps")) {
        if (!step.is_array() || step.size() != 2)
          throw ConfigError("train: lr_steps entries must be [epoch, factor]");
        cfg.train.schedule.decay_steps.emplace_back(step.at(0).get<int>(),
                                                    step.at(1).get<double>());
      }
    }
    cfg.train.weight_decay = t.value("weight_decay", cfg.train.weight_decay);
    cfg.train.momentum = t.value("momentum", cfg.train.momentum);
    cfg.defer_epoch = t.value("defer_epoch", cfg.defer_epoch);
  }
  if (j.contains("m2m")) cfg.m2m = parse_m2m(j.at("m2m"), cfg.m2m);
  if (!j.contains("strategies")) throw ConfigError("config: missing \"strategies\"");
  for (const auto& entry : j.at("strategies"))
    cfg.strategies.push_back(parse_strategy(entry, cfg.m2m));
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"lambda", "beta", "gamma"}, "sweep");
    if (s.contains("lambda")) cfg.sweep_grid.lambda = s.at("lambda").get<std::vector<double>>();
    if (s.contains("beta")) cfg.sweep_grid.beta = s.at("beta").get<std::vector<double>>();
    if (s.contains("gamma")) cfg.sweep_grid.gamma = s.at("gamma").get<std::vector<double>>();
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

  // resolve per-strategy defer epochs against the schedule
  for (auto& spec : cfg.strategies)
    if (spec.strategy.deferred && spec.strategy.defer_epoch < 0)
      spec.strategy.defer_epoch = cfg.resolved_defer_epoch();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

json m2m_to_json(const M2mConfig& m) {
  return json{{"lambda", m.lambda},
              {"beta", m.beta},
              {"gamma", m.gamma},
              {"step_size", m.step_size},
              {"steps", m.steps},
              {"noise_scale", m.noise_scale},
              {"use_self_as_g", m.use_self_as_g},
              {"clean_seed", m.clean_seed},
              {"random_target_label", m.random_target_label},
              {"disable_reject", m.disable_reject},
              {"disable_gamma", m.disable_gamma},
              {"seed_pool_limit", m.seed_pool_limit},
              {"ensemble_size", m.ensemble_size},
              {"gen_prob_scale", m.gen_prob_scale},
              {"seed_retry_budget", m.seed_retry_budget}};
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  json dataset{{"kind", cfg.dataset.kind}};
  if (cfg.dataset.kind == "gaussian_mixture") {
    dataset["classes"] = cfg.dataset.classes;
    dataset["per_class"] = cfg.dataset.per_class;
    dataset["dim"] = cfg.dataset.dim;
    dataset["separation"] = cfg.dataset.separation;
  } else if (cfg.dataset.kind == "two_moons") {
    dataset["per_class"] = cfg.dataset.per_class;
    dataset["noise"] = cfg.dataset.noise;
  } else if (cfg.dataset.kind == "rings") {
    dataset["classes"] = cfg.dataset.classes;
    dataset["per_class"] = cfg.dataset.per_class;
    dataset["noise"] = cfg.dataset.noise;
  } else if (cfg.dataset.kind == "csv") {
    dataset["path"] = cfg.dataset.csv_path.string();
  } else if (cfg.dataset.kind == "idx") {
    dataset["images"] = cfg.dataset.idx_images.string();
    dataset["labels"] = cfg.dataset.idx_labels.string();
  }
  json strategies = json::array();
  for (const auto& spec : cfg.strategies) {
    strategies.push_back(json{{"kind", to_string(spec.strategy.kind)},
                              {"label", spec.label},
                              {"deferred", spec.strategy.deferred},
                              {"defer_epoch", spec.strategy.defer_epoch},
                              {"cbrw_beta", spec.strategy.cbrw_beta},
                              {"smote_neighbors", spec.strategy.smote_neighbors},
                              {"m2m", m2m_to_json(spec.m2m)}});
  }
  json lr_steps = json::array();
  for (const auto& [epoch, factor] : cfg.train.schedule.decay_steps)
    lr_steps.push_back(json::array({epoch, factor}));
  json j{{"dataset", dataset},
         {"imbalance", {{"rho", cfg.rho}}},
         {"split", {{"val_fraction", cfg.split.val_fraction},
                    {"test_per_class", cfg.split.test_per_class}}},
         {"network", {{"hidden", cfg.train.hidden}}},
         {"train",
          {{"epochs", cfg.train.epochs},
           {"batch_size", cfg.train.batch_size},
           {"lr", cfg.train.schedule.base},
           {"warmup_epochs", cfg.train.schedule.warmup_epochs},
           {"lr_steps", lr_steps},
           {"weight_decay", cfg.train.weight_decay},
           {"momentum", cfg.train.momentum},
           {"defer_epoch", cfg.resolved_defer_epoch()}}},
         {"m2m", m2m_to_json(cfg.m2m)},
         {"strategies", strategies},
         {"seeds", cfg.seeds},
         {"output_dir", cfg.output_dir.string()}};
  return j.dump(2);
}

SplitResult prepare_trial_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  LabeledDataset full;
  const auto& d = cfg.dataset;
  const std::uint64_t data_seed = derive_seed(seed, kDataTag);
  if (d.kind == "gaussian_mixture") {
    full = gaussian_mixture(d.classes, d.per_class, d.dim, d.separation, data_seed);
  } else if (d.kind == "two_moons") {
    full = two_moons(d.per_class, d.noise, data_seed);
  } else if (d.kind == "rings") {
    full = concentric_rings(d.classes, d.per_class, d.noise, data_seed);
  } else if (d.kind == "csv") {
    full = read_csv(d.csv_path);
  } else if (d.kind == "idx") {
    full = load_idx(d.idx_images, d.idx_labels);
  } else {
    throw ConfigError("dataset: unknown kind \"" + d.kind + "\"");
  }
  SplitResult s = split(full, cfg.split.val_fraction, cfg.split.test_per_class,
                        derive_seed(seed, kSplitTag));
  if (cfg.rho > 1.0) s.train = make_long_tail(s.train, cfg.rho, derive_seed(seed, kTailTag));
  return s;
}

TrialResult run_single(const ExperimentConfig& cfg, const RunSpec& spec, std::uint64_t seed,
                       const std::filesystem::path& run_dir,
                       const std::filesystem::path& cache_dir) {
  const SplitResult data = prepare_trial_data(cfg, seed);

  TrialResult result;
  DenseNet net;
  GenerationLog log;
  if (spec.strategy.kind == StrategyKind::m2m) {
    M2mTrainResult m2m_result =
        train_m2m(data.train, data.test, spec.strategy, cfg.train, spec.m2m, seed, cache_dir);
    net = std::move(m2m_result.net);
    log = std::move(m2m_result.log);
    result.test = std::move(m2m_result.report);
  } else {
    TrainResult trained = train_with_strategy(data.train, spec.strategy, cfg.train, seed);
    net = std::move(trained.net);
    result.test = evaluate(net, data.test, data.train.class_counts());
  }
  validate_report(result.test);
  if (data.val.size() > 0) result.val = evaluate(net, data.val, data.train.class_counts());

  if (!run_dir.empty()) {
    std::filesystem::create_directories(run_dir);
    write_report_json(result.test, run_dir / "report.json");
    write_fp_curve_csv(result.test, run_dir / "fp_curve.csv");
    if (spec.strategy.kind == StrategyKind::m2m) log.write_csv(run_dir / "genlog.csv");
    net.save(run_dir / "f.net");
  }
  return result;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

namespace {

void write_results(const std::vector<RunRow>& rows, const std::filesystem::path& dir) {
  std::ofstream csv(dir / "results.csv");
  if (!csv) throw IoError("cannot open results.csv for writing");
  csv << "label,trials,bacc_mean,bacc_std,gm_mean,gm_std,major_mean,minor_mean,failed,error\n";
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    csv << buf;
  };
  for (const auto& r : rows) {
    csv << r.label << ',' << r.trials << ',';
    emit(r.bacc_mean); csv << ',';
    emit(r.bacc_std); csv << ',';
    emit(r.gm_mean); csv << ',';
    emit(r.gm_std); csv << ',';
    emit(r.major_mean); csv << ',';
    emit(r.minor_mean); csv << ',';
    csv << (r.failed ? 1 : 0) << ',' << r.error << '\n';
  }

  json j = json::array();
  for (const auto& r : rows) {
    j.push_back(json{{"label", r.label},
                     {"trials", r.trials},
                     {"failed", r.failed},
                     {"error", r.error},
                     {"bacc_mean", r.bacc_mean},
                     {"bacc_std", r.bacc_std},
                     {"gm_mean", r.gm_mean},
                     {"gm_std", r.gm_std},
                     {"major_mean", r.major_mean},
                     {"minor_mean", r.minor_mean}});
  }
  std::ofstream out(dir / "results.json");
  if (!out) throw IoError("cannot open results.json for writing");
  out << j.dump(2) << '\n';
}

}  // namespace

std::vector<RunRow> run(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.output_dir.empty()) throw ConfigError("config: output_dir required for run");
  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream snapshot(cfg.output_dir / "config.json");
    snapshot << config_to_json(cfg) << '\n';
  }
  const std::filesystem::path cache_dir = cfg.output_dir / "gcache";

  std::vector<RunRow> rows;
  for (const auto& spec : cfg.strategies) {
    RunRow row;
    row.label = spec.label;
    std::vector<double> baccs, gms, majors, minors;
    for (std::uint64_t seed : cfg.seeds) {
      const auto run_dir = cfg.output_dir / spec.label / ("seed_" + std::to_string(seed));
      try {
        const TrialResult trial = run_single(cfg, spec, seed, run_dir, cache_dir);
        baccs.push_back(trial.test.bacc);
        gms.push_back(trial.test.gm);
        majors.push_back(trial.test.major_bacc);
        minors.push_back(trial.test.minor_bacc);
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        break;
      }
    }
    row.trials = static_cast<int>(baccs.size());
    if (!row.failed) {
      std::tie(row.bacc_mean, row.bacc_std) = mean_std(baccs);
      std::tie(row.gm_mean, row.gm_std) = mean_std(gms);
      row.major_mean = mean_std(majors).first;
      row.minor_mean = mean_std(minors).first;
    }
    rows.push_back(std::move(row));
  }
  write_results(rows, cfg.output_dir);
  return rows;
}

SweepChoice sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.split.val_fraction <= 0.0)
    throw ConfigError("sweep: a validation split is required (val_fraction > 0)");
  const std::filesystem::path cache_dir =
      cfg.output_dir.empty() ? std::filesystem::path{} : cfg.output_dir / "gcache";
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);

  RunSpec spec;
  spec.label = "m2m";
  spec.strategy.kind = StrategyKind::m2m;
  spec.strategy.deferred = true;
  spec.strategy.defer_epoch = cfg.resolved_defer_epoch();
  spec.m2m = cfg.m2m;

  SweepChoice best;
  bool have_best = false;
  std::vector<std::array<double, 4>> table;  // lambda, beta, gamma, val bacc
  for (double lambda : cfg.sweep_grid.lambda) {
    for (double beta : cfg.sweep_grid.beta) {
      for (double gamma : cfg.sweep_grid.gamma) {
        spec.m2m.lambda = lambda;
        spec.m2m.beta = beta;
        spec.m2m.gamma = gamma;
        std::vector<double> val_baccs;
        for (std::uint64_t seed : cfg.seeds) {
          const TrialResult trial = run_single(cfg, spec, seed, {}, cache_dir);
          if (!trial.val) throw ConfigError("sweep: validation split is empty");
          val_baccs.push_back(trial.val->bacc);
        }
        const double mean = mean_std(val_baccs).first;
        table.push_back({lambda, beta, gamma, mean});
        // strict improvement keeps the earliest (smallest lambda, beta, gamma)
        if (!have_best || mean > best.val_bacc_mean) {
          best = {lambda, beta, gamma, mean};
          have_best = true;
        }
      }
    }
  }
  if (!cfg.output_dir.empty()) {
    std::ofstream out(cfg.output_dir / "sweep_results.csv");
    out << "lambda,beta,gamma,val_bacc_mean\n";
    char buf[64];
    for (const auto& row : table) {
      for (int i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[static_cast<std::size_t>(i)]);
        out << buf << (i == 3 ? '\n' : ',');
      }
    }
    json j{{"lambda", best.lambda},
           {"beta", best.beta},
           {"gamma", best.gamma},
           {"val_bacc_mean", best.val_bacc_mean}};
    std::ofstream bj(cfg.output_dir / "sweep_best.json");
    bj << j.dump(2) << '\n';
  }
  return best;
}

std::vector<RunRow> collect_rows(const std::filesystem::path& results_json) {
  std::ifstream in(results_json);
  if (!in) throw IoError("cannot open " + results_json.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed results file: " + std::string(e.what()));
  }
  std::vector<RunRow> rows;
  for (const auto& entry : j) {
    RunRow row;
    row.label = entry.at("label").get<std::string>();
    row.trials = entry.at("trials").get<int>();
    row.failed = entry.at("failed").get<bool>();
    row.error = entry.at("error").get<std::string>();
    row.bacc_mean = entry.at("bacc_mean").get<double>();
    row.bacc_std = entry.at("bacc_std").get<double>();
    row.gm_mean = entry.at("gm_mean").get<double>();
    row.gm_std = entry.at("gm_std").get<double>();
    row.major_mean = entry.at("major_mean").get<double>();
    row.minor_mean = entry.at("minor_mean").get<double>();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_table(std::span<const RunRow> rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %7s %16s %16s %8s %8s\n", "strategy", "trials",
                "bACC", "GM", "major", "minor");
  out << line;
  out << std::string(76, '-') << '\n';
  for (const auto& r : rows) {
    if (r.failed) {
      std::snprintf(line, sizeof(line), "%-16s FAILED: %s\n", r.label.c_str(), r.error.c_str());
      out << line;
      continue;
    }
    std::snprintf(line, sizeof(line), "%-16s %7d %7.2f +- %5.2f %7.2f +- %5.2f %8.2f %8.2f\n",
                  r.label.c_str(), r.trials, 100.0 * r.bacc_mean, 100.0 * r.bacc_std,
                  100.0 * r.gm_mean, 100.0 * r.gm_std, 100.0 * r.major_mean,
                  100.0 * r.minor_mean);
    out << line;
  }
  return out.str();
}

void generate_data(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("config: output_dir required for gen-data");
  std::filesystem::create_directories(cfg.output_dir);
  const SplitResult data = prepare_trial_data(cfg, cfg.seeds.front());
  write_csv(data.train, cfg.output_dir / "train.csv");
  if (data.val.size() > 0) write_csv(data.val, cfg.output_dir / "val.csv");
  write_csv(data.test, cfg.output_dir / "test.csv");
}

}  // namespace m2m
