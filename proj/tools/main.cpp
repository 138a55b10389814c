// Command-line front end: run experiments, sweep m2m hyperparameters,
// re-render result tables, and export datasets.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "m2m/error.hpp"
#include "m2m/harness.hpp"

namespace {

int report_error(const std::exception& e) {
  // machine-readable error record on stderr
  nlohmann::json j{{"error", "run_failed"}, {"message", e.what()}};
  std::cerr << j.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imbalanced-classification lab: major-to-minor over-sampling and baselines"};
  app.require_subcommand(1);

  std::string config_path;
  std::string report_dir;

  auto* run_cmd = app.add_subcommand("run", "Train every configured strategy and print the result table");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search lambda/beta/gamma by validation bACC");
  sweep_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* report_cmd = app.add_subcommand("report", "Re-render the table from a previous run directory");
  report_cmd->add_option("dir", report_dir, "run output directory")->required();

  auto* gen_cmd = app.add_subcommand("gen-data", "Export the configured dataset splits as CSV");
  gen_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const m2m::ExperimentConfig cfg = m2m::load_config(config_path);
      const auto rows = m2m::run(cfg);
      std::cout << m2m::render_table(rows);
      std::cout << "results written to " << cfg.output_dir.string() << std::endl;
      for (const auto& row : rows) {
        if (!row.failed) continue;
        nlohmann::json j{{"error", "strategy_failed"}, {"strategy", row.label},
                         {"message", row.error}};
        std::cerr << j.dump() << std::endl;
        return 1;
      }
    } else if (sweep_cmd->parsed()) {
      const m2m::ExperimentConfig cfg = m2m::load_config(config_path);
      const m2m::SweepChoice best = m2m::sweep(cfg);
      nlohmann::json j{{"lambda", best.lambda},
                       {"beta", best.beta},
                       {"gamma", best.gamma},
                       {"val_bacc_mean", best.val_bacc_mean}};
      std::cout << j.dump(2) << std::endl;
    } else if (report_cmd->parsed()) {
      const auto rows = m2m::collect_rows(std::filesystem::path(report_dir) / "results.json");
      std::cout << m2m::render_table(rows);
    } else if (gen_cmd->parsed()) {
      const m2m::ExperimentConfig cfg = m2m::load_config(config_path);
      m2m::generate_data(cfg);
      std::cout << "datasets written to " << cfg.output_dir.string() << std::endl;
    }
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return 0;
}
