// Command-line front end: run experiments from JSON configs, validate the
// statistical machinery, and sweep hyperparameter axes.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prefgrad/experiment.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "prefgrad: zeroth-order policy optimization from pairwise preference "
      "feedback"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  CLI::App* run = app.add_subcommand(
      "run", "Run one experiment from a JSON config");
  run->add_option("--config", run_config, "Experiment config (JSON)")
      ->required();
  run->add_option("--out", run_out, "Output directory")->required();

  std::string diag_check, diag_out;
  std::string diag_config;
  std::string check_help = "Check name, one of:";
  for (const std::string& name : prefgrad::diagnose_check_names()) {
    check_help += " " + name;
  }
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Validate one statistical property suite");
  diagnose->add_option("--check", diag_check, check_help)->required();
  diagnose->add_option("--config", diag_config,
                       "Optional experiment config supplying the env, "
                       "policy, link, and constants (bundled fixtures "
                       "otherwise)");
  diagnose->add_option("--out", diag_out, "Output directory")->required();

  std::string sweep_config, sweep_axis, sweep_values, sweep_out;
  int sweep_seeds = 1;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Grid of runs along one axis, several seeds each");
  sweep->add_option("--config", sweep_config, "Base experiment config (JSON)")
      ->required();
  sweep->add_option("--axis", sweep_axis, "Axis to sweep: T, M, N, or K")
      ->required();
  sweep->add_option("--values", sweep_values,
                    "Comma-separated integer axis values")
      ->required();
  sweep->add_option("--seeds", sweep_seeds,
                    "Number of consecutive seeds, starting at the config "
                    "seed")
      ->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return prefgrad::cmd_run(run_config, run_out);
  }
  if (diagnose->parsed()) {
    std::optional<std::string> config;
    if (!diag_config.empty()) config = diag_config;
    return prefgrad::cmd_diagnose(diag_check, config, diag_out);
  }
  return prefgrad::cmd_sweep(sweep_config, sweep_axis,
                             split_commas(sweep_values), sweep_seeds,
                             sweep_out);
}
