#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefgrad/config.hpp"
#include "prefgrad/optimizer.hpp"

namespace prefgrad {

/// Everything cmd_run writes, plus the raw optimizer result for callers that
/// keep going (sweeps, tests).
struct RunArtifacts {
  OptResult result;
  std::string metrics_csv_path;
  std::string result_json_path;
  std::string resolved_config_path;
  // Populated when eval_every > 0 (exact-oracle finite differences).
  std::optional<double> stationarity_final;
  std::optional<double> stationarity_theta_r;
};

/// Runs the configured experiment and writes metrics.csv, result.json, and
/// resolved_config.json into out_dir (created if needed). metrics.csv is
/// byte-identical across runs of the same resolved config and seed while
/// timing stays off; with timing on, the wall_ms column carries real
/// wall-clock times and byte-identity is forfeited.
RunArtifacts run_experiment(const ExperimentConfig& cfg,
                            const std::string& out_dir);

/// CLI entry points. Each returns a process exit code: 0 on success (for
/// diagnose, additionally only when every line item passes), nonzero on
/// schema violations, unknown names, or infeasible oracles.
int cmd_run(const std::string& config_path, const std::string& out_dir);
int cmd_diagnose(const std::string& check,
                 const std::optional<std::string>& config_path,
                 const std::string& out_dir);
int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<std::string>& values, int num_seeds,
              const std::string& out_dir);

/// Names cmd_diagnose accepts, in display order.
const std::vector<std::string>& diagnose_check_names();

}  // namespace prefgrad
