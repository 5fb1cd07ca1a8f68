#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vtools/harness/metrics.hpp"
#include "vtools/levels/level.hpp"
#include "vtools/ssup/agent.hpp"

namespace vtools::harness {

struct ExperimentConfig {
  std::filesystem::path level_dir;
  std::vector<std::string> level_names;  // empty: every level in level_dir
  bool include_calibration = false;
  std::vector<ssup::Variant> variants{ssup::kAllVariants.begin(), ssup::kAllVariants.end()};
  int runs = 250;
  std::uint64_t base_seed = 0;
  ssup::SsupConfig agent;
  std::optional<std::filesystem::path> output_dir;
  int threads = 1;

  void validate() const;
};

std::uint64_t episode_seed(std::uint64_t base_seed, std::string_view level, ssup::Variant variant, int run);

using EpisodeKey = std::pair<std::string, ssup::Variant>;

struct ExperimentResult {
  std::vector<LevelMetrics> metrics;  // level order, then variant order
  std::map<EpisodeKey, std::vector<ssup::EpisodeLog>> logs;
};

// Loads and filters levels; every load error surfaces before any episode runs.
std::vector<levels::LevelSpec> select_levels(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<levels::LevelSpec>& levels);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Output layout: metrics.csv, actions.csv, episodes/<level>__<variant>.jsonl, curves/<level>.svg
void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result);
std::filesystem::path episode_path(const std::filesystem::path& dir, const std::string& level, ssup::Variant variant);

// Rebuilds metrics from the persisted episode files of an output directory.
std::vector<LevelMetrics> recompute_metrics(const std::filesystem::path& dir);

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

// "epsilon=0.0:0.3:0.05" (inclusive range) or "n_sims=1,4,16".
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepRow {
  std::vector<double> point;  // one value per axis
  ssup::Variant variant = ssup::Variant::kFull;
  double solution_rate = 0.0;  // averaged over levels
  double mean_attempts = 0.0;
  double curve_area = 0.0;
};

// One row per grid point and variant, grid in row-major axis order.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<SweepAxis>& axes);
void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

struct BootstrapResult {
  double difference = 0.0;  // mean suite area of a minus b
  double p_value = 1.0;     // fraction of resamples with difference <= 0
};

// Resamples runs within each level independently for both arms.
BootstrapResult bootstrap_area_difference(const std::vector<Eigen::VectorXd>& a_runs,
                                          const std::vector<Eigen::VectorXd>& b_runs, int resamples,
                                          std::uint64_t seed);

}  // namespace vtools::harness
