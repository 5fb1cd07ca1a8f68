#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vtools/ssup/agent.hpp"

namespace vtools::harness {

// curve(X-1) = fraction of runs solved within X placements, X = 1..max_attempts.
using CumulativeCurve = Eigen::VectorXd;

CumulativeCurve cumulative_curve(std::span<const ssup::EpisodeLog> logs);
CumulativeCurve cumulative_curve(std::span<const ssup::EpisodeLog> logs, int max_attempts);

// Mean height of the curve; equals the mean of run_areas().
double curve_area(const CumulativeCurve& curve);

// Per-run contribution to the curve area: (max - used + 1) / max if solved, else 0.
Eigen::VectorXd run_areas(std::span<const ssup::EpisodeLog> logs);

struct ActionPoint {
  std::uint64_t seed = 0;
  levels::Action first;
  levels::Action last;
  bool solved = false;
};

struct LevelMetrics {
  std::string level;
  ssup::Variant variant = ssup::Variant::kFull;
  int runs = 0;
  int max_attempts = 0;
  double solution_rate = 0.0;
  double mean_attempts = 0.0;  // unsolved runs count max_attempts
  CumulativeCurve curve;
  std::vector<ActionPoint> action_scatter;

  double area() const { return curve_area(curve); }
  bool operator==(const LevelMetrics&) const;
};

// Logs must be non-empty and share level, variant and max_attempts.
LevelMetrics compute_metrics(std::span<const ssup::EpisodeLog> logs);

// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

// Metrics CSV: '#' comment lines, then a header
//   level,variant,runs,max_attempts,solution_rate,mean_attempts,curve_area,cum_1..cum_N
// where N is the widest max_attempts in the table (shorter rows are padded empty).
void write_metrics_csv(std::ostream& out, std::span<const LevelMetrics> metrics);
std::vector<LevelMetrics> read_metrics_csv(std::istream& in);

// level,variant,seed,solved,first_tool,first_x,first_y,last_tool,last_x,last_y
void write_actions_csv(std::ostream& out, std::span<const LevelMetrics> metrics);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace vtools::harness
