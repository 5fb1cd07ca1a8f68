#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vtools/harness/metrics.hpp"

namespace vtools::harness {

class DegenerateVariance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double pearson_r(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Residual {
  std::string level;
  double model = 0.0;
  double reference = 0.0;
  double residual = 0.0;  // model - reference
};

struct ComparisonReport {
  std::string metric;
  Eigen::VectorXd model;
  Eigen::VectorXd reference;
  double pearson_r = 0.0;
  double rmse = 0.0;
  double model_mean = 0.0;
  double reference_mean = 0.0;
  std::vector<Residual> residuals;
};

// Throws invalid_argument for empty or misaligned input and DegenerateVariance
// when the reference is constant.
ComparisonReport compare(const std::vector<std::string>& levels, const Eigen::VectorXd& model,
                         const Eigen::VectorXd& reference, std::string metric = {});

// Reference CSV ("vtools-reference/1"): '#' comment lines, then
//   level,human_solution_rate,human_mean_attempts[,cum_1..cum_N]
// The reserved level name "__overall__" carries suite-wide aggregates.
struct ReferenceRow {
  std::string level;
  double solution_rate = 0.0;
  double mean_attempts = 0.0;
  std::vector<double> curve;
};

inline constexpr const char* kOverallRow = "__overall__";

std::vector<ReferenceRow> read_reference_csv(std::istream& in);
std::vector<ReferenceRow> read_reference_csv(const std::filesystem::path& path);
std::optional<ReferenceRow> overall_row(const std::vector<ReferenceRow>& rows);

// Aligns model metrics (one variant) with reference rows by level name.
struct AlignedMetrics {
  std::vector<std::string> levels;
  Eigen::VectorXd model_solution_rate, reference_solution_rate;
  Eigen::VectorXd model_mean_attempts, reference_mean_attempts;
};

AlignedMetrics align(const std::vector<LevelMetrics>& model, const std::vector<ReferenceRow>& reference,
                     ssup::Variant variant);

}  // namespace vtools::harness
