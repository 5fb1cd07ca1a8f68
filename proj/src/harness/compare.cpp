#include "vtools/harness/compare.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>

namespace vtools::harness {

namespace {

void check_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0) throw std::invalid_argument("comparison needs at least one level");
  if (a.size() != b.size()) throw std::invalid_argument("comparison vectors differ in length");
}

double cell_number(const std::string& text, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("reference column '" + column + "' has non-numeric value '" + text + "'");
  }
}

}  // namespace

double pearson_r(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_pair(a, b);
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double sbb = (db * db).sum();
  if (!(sbb > 0.0)) throw DegenerateVariance("reference vector is constant; correlation undefined");
  const double saa = (da * da).sum();
  if (!(saa > 0.0)) throw DegenerateVariance("model vector is constant; correlation undefined");
  return (da * db).sum() / std::sqrt(saa * sbb);
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_pair(a, b);
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

ComparisonReport compare(const std::vector<std::string>& levels, const Eigen::VectorXd& model,
                         const Eigen::VectorXd& reference, std::string metric) {
  check_pair(model, reference);
  if (static_cast<Eigen::Index>(levels.size()) != model.size()) {
    throw std::invalid_argument("level names and metric vectors differ in length");
  }
  ComparisonReport r;
  r.metric = std::move(metric);
  r.model = model;
  r.reference = reference;
  r.rmse = rmse(model, reference);
  r.model_mean = model.mean();
  r.reference_mean = reference.mean();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    r.residuals.push_back({levels[i], model(k), reference(k), model(k) - reference(k)});
  }
  r.pearson_r = pearson_r(model, reference);
  return r;
}

std::vector<ReferenceRow> read_reference_csv(std::istream& in) {
  std::vector<ReferenceRow> rows;
  std::vector<std::string> columns;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (columns.empty()) {
      if (cells.size() < 3 || cells[0] != "level" || cells[1] != "human_solution_rate" ||
          cells[2] != "human_mean_attempts") {
        throw std::runtime_error("reference CSV header must start level,human_solution_rate,human_mean_attempts");
      }
      columns = cells;
      continue;
    }
    if (cells.size() > columns.size()) throw std::runtime_error("reference row has extra cells: " + line);
    ReferenceRow row;
    row.level = cells[0];
    row.solution_rate = cell_number(cells.at(1), columns[1]);
    row.mean_attempts = cell_number(cells.at(2), columns[2]);
    for (std::size_t c = 3; c < cells.size(); ++c) {
      if (!cells[c].empty()) row.curve.push_back(cell_number(cells[c], columns[c]));
    }
    rows.push_back(std::move(row));
  }
  if (columns.empty()) throw std::runtime_error("reference CSV has no header");
  return rows;
}

std::vector<ReferenceRow> read_reference_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference CSV " + path.string());
  return read_reference_csv(in);
}

std::optional<ReferenceRow> overall_row(const std::vector<ReferenceRow>& rows) {
  for (const auto& r : rows) {
    if (r.level == kOverallRow) return r;
  }
  return std::nullopt;
}

AlignedMetrics align(const std::vector<LevelMetrics>& model, const std::vector<ReferenceRow>& reference,
                     ssup::Variant variant) {
  std::map<std::string, const LevelMetrics*> by_level;
  for (const auto& m : model) {
    if (m.variant == variant) by_level[m.level] = &m;
  }
  AlignedMetrics out;
  std::vector<double> ms, rs, ma, ra;
  for (const auto& row : reference) {
    const auto it = by_level.find(row.level);
    if (it == by_level.end()) continue;
    out.levels.push_back(row.level);
    ms.push_back(it->second->solution_rate);
    rs.push_back(row.solution_rate);
    ma.push_back(it->second->mean_attempts);
    ra.push_back(row.mean_attempts);
  }
  auto vec = [](const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval(); };
  out.model_solution_rate = vec(ms);
  out.reference_solution_rate = vec(rs);
  out.model_mean_attempts = vec(ma);
  out.reference_mean_attempts = vec(ra);
  return out;
}

}  // namespace vtools::harness
