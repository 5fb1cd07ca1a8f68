#include "vtools/harness/metrics.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vtools::harness {

namespace {

void check_homogeneous(std::span<const ssup::EpisodeLog> logs) {
  if (logs.empty()) throw std::invalid_argument("metrics need at least one episode");
  for (const auto& log : logs) {
    if (log.level != logs.front().level) {
      throw std::invalid_argument("episodes mix levels '" + logs.front().level + "' and '" + log.level + "'");
    }
  }
}

double parse_number(const std::string& text, const char* what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::runtime_error(std::string("bad ") + what + " value '" + text + "'");
  }
  return v;
}

}  // namespace

CumulativeCurve cumulative_curve(std::span<const ssup::EpisodeLog> logs) {
  check_homogeneous(logs);
  return cumulative_curve(logs, logs.front().config.max_attempts);
}

CumulativeCurve cumulative_curve(std::span<const ssup::EpisodeLog> logs, int max_attempts) {
  check_homogeneous(logs);
  CumulativeCurve curve = CumulativeCurve::Zero(max_attempts);
  for (const auto& log : logs) {
    if (log.solved) curve.tail(max_attempts - log.attempts_used() + 1).array() += 1.0;
  }
  return curve / static_cast<double>(logs.size());
}

double curve_area(const CumulativeCurve& curve) { return curve.size() ? curve.mean() : 0.0; }

Eigen::VectorXd run_areas(std::span<const ssup::EpisodeLog> logs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(logs.size()));
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    const int cap = log.config.max_attempts;
    out(static_cast<Eigen::Index>(i)) = log.solved ? static_cast<double>(cap - log.attempts_used() + 1) / cap : 0.0;
  }
  return out;
}

bool LevelMetrics::operator==(const LevelMetrics& o) const {
  if (level != o.level || variant != o.variant || runs != o.runs || max_attempts != o.max_attempts ||
      solution_rate != o.solution_rate || mean_attempts != o.mean_attempts || curve.size() != o.curve.size() ||
      curve != o.curve || action_scatter.size() != o.action_scatter.size()) {
    return false;
  }
  for (std::size_t i = 0; i < action_scatter.size(); ++i) {
    const auto& a = action_scatter[i];
    const auto& b = o.action_scatter[i];
    if (a.seed != b.seed || !(a.first == b.first) || !(a.last == b.last) || a.solved != b.solved) return false;
  }
  return true;
}

LevelMetrics compute_metrics(std::span<const ssup::EpisodeLog> logs) {
  check_homogeneous(logs);
  const auto& head = logs.front();
  LevelMetrics m;
  m.level = head.level;
  m.variant = head.variant;
  m.runs = static_cast<int>(logs.size());
  m.max_attempts = head.config.max_attempts;
  int solved = 0;
  double attempts = 0.0;
  for (const auto& log : logs) {
    if (log.variant != head.variant || log.config.max_attempts != m.max_attempts) {
      throw std::invalid_argument("episodes of level '" + head.level + "' mix variants or attempt caps");
    }
    solved += log.solved;
    attempts += log.solved ? log.attempts_used() : m.max_attempts;
    if (!log.attempts.empty()) {
      m.action_scatter.push_back({log.seed, log.attempts.front().action, log.attempts.back().action, log.solved});
    }
  }
  m.solution_rate = static_cast<double>(solved) / m.runs;
  m.mean_attempts = attempts / m.runs;
  m.curve = cumulative_curve(logs, m.max_attempts);
  return m;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_metrics_csv(std::ostream& out, std::span<const LevelMetrics> metrics) {
  int width = 0;
  for (const auto& m : metrics) width = std::max(width, static_cast<int>(m.curve.size()));
  out << "# vtools-metrics/1\n"
         "# mean_attempts counts every unsolved run at max_attempts\n"
         "# cum_X = fraction of runs solved within X placements; curve_area = mean of cum_X\n"
         "level,variant,runs,max_attempts,solution_rate,mean_attempts,curve_area";
  for (int x = 1; x <= width; ++x) out << ",cum_" << x;
  out << '\n';
  for (const auto& m : metrics) {
    out << m.level << ',' << ssup::to_string(m.variant) << ',' << m.runs << ',' << m.max_attempts << ','
        << format_number(m.solution_rate) << ',' << format_number(m.mean_attempts) << ','
        << format_number(m.area());
    for (int x = 0; x < width; ++x) {
      out << ',';
      if (x < m.curve.size()) out << format_number(m.curve(x));
    }
    out << '\n';
  }
}

std::vector<LevelMetrics> read_metrics_csv(std::istream& in) {
  std::vector<LevelMetrics> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (!header) {
      if (cells.size() < 7 || cells[0] != "level" || cells[4] != "solution_rate") {
        throw std::runtime_error("metrics CSV header not recognised: " + line);
      }
      header = true;
      continue;
    }
    if (cells.size() < 7) throw std::runtime_error("short metrics row: " + line);
    LevelMetrics m;
    m.level = cells[0];
    m.variant = ssup::parse_variant(cells[1]);
    m.runs = static_cast<int>(parse_number(cells[2], "runs"));
    m.max_attempts = static_cast<int>(parse_number(cells[3], "max_attempts"));
    m.solution_rate = parse_number(cells[4], "solution_rate");
    m.mean_attempts = parse_number(cells[5], "mean_attempts");
    m.curve = CumulativeCurve::Zero(m.max_attempts);
    for (int x = 0; x < m.max_attempts && 7 + x < static_cast<int>(cells.size()); ++x) {
      m.curve(x) = parse_number(cells[7 + x], "cum");
    }
    out.push_back(std::move(m));
  }
  if (!header) throw std::runtime_error("metrics CSV has no header");
  return out;
}

void write_actions_csv(std::ostream& out, std::span<const LevelMetrics> metrics) {
  out << "level,variant,seed,solved,first_tool,first_x,first_y,last_tool,last_x,last_y\n";
  for (const auto& m : metrics) {
    for (const auto& p : m.action_scatter) {
      out << m.level << ',' << ssup::to_string(m.variant) << ',' << p.seed << ',' << (p.solved ? 1 : 0) << ','
          << p.first.tool << ',' << format_number(p.first.position.x()) << ','
          << format_number(p.first.position.y()) << ',' << p.last.tool << ','
          << format_number(p.last.position.x()) << ',' << format_number(p.last.position.y()) << '\n';
    }
  }
}

}  // namespace vtools::harness
