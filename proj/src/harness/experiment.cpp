#include "vtools/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "vtools/harness/plot.hpp"
#include "vtools/ssup/episode_io.hpp"

namespace vtools::harness {

void ExperimentConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (variants.empty()) throw std::invalid_argument("at least one variant is required");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  agent.validate();
}

std::uint64_t episode_seed(std::uint64_t base_seed, std::string_view level, ssup::Variant variant, int run) {
  return derive_seed(base_seed, hash_name(level), static_cast<std::uint64_t>(variant),
                     static_cast<std::uint64_t>(run));
}

std::vector<levels::LevelSpec> select_levels(const ExperimentConfig& cfg) {
  auto all = levels::load_level_dir(cfg.level_dir);
  if (cfg.level_names.empty()) {
    if (!cfg.include_calibration) {
      std::erase_if(all, [](const levels::LevelSpec& l) { return l.category == "calibration"; });
    }
    if (all.empty()) throw std::runtime_error("no levels selected from " + cfg.level_dir.string());
    return all;
  }
  std::vector<levels::LevelSpec> out;
  for (const auto& name : cfg.level_names) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& l) { return l.name == name; });
    if (it == all.end()) throw std::runtime_error("level '" + name + "' not found in " + cfg.level_dir.string());
    out.push_back(*it);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<levels::LevelSpec>& levels) {
  cfg.validate();
  const std::size_t per_level = cfg.variants.size() * static_cast<std::size_t>(cfg.runs);
  const std::size_t jobs = levels.size() * per_level;
  std::vector<ssup::EpisodeLog> logs(jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const auto& level = levels[j / per_level];
      const auto variant = cfg.variants[(j % per_level) / cfg.runs];
      const int run = static_cast<int>(j % cfg.runs);
      try {
        logs[j] = ssup::run_episode(level, cfg.agent, variant, episode_seed(cfg.base_seed, level.name, variant, run));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };
  const int n_threads = static_cast<int>(std::min<std::size_t>(cfg.threads, std::max<std::size_t>(jobs, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
      const auto first = logs.begin() + static_cast<std::ptrdiff_t>(l * per_level + v * cfg.runs);
      std::vector<ssup::EpisodeLog> group(first, first + cfg.runs);
      result.metrics.push_back(compute_metrics(group));
      result.logs.emplace(EpisodeKey{levels[l].name, cfg.variants[v]}, std::move(group));
    }
  }
  if (cfg.output_dir) write_outputs(*cfg.output_dir, result);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, select_levels(cfg));
}

std::filesystem::path episode_path(const std::filesystem::path& dir, const std::string& level, ssup::Variant variant) {
  return dir / "episodes" / (level + "__" + std::string(ssup::to_string(variant)) + ".jsonl");
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::filesystem::create_directories(dir / "episodes");
  std::filesystem::create_directories(dir / "curves");
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics_csv(out, result.metrics);
  }
  {
    auto out = open_out(dir / "actions.csv");
    write_actions_csv(out, result.metrics);
  }
  for (const auto& [key, logs] : result.logs) {
    auto out = open_out(episode_path(dir, key.first, key.second));
    for (const auto& log : logs) ssup::write_episode(out, log);
  }
  std::vector<std::string> names;
  for (const auto& m : result.metrics) {
    if (names.empty() || names.back() != m.level) names.push_back(m.level);
  }
  for (const auto& name : names) {
    std::vector<LevelMetrics> rows;
    for (const auto& m : result.metrics) {
      if (m.level == name) rows.push_back(m);
    }
    auto out = open_out(dir / "curves" / (name + ".svg"));
    write_curves_svg(out, name, rows);
  }
}

std::vector<LevelMetrics> recompute_metrics(const std::filesystem::path& dir) {
  // metrics.csv fixes the row order; episodes supply the data
  std::ifstream csv(dir / "metrics.csv");
  if (!csv) throw std::runtime_error("no metrics.csv in " + dir.string());
  std::vector<LevelMetrics> out;
  for (const auto& row : read_metrics_csv(csv)) {
    const auto logs = ssup::read_episodes(episode_path(dir, row.level, row.variant));
    out.push_back(compute_metrics(logs));
  }
  return out;
}

SweepAxis parse_sweep_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument("sweep axis must look like name=start:stop:step or name=v1,v2");
  }
  SweepAxis axis{std::string(text.substr(0, eq)), {}};
  const std::string spec(text.substr(eq + 1));
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad number '" + s + "' in sweep axis " + axis.name);
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t from = 0;
    for (std::size_t colon; (colon = spec.find(':', from)) != std::string::npos; from = colon + 1) {
      parts.push_back(spec.substr(from, colon - from));
    }
    parts.push_back(spec.substr(from));
    if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step in " + axis.name);
    const double start = num(parts[0]);
    const double stop = num(parts[1]);
    const double step = num(parts[2]);
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("range needs step > 0 and stop >= start");
    const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= n; ++i) axis.values.push_back(start + i * step);
  } else {
    for (const auto& cell : split_csv_line(spec)) axis.values.push_back(num(cell));
  }
  return axis;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<SweepAxis>& axes) {
  const auto levels = select_levels(cfg);
  std::size_t points = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) throw std::invalid_argument("sweep axis " + a.name + " has no values");
    points *= a.values.size();
  }
  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points; ++p) {
    ExperimentConfig point_cfg = cfg;
    point_cfg.output_dir.reset();
    std::vector<double> point(axes.size());
    std::size_t rest = p;
    for (std::size_t a = axes.size(); a-- > 0;) {
      point[a] = axes[a].values[rest % axes[a].values.size()];
      rest /= axes[a].values.size();
      ssup::set_parameter(point_cfg.agent, axes[a].name, point[a]);
    }
    const auto result = run_experiment(point_cfg, levels);
    for (const auto variant : cfg.variants) {
      SweepRow row{point, variant, 0.0, 0.0, 0.0};
      int n = 0;
      for (const auto& m : result.metrics) {
        if (m.variant != variant) continue;
        row.solution_rate += m.solution_rate;
        row.mean_attempts += m.mean_attempts;
        row.curve_area += m.area();
        ++n;
      }
      row.solution_rate /= n;
      row.mean_attempts /= n;
      row.curve_area /= n;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows) {
  out << "# vtools-sweep/1: one row per grid point and variant, metrics averaged over levels\n";
  for (const auto& a : axes) out << a.name << ',';
  out << "variant,solution_rate,mean_attempts,curve_area\n";
  for (const auto& r : rows) {
    for (double v : r.point) out << format_number(v) << ',';
    out << ssup::to_string(r.variant) << ',' << format_number(r.solution_rate) << ','
        << format_number(r.mean_attempts) << ',' << format_number(r.curve_area) << '\n';
  }
}

BootstrapResult bootstrap_area_difference(const std::vector<Eigen::VectorXd>& a_runs,
                                          const std::vector<Eigen::VectorXd>& b_runs, int resamples,
                                          std::uint64_t seed) {
  if (a_runs.empty() || a_runs.size() != b_runs.size()) {
    throw std::invalid_argument("bootstrap needs the same non-empty level set for both arms");
  }
  auto suite_mean = [](const std::vector<Eigen::VectorXd>& levels) {
    double s = 0.0;
    for (const auto& v : levels) s += v.mean();
    return s / static_cast<double>(levels.size());
  };
  BootstrapResult out;
  out.difference = suite_mean(a_runs) - suite_mean(b_runs);
  Rng rng(seed);
  auto resample_mean = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) s += v(uniform_index(rng, n));
    return s / n;
  };
  int not_greater = 0;
  for (int r = 0; r < resamples; ++r) {
    double diff = 0.0;
    for (std::size_t l = 0; l < a_runs.size(); ++l) diff += resample_mean(a_runs[l]) - resample_mean(b_runs[l]);
    not_greater += diff <= 0.0;
  }
  out.p_value = (not_greater + 1.0) / (resamples + 1.0);
  return out;
}

}  // namespace vtools::harness
