#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "vtools/harness/compare.hpp"
#include "vtools/harness/experiment.hpp"
#include "vtools/physics/trajectory_io.hpp"
#include "vtools/service/http_server.hpp"

namespace {

using namespace vtools;
using harness::ExperimentConfig;

std::vector<ssup::Variant> parse_variants(const std::string& list) {
  std::vector<ssup::Variant> out;
  for (const auto& name : harness::split_csv_line(list)) out.push_back(ssup::parse_variant(name));
  return out;
}

void apply_overrides(ssup::SsupConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects name=value, got '" + o + "'");
    ssup::set_parameter(cfg, o.substr(0, eq), std::stod(o.substr(eq + 1)));
  }
}

struct RunOptions {
  std::string levels = VTOOLS_DEFAULT_LEVEL_DIR;
  std::vector<std::string> names;
  std::string variants = "full,no-prior,no-simulation,no-updating,guessing";
  int runs = 250;
  std::uint64_t seed = 0;
  int threads = 1;
  bool calibration = false;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("--levels", levels, "Level directory")->capture_default_str();
    app->add_option("--level", names, "Restrict to these level names (repeatable)");
    app->add_option("--variant", variants, "Comma-separated variants")->capture_default_str();
    app->add_option("--runs", runs, "Runs per level and variant")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Base seed")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_flag("--include-calibration", calibration, "Also run calibration levels");
    app->add_option("--set", overrides, "Agent parameter override name=value (repeatable)");
  }

  ExperimentConfig config() const {
    ExperimentConfig cfg;
    cfg.level_dir = levels;
    cfg.level_names = names;
    cfg.include_calibration = calibration;
    cfg.variants = parse_variants(variants);
    cfg.runs = runs;
    cfg.base_seed = seed;
    cfg.threads = threads;
    apply_overrides(cfg.agent, overrides);
    return cfg;
  }
};

void print_metrics(const std::vector<harness::LevelMetrics>& metrics) {
  std::printf("%-16s %-14s %6s %9s %9s %7s\n", "level", "variant", "runs", "solved", "attempts", "area");
  for (const auto& m : metrics) {
    std::printf("%-16s %-14s %6d %9.3f %9.2f %7.3f\n", m.level.c_str(), std::string(ssup::to_string(m.variant)).c_str(),
                m.runs, m.solution_rate, m.mean_attempts, m.area());
  }
}

int cmd_run(const RunOptions& opts, const std::string& out) {
  ExperimentConfig cfg = opts.config();
  cfg.output_dir = out;
  const auto result = harness::run_experiment(cfg);
  print_metrics(result.metrics);
  std::printf("wrote %s/metrics.csv\n", out.c_str());
  return 0;
}

void print_report(const std::string& label, const std::vector<std::string>& levels, const Eigen::VectorXd& model,
                  const Eigen::VectorXd& reference) {
  if (levels.empty()) {
    std::printf("%s: no per-level reference rows\n", label.c_str());
    return;
  }
  std::printf("%s over %zu levels: rmse %.4f, model mean %.4f, reference mean %.4f", label.c_str(), levels.size(),
              harness::rmse(model, reference), model.mean(), reference.mean());
  try {
    std::printf(", r %.4f\n", harness::compare(levels, model, reference, label).pearson_r);
  } catch (const harness::DegenerateVariance& e) {
    std::printf(", r undefined (%s)\n", e.what());
  }
}

int cmd_compare(const std::string& model_path, const std::string& reference_path, const std::string& variant_name) {
  std::ifstream in(model_path);
  if (!in) throw std::runtime_error("cannot open " + model_path);
  const auto model = harness::read_metrics_csv(in);
  const auto reference = harness::read_reference_csv(reference_path);
  const auto variant = ssup::parse_variant(variant_name);

  const auto aligned = harness::align(model, reference, variant);
  print_report("mean attempts", aligned.levels, aligned.model_mean_attempts, aligned.reference_mean_attempts);
  print_report("solution rate", aligned.levels, aligned.model_solution_rate, aligned.reference_solution_rate);

  if (const auto overall = harness::overall_row(reference)) {
    double rate = 0.0, attempts = 0.0;
    int n = 0;
    for (const auto& m : model) {
      if (m.variant != variant) continue;
      rate += m.solution_rate;
      attempts += m.mean_attempts;
      ++n;
    }
    if (n == 0) throw std::runtime_error("model metrics contain no rows for variant " + variant_name);
    std::printf("overall (aggregate reference): solution rate model %.3f vs %.3f, mean attempts model %.2f vs %.2f\n",
                rate / n, overall->solution_rate, attempts / n, overall->mean_attempts);
  }
  return 0;
}

int cmd_sweep(const RunOptions& opts, const std::vector<std::string>& params, const std::string& out) {
  std::vector<harness::SweepAxis> axes;
  for (const auto& p : params) axes.push_back(harness::parse_sweep_axis(p));
  const auto rows = harness::run_sweep(opts.config(), axes);
  if (out.empty()) {
    harness::write_sweep_csv(std::cout, axes, rows);
  } else {
    std::ofstream file(out);
    harness::write_sweep_csv(file, axes, rows);
    std::printf("wrote %s (%zu rows)\n", out.c_str(), rows.size());
  }
  return 0;
}

int cmd_serve(const std::string& level_dir, const std::string& storage, const std::string& host, int port) {
  service::PlayService svc(levels::load_level_dir(level_dir), std::filesystem::path(storage));
  httplib::Server server;
  service::install_routes(server, svc);
  std::printf("serving %s on http://%s:%d (log in %s)\n", level_dir.c_str(), host.c_str(), port, storage.c_str());
  std::fflush(stdout);
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

int cmd_attempt(const std::string& level_path, int tool, double x, double y, double noise, std::uint64_t seed) {
  const auto level = levels::load_level_file(level_path);
  const auto outcome = levels::attempt(level, levels::Action{tool, Vec2(x, y)}, {noise, noise}, seed);
  std::cout << physics::serialize(outcome.trajectory) << '\n';
  std::fprintf(stderr, "solved %d, min goal distance %.4f, reward %.4f\n", outcome.solved ? 1 : 0,
               outcome.min_goal_distance, outcome.reward);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual tools physics puzzles, sample-simulate-update agent and experiment harness"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string out_dir = "results";
  auto* run = app.add_subcommand("run", "Run episodes and write metrics, episode logs and curves");
  run_opts.add_to(run);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string model, reference = std::string(VTOOLS_DEFAULT_DATA_DIR) + "/reference/human_reference.csv";
  std::string compare_variant = "full";
  auto* compare = app.add_subcommand("compare", "Correlate model metrics with a reference CSV");
  compare->add_option("--model", model, "metrics.csv written by run")->required();
  compare->add_option("--reference", reference, "Reference CSV")->capture_default_str();
  compare->add_option("--variant", compare_variant, "Model variant to compare")->capture_default_str();

  RunOptions sweep_opts;
  sweep_opts.runs = 20;
  sweep_opts.variants = "full";
  std::vector<std::string> params;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Grid over agent parameters, one row per grid point");
  sweep_opts.add_to(sweep);
  sweep->add_option("--param", params, "Axis name=start:stop:step or name=v1,v2 (repeatable)")->required();
  sweep->add_option("--out", sweep_out, "CSV file (default stdout)");

  std::string serve_levels = VTOOLS_DEFAULT_LEVEL_DIR, storage = "play-data", host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve levels and record human attempts over HTTP");
  serve->add_option("--levels", serve_levels, "Level directory")->capture_default_str();
  serve->add_option("--storage", storage, "Attempt log directory")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  std::string level_file;
  int tool = 0;
  double x = 0, y = 0, noise = 0;
  std::uint64_t seed = 0;
  auto* attempt = app.add_subcommand("attempt", "Simulate one placement and print its trajectory");
  attempt->add_option("level", level_file, "Level JSON file")->required();
  attempt->add_option("--tool", tool)->required();
  attempt->add_option("-x", x)->required();
  attempt->add_option("-y", y)->required();
  attempt->add_option("--noise", noise, "Direction and magnitude noise sd")->capture_default_str();
  attempt->add_option("--seed", seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_opts, out_dir);
    if (*compare) return cmd_compare(model, reference, compare_variant);
    if (*sweep) return cmd_sweep(sweep_opts, params, sweep_out);
    if (*serve) return cmd_serve(serve_levels, storage, host, port);
    if (*attempt) return cmd_attempt(level_file, tool, x, y, noise, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
