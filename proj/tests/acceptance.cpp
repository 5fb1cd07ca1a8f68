#include <algorithm>
// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <thread>

#include <unistd.h>

#include "support/levels.hpp"
#include "support/stats.hpp"
#include "support/worlds.hpp"
#include "vtools/harness/compare.hpp"
#include "vtools/harness/experiment.hpp"
#include "vtools/physics/trajectory_io.hpp"
#include "vtools/service/http_server.hpp"
#include "vtools/ssup/prior.hpp"

namespace {

using namespace vtools;
using levels::Action;
using levels::LevelSpec;
using nlohmann::json;
using ssup::Variant;
namespace fs = std::filesystem;
namespace vt = vtools::testing;

constexpr int kOrderingRuns = 250;
constexpr int kAblationRuns = 100;

// Collects failed sub-checks; the first few are kept for the report.
struct Tally {
  int checks = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
  std::string summary(const std::string& extra = {}) const {
    std::string s = std::to_string(checks - static_cast<int>(failures.size())) + "/" + std::to_string(checks) +
                    " checks";
    if (!extra.empty()) s += "; " + extra;
    for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 3); ++i) s += "; failed: " + failures[i];
    return s;
  }
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict verdict(const Tally& t, const std::string& extra = {}) { return {t.failures.empty(), t.summary(extra)}; }

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const std::vector<LevelSpec>& bundled() {
  static const auto levels = levels::load_level_dir(vt::level_dir());
  return levels;
}

const LevelSpec& bundled(const std::string& name) {
  for (const auto& l : bundled()) {
    if (l.name == name) return l;
  }
  throw std::runtime_error("missing bundled level " + name);
}

std::vector<const LevelSpec*> archetypes() {
  std::vector<const LevelSpec*> out;
  for (const auto& l : bundled()) {
    if (l.category != "calibration") out.push_back(&l);
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  Tally t;
  const physics::NoiseConfig noise{0.2, 0.2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const physics::World w = vt::random_world(1000 + seed);
    t.expect(physics::serialize(physics::simulate(w, 5.0, noise, seed)) ==
                 physics::serialize(physics::simulate(w, 5.0, noise, seed)),
             "random world " + std::to_string(seed));
  }
  const auto solving = vt::known_actions("solving");
  int n = 0;
  for (const auto& [name, action] : solving) {
    if (n++ == 5) break;
    const LevelSpec& level = bundled(name);
    for (const auto& noise_cfg : {physics::NoiseConfig{}, noise}) {
      t.expect(physics::serialize(levels::attempt(level, action, noise_cfg, 17).trajectory) ==
                   physics::serialize(levels::attempt(level, action, noise_cfg, 17).trajectory),
               name);
    }
  }
  const double secs = seconds_since(t0);
  t.expect(secs < 60.0, "runtime under a minute");
  return verdict(t, "20 worlds + 5 levels in " + fmt(secs, 1) + " s");
}

double rebound_apex_ratio(double elasticity, double height) {
  physics::World w = vt::ball_drop(height, elasticity);
  const double rest_y = w.bodies[1].position.y() - height;
  Rng rng(0);
  physics::Stepper stepper;
  bool rising = false;
  double apex = 0.0;
  for (int s = 0; s < 400; ++s) {
    stepper.advance(w, {}, rng);
    rising = rising || w.bodies[1].velocity.y() > 0;
    if (rising) apex = std::max(apex, w.bodies[1].position.y() - rest_y);
  }
  return apex / height;
}

Verdict physics_sanity() {
  Tally t;
  physics::World w;
  w.add(physics::make_body("ball", physics::Circle{10}, physics::BodyKind::kDynamic, physics::BodyRole::kPlain, {},
                           {Vec2(300, 500), 0.0}));
  const double y0 = 500.0, g = -w.gravity.y(), dt = w.dt;
  Rng rng(0);
  physics::Stepper stepper;
  double worst = 0.0;
  for (int n = 1; n <= 200; ++n) {
    stepper.advance(w, {}, rng);
    const double exact = g * dt * dt * n * (n + 1) / 2.0;
    worst = std::max(worst, std::abs((y0 - w.bodies[0].position.y()) - exact) / exact);
  }
  t.expect(worst <= 1e-6, "integrator closed form");
  const double tt = 200 * dt;
  const double continuous = std::abs((y0 - w.bodies[0].position.y()) - 0.5 * g * tt * tt) / (0.5 * g * tt * tt);
  t.expect(continuous < 0.01, "continuous free fall");

  std::string apexes;
  for (double h : {100.0, 200.0, 350.0}) {
    const double ratio = rebound_apex_ratio(0.5, h);
    apexes += (apexes.empty() ? "" : ",") + fmt(ratio);
    t.expect(ratio >= 0.2 && ratio <= 0.3, "apex ratio from " + fmt(h, 0));
  }

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    physics::World rw = vt::random_world(seed);
    Rng r(0);
    physics::Stepper st;
    double prev = physics::total_energy(rw);
    bool ok = true;
    for (int s = 0; s < 300; ++s) {
      st.advance(rw, {}, r);
      const double e = physics::total_energy(rw);
      ok = ok && e <= prev + 1e-6 * std::abs(prev);
      prev = e;
    }
    t.expect(ok, "energy in world " + std::to_string(seed));
  }
  return verdict(t, "closed-form rel err " + fmt(worst * 1e9, 3) + "e-9, continuous " + fmt(continuous * 100, 2) +
                        "%, apex ratios " + apexes);
}

Verdict noise_calibration() {
  Tally t;
  std::vector<double> angles;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) angles.push_back(vt::head_on_direction({0.2, 0.0}, seed));
  const double sd = vt::circular_sd(angles);
  t.expect(std::abs(sd - 0.2) <= 0.04, "circular sd " + fmt(sd));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const physics::World w = vt::random_world(200 + seed);
    t.expect(physics::serialize(physics::simulate(w, 3.0, physics::NoiseConfig{}, 0)) ==
                 physics::serialize(physics::simulate(w, 3.0, physics::NoiseConfig{0.0, 0.0}, seed * 7919 + 1)),
             "zero noise world " + std::to_string(seed));
  }
  for (const auto& [name, action] : vt::known_actions("solving")) {
    t.expect(physics::serialize(levels::attempt(bundled(name), action, {}, 0).trajectory) ==
                 physics::serialize(levels::attempt(bundled(name), action, {0.0, 0.0}, 99).trajectory),
             "zero noise " + name);
  }
  return verdict(t, "measured sd " + fmt(sd, 4) + " rad over 1000 seeds");
}

Verdict reward_contract() {
  Tally t;
  levels::AttemptOptions quick;
  quick.record_trajectory = false;
  for (const auto& l : bundled()) {
    t.expect(levels::attempt(l, std::nullopt, {}, 0, quick).reward == 0.0, "no-tool " + l.name);
  }
  const auto solving = vt::known_actions("solving");
  for (const auto* l : archetypes()) {
    const auto it = solving.find(l->name);
    t.expect(it != solving.end(), "solving action known for " + l->name);
    if (it != solving.end()) t.expect(levels::attempt(*l, it->second, {}, 0, quick).reward == 1.0, "solve " + l->name);
  }
  std::string cal;
  for (const auto& [name, action] : vt::known_actions("halving")) {
    const LevelSpec& level = bundled(name);
    const auto [d0, d1] = vt::calibration_gaps(level);
    const double oracle = 1.0 - d1 / d0;
    const double reward = levels::attempt(level, action, {}, 0, quick).reward;
    cal += (cal.empty() ? "" : ", ") + name + " " + fmt(reward, 4) + " (oracle " + fmt(oracle, 4) + ")";
    t.expect(std::abs(reward - 0.5) <= 0.02 && std::abs(reward - oracle) <= 0.02, "calibration " + name);
  }
  return verdict(t, cal);
}

Verdict prior_contract() {
  Tally t;
  ssup::SsupConfig cfg;
  double min_p = 1.0;
  for (const auto& level : bundled()) {
    const ssup::PriorSampler prior(level, cfg);
    // documented support: half a width either side of each movable object, above or below it
    std::vector<Aabb> objects;
    for (int idx : level.movable_indices()) objects.push_back(level.world.bodies[idx].world_bounds());
    Rng rng(derive_seed(3, hash_name(level.name)));
    std::array<int, 3> counts{};
    int outside = 0;
    for (int i = 0; i < 10000; ++i) {
      const Action a = prior.sample(rng);
      ++counts[static_cast<std::size_t>(a.tool)];
      const Vec2 p = a.position;
      bool inside = false;
      for (const auto& b : objects) {
        const double m = 0.5 * (b.max.x() - b.min.x());
        inside = inside || (p.x() >= b.min.x() - m && p.x() <= b.max.x() + m && (p.y() >= b.max.y() || p.y() <= b.min.y()));
      }
      outside += !inside;
    }
    const double p = vt::chi2_uniform3_p(counts);
    min_p = std::min(min_p, p);
    t.expect(outside == 0, level.name + " support");
    t.expect(p > 0.01, level.name + " tool uniformity");
  }
  return verdict(t, std::to_string(bundled().size()) + " levels x 10000 samples, min chi2 p " + fmt(min_p, 3));
}

ssup::PolicyState random_policy(Rng& rng) {
  ssup::PolicyState p;
  for (auto& tool : p.tools) {
    tool.mean = Vec2(uniform(rng, 50, 550), uniform(rng, 50, 550));
    tool.log_sd = Vec2(uniform(rng, 1.7, 5.0), uniform(rng, 1.7, 5.0));
    tool.logit = uniform(rng, -2, 2);
  }
  p.reward_baseline = uniform(rng, 0, 1);
  return p;
}

Verdict update_contract() {
  Tally t;
  ssup::SsupConfig cfg;
  Rng rng(123);
  double worst_fd = 0.0;
  int toward = 0;
  for (int n = 0; n < 100; ++n) {
    const ssup::PolicyState p = random_policy(rng);
    const int tool = uniform_index(rng, 3);
    const auto& g = p.tools[tool];
    const Action a{tool, g.mean + Vec2(normal(rng, 0, g.sd().x()), normal(rng, 0, g.sd().y()))};

    t.expect(ssup::update_policy(p, a, p.reward_baseline, cfg) == p, "zero advantage identity");

    const ssup::PolicyParameters theta = ssup::pack(p);
    const ssup::PolicyParameters grad = ssup::log_prob_gradient(p, a);
    ssup::PolicyParameters fd;
    for (int i = 0; i < theta.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(theta(i)));
      ssup::PolicyParameters up = theta, down = theta;
      up(i) += h;
      down(i) -= h;
      fd(i) = (ssup::log_prob(ssup::unpack(up), a) - ssup::log_prob(ssup::unpack(down), a)) / (2 * h);
    }
    const double rel = (grad - fd).norm() / std::max(fd.norm(), 1e-12);
    worst_fd = std::max(worst_fd, rel);

    const ssup::PolicyState q = ssup::update_policy(p, a, p.reward_baseline + 0.5, cfg);
    toward += (q.tools[tool].mean - a.position).norm() < (g.mean - a.position).norm();
  }
  t.expect(worst_fd <= 1e-4, "finite differences");
  t.expect(toward == 100, "sign test");
  return verdict(t, "max FD rel err " + fmt(worst_fd * 1e6, 3) + "e-6, moved toward sample " +
                        std::to_string(toward) + "/100");
}

Verdict loop_contract() {
  Tally t;
  ssup::SsupConfig cfg;
  t.expect(cfg.max_proposals == 5 && cfg.n_sims == 4, "defaults T=5, n_sims=4");

  Rng rng(8);
  int rollouts = 0;
  for (const auto& [name, action] : vt::known_actions("solving")) {
    const auto rec = ssup::evaluate(bundled(name), action, cfg, rng);
    rollouts += rec.sim_count;
    t.expect(rec.sim_count == 4, "evaluate rollouts " + name);
  }

  int max_seen = 0;
  for (const auto* level : archetypes()) {
    for (Variant v : {Variant::kFull, Variant::kNoPrior, Variant::kNoUpdating}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        int proposals = 0;
        ssup::EpisodeHooks hooks;
        hooks.on_proposal = [&](const ssup::ProposalRecord& r) {
          ++proposals;
          t.expect(r.sim_count == cfg.n_sims, "proposal rollouts");
        };
        const auto log = ssup::run_episode(*level, cfg, v, seed, hooks);
        for (const auto& a : log.attempts) {
          max_seen = std::max(max_seen, a.proposals);
          t.expect(a.proposals <= cfg.max_proposals, "proposals per attempt on " + level->name);
        }
        t.expect(log.simulations == proposals * cfg.n_sims, "simulation count on " + level->name);
      }
    }
  }

  // epsilon = 1: internal proposals of full episodes versus direct prior draws
  const LevelSpec& level = bundled("catapult");
  ssup::SsupConfig eps = cfg;
  eps.epsilon = 1.0;
  eps.n_sims = 1;
  std::vector<double> xs, ys, px, py;
  ssup::EpisodeHooks hooks;
  hooks.on_proposal = [&](const ssup::ProposalRecord& r) {
    xs.push_back(r.action.position.x());
    ys.push_back(r.action.position.y());
  };
  for (std::uint64_t seed = 0; xs.size() < 5000; ++seed) ssup::run_episode(level, eps, Variant::kFull, seed, hooks);
  xs.resize(5000);
  ys.resize(5000);
  const ssup::PriorSampler prior(level, eps);
  Rng prng(4242);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p = prior.sample(prng).position;
    px.push_back(p.x());
    py.push_back(p.y());
  }
  const double pxv = vt::ks_p_value(xs, px), pyv = vt::ks_p_value(ys, py);
  t.expect(pxv > 0.01 && pyv > 0.01, "KS epsilon=1 vs prior");
  return verdict(t, "max proposals/attempt " + std::to_string(max_seen) + ", " + std::to_string(rollouts) +
                        " rollouts over " + std::to_string(vt::known_actions("solving").size()) +
                        " evaluations, KS p x " + fmt(pxv) + " y " + fmt(pyv));
}

struct OrderingData {
  harness::ExperimentResult main;       // full + guessing at kOrderingRuns
  harness::ExperimentResult ablations;  // remaining variants at kAblationRuns
  fs::path out_dir;
  double seconds = 0.0;
};

const OrderingData& ordering_data() {
  static OrderingData data = [] {
    OrderingData d;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<LevelSpec> levels;
    for (const auto* l : archetypes()) levels.push_back(*l);
    harness::ExperimentConfig cfg;
    cfg.base_seed = 2024;
    cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    cfg.runs = kOrderingRuns;
    cfg.variants = {Variant::kFull, Variant::kGuessing};
    d.out_dir = fs::temp_directory_path() / ("vtools_acceptance_" + std::to_string(::getpid()));
    cfg.output_dir = d.out_dir;
    d.main = harness::run_experiment(cfg, levels);
    cfg.runs = kAblationRuns;
    cfg.variants = {Variant::kNoPrior, Variant::kNoSimulation, Variant::kNoUpdating};
    cfg.output_dir.reset();
    d.ablations = harness::run_experiment(cfg, levels);
    d.seconds = seconds_since(t0);
    return d;
  }();
  return data;
}

std::vector<Eigen::VectorXd> per_level_areas(const harness::ExperimentResult& r, Variant v) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& [key, logs] : r.logs) {
    if (key.second == v) out.push_back(harness::run_areas(logs));
  }
  return out;
}

double suite_area(const std::vector<Eigen::VectorXd>& areas) {
  double s = 0.0;
  for (const auto& a : areas) s += a.mean();
  return s / static_cast<double>(areas.size());
}

Verdict ordering() {
  const auto& d = ordering_data();
  Tally t;
  std::map<std::string, double> full_rate, guess_rate;
  for (const auto& m : d.main.metrics) (m.variant == Variant::kFull ? full_rate : guess_rate)[m.level] = m.solution_rate;
  t.expect(full_rate.size() >= 10, "at least 10 levels");
  std::string rates;
  int compared = 0;
  for (const auto& [level, g] : guess_rate) {
    rates += " " + level + " " + fmt(full_rate[level], 2) + "/" + fmt(g, 2);
    if (g < 0.95) {
      ++compared;
      t.expect(full_rate[level] > g, level + " full " + fmt(full_rate[level]) + " vs guessing " + fmt(g));
    }
  }
  const auto full_areas = per_level_areas(d.main, Variant::kFull);
  const auto guess_areas = per_level_areas(d.main, Variant::kGuessing);
  const auto boot = harness::bootstrap_area_difference(full_areas, guess_areas, 2000, 7);
  t.expect(suite_area(full_areas) >= suite_area(guess_areas), "area full >= guessing");
  t.expect(boot.p_value < 0.05, "bootstrap p " + fmt(boot.p_value, 4));

  std::string ablations;
  const double full_area = suite_area(full_areas);
  for (Variant v : {Variant::kNoPrior, Variant::kNoSimulation, Variant::kNoUpdating}) {
    const double a = suite_area(per_level_areas(d.ablations, v));
    ablations += " " + std::string(ssup::to_string(v)) + " " + fmt(a) + (full_area >= a ? "" : "(!)");
  }
  t.expect(d.seconds < 1800.0, "runtime under 30 min");
  return verdict(t, std::to_string(compared) + " levels with guessing < 0.95; full/guessing rates:" + rates +
                        "; area full " + fmt(full_area) + " guessing " + fmt(suite_area(guess_areas)) +
                        " (bootstrap p " + fmt(boot.p_value, 4) + "); ablations at " + std::to_string(kAblationRuns) +
                        " runs (reported):" + ablations + "; " + fmt(d.seconds, 0) + " s");
}

Verdict metric_engine() {
  const auto& d = ordering_data();
  Tally t;
  std::vector<std::string> names;
  std::vector<double> attempts;
  for (const auto& m : d.main.metrics) {
    if (m.variant != Variant::kFull) continue;
    names.push_back(m.level);
    attempts.push_back(m.mean_attempts);
  }
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(attempts.data(), static_cast<Eigen::Index>(attempts.size()));
  const auto self = harness::compare(names, v, v);
  t.expect(std::abs(self.pearson_r - 1.0) < 1e-12 && self.rmse == 0.0, "compare(v, v)");
  const double c = 1.25;
  const auto shifted = harness::compare(names, (v.array() + c).matrix(), v);
  t.expect(std::abs(shifted.pearson_r - 1.0) < 1e-12 && std::abs(shifted.rmse - c) < 1e-12, "compare(v, v + c)");

  for (const auto* r : {&d.main, &d.ablations}) {
    for (const auto& m : r->metrics) {
      bool monotone = true;
      for (Eigen::Index x = 1; x < m.curve.size(); ++x) monotone = monotone && m.curve(x) >= m.curve(x - 1);
      t.expect(monotone, "curve non-decreasing " + m.level);
      t.expect(std::abs(m.curve(m.curve.size() - 1) - m.solution_rate) < 1e-12, "curve terminal " + m.level);
    }
  }
  const auto recomputed = harness::recompute_metrics(d.out_dir);
  t.expect(recomputed.size() == d.main.metrics.size(), "recomputed row count");
  for (std::size_t i = 0; i < std::min(recomputed.size(), d.main.metrics.size()); ++i) {
    t.expect(recomputed[i] == d.main.metrics[i], "JSONL recomputation " + d.main.metrics[i].level);
  }
  fs::remove_all(d.out_dir);
  return verdict(t, std::to_string(recomputed.size()) + " metric rows recomputed from JSONL");
}

bool point_in_convex(const physics::ConvexPolygon& poly, const Vec2& p) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 e = v[(i + 1) % v.size()] - v[i];
    const Vec2 d = p - v[i];
    if (e.x() * d.y() - e.y() * d.x() < 0) return false;
  }
  return true;
}

Verdict service_contract() {
  Tally t;
  const fs::path storage = fs::temp_directory_path() / ("vtools_acceptance_play_" + std::to_string(::getpid()));
  fs::remove_all(storage);
  service::PlayService svc(bundled(), storage);
  httplib::Server server;
  service::install_routes(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto post = [&](const std::string& path, const json& body) {
    const auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw std::runtime_error("no response from " + path);
    return std::make_pair(res->status, json::parse(res->body));
  };

  const auto [created, session] = post("/sessions", {{"participant", "acceptance"}});
  t.expect(created == 201, "session created");
  const std::string id = session.at("id");
  const auto solving = vt::known_actions("solving");
  int rejections = 0;
  for (const auto* level : archetypes()) {
    const std::string base = "/sessions/" + id + "/levels/" + level->name + "/attempts";
    // grey zone: the centroid of the first prohibited polygon
    if (!level->prohibited.empty()) {
      const auto& zone = level->prohibited.front();
      Vec2 c = Vec2::Zero();
      for (const auto& p : zone.vertices) c += p;
      c /= static_cast<double>(zone.vertices.size());
      if (point_in_convex(zone, c)) {
        const auto [status, body] = post(base, {{"tool", 0}, {"x", c.x()}, {"y", c.y()}});
        t.expect(status == 422 && body.value("reason", "") == "prohibited-zone", level->name + " grey zone");
        ++rejections;
      }
    }
    // on top of the goal object, outside every grey zone
    const Vec2 g = level->world.find(level->goal_object_ids.front())->position;
    bool clear = true;
    for (const auto& zone : level->prohibited) {
      const Aabb zb = vt::polygon_box(zone);
      clear = clear && !(g.x() > zb.min.x() - 60 && g.x() < zb.max.x() + 60 && g.y() > zb.min.y() - 60 &&
                         g.y() < zb.max.y() + 60);
    }
    if (clear) {
      const auto [status, body] = post(base, {{"tool", 0}, {"x", g.x()}, {"y", g.y()}});
      t.expect(status == 422 && body.value("reason", "") == "body-overlap", level->name + " overlap");
      ++rejections;
    }
    const auto [oob_status, oob] = post(base, {{"tool", 0}, {"x", -500.0}, {"y", 300.0}});
    t.expect(oob_status == 422 && oob.value("reason", "") == "out-of-bounds", level->name + " out of bounds");
    const auto [none_status, none] = post(base, json::object());
    t.expect(none_status == 400, level->name + " no tool");
    rejections += 2;
  }
  t.expect(svc.log(id).empty() && !fs::exists(storage / "sessions" / (id + ".jsonl")), "rejections not persisted");

  // a non-solving valid action twice, then the solving one
  for (const auto* level : archetypes()) {
    const std::string base = "/sessions/" + id + "/levels/" + level->name + "/attempts";
    const Action solve = solving.at(level->name);
    // first valid non-solving placement on a coarse grid
    std::optional<Action> found;
    for (double y = level->world.bounds.max.y() - 20; !found && y > level->world.bounds.min.y(); y -= 40) {
      for (double x = level->world.bounds.min.x() + 20; !found && x < level->world.bounds.max.x(); x += 40) {
        const Action cand{solve.tool, Vec2(x, y)};
        if (!levels::validate_action(*level, cand) && !levels::attempt(*level, cand, {}, 0).solved) found = cand;
      }
    }
    t.expect(found.has_value(), level->name + " has a non-solving placement");
    const Action miss = found.value_or(solve);
    const json mj{{"tool", miss.tool}, {"x", miss.position.x()}, {"y", miss.position.y()}};
    const auto [s1, a] = post(base, mj);
    const auto [s2, b] = post(base, mj);
    t.expect(s1 == 200 && s2 == 200, level->name + " valid attempts accepted");
    if (s1 == 200 && s2 == 200) t.expect(a.at("trajectory").dump() == b.at("trajectory").dump(), level->name + " identical trajectories");
    const auto [s3, c] = post(base, {{"tool", solve.tool}, {"x", solve.position.x()}, {"y", solve.position.y()}});
    t.expect(s3 == 200 && c.value("solved", false), level->name + " solved");
  }

  const auto records = service::read_attempt_log(storage / "sessions" / (id + ".jsonl"));
  t.expect(records == svc.log(id), "persisted log equals served log");
  int solved = 0;
  for (const auto& r : records) solved += r.solved;
  t.expect(service::replay_mismatches(records, bundled()).empty(), "replay reproduces solved flags and distances");

  server.stop();
  listener.join();
  fs::remove_all(storage);
  return verdict(t, std::to_string(rejections) + " rejections, " + std::to_string(records.size()) +
                        " persisted attempts replayed (" + std::to_string(solved) + " solved)");
}

}  // namespace

// Optional arguments restrict the run to the named criteria.
int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"determinism", determinism},
      {"physics-sanity", physics_sanity},
      {"noise-calibration", noise_calibration},
      {"reward-contract", reward_contract},
      {"prior-contract", prior_contract},
      {"update-contract", update_contract},
      {"loop-contract", loop_contract},
      {"ordering", ordering},
      {"metric-engine", metric_engine},
      {"service", service_contract},
  };
  int failed = 0, ran = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++ran;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), seconds_since(t0), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
