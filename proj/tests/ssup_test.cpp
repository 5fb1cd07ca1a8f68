#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "support/levels.hpp"
#include "support/stats.hpp"
#include "vtools/ssup/agent.hpp"
#include "vtools/ssup/episode_io.hpp"
#include "vtools/ssup/prior.hpp"

using namespace vtools;
using namespace vtools::ssup;
using levels::Action;
using levels::LevelSpec;
using vtools::testing::fixture_dir;
using vtools::testing::ks_p_value;
using vtools::testing::level_dir;
using vtools::testing::stddev;

namespace {

LevelSpec bundled(const std::string& name) { return levels::load_level_file(level_dir() / (name + ".json")); }
LevelSpec fixture(const std::string& name) { return levels::load_level_file(fixture_dir() / (name + ".json")); }

PolicyState random_policy(Rng& rng) {
  PolicyState p;
  for (auto& t : p.tools) {
    t.mean = Vec2(uniform(rng, 50, 550), uniform(rng, 50, 550));
    t.log_sd = Vec2(uniform(rng, 1.7, 5.0), uniform(rng, 1.7, 5.0));
    t.logit = uniform(rng, -2, 2);
  }
  p.reward_baseline = uniform(rng, 0, 1);
  return p;
}

}  // namespace

TEST_CASE("config") {
  SsupConfig cfg;
  CHECK(cfg.n_sims == 4);
  CHECK(cfg.max_proposals == 5);
  CHECK_NOTHROW(cfg.validate());

  SsupConfig bad = cfg;
  bad.n_sims = 0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("n_sims"), std::invalid_argument);
  bad = cfg;
  bad.epsilon = 1.5;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("epsilon"), std::invalid_argument);
  bad = cfg;
  bad.max_proposals = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.max_attempts = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  for (Variant v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
  CHECK(to_string(Variant::kNoPrior) == "no-prior");
  CHECK_THROWS_AS(parse_variant("dqn"), std::invalid_argument);

  SsupConfig tuned;
  set_parameter(tuned, "epsilon", 0.25);
  set_parameter(tuned, "T", 7);
  set_parameter(tuned, "noise_direction_sd", 0.1);
  tuned.prior_margin = 12.0;
  CHECK(tuned.epsilon == 0.25);
  CHECK(tuned.max_proposals == 7);
  CHECK(tuned.noise.impulse_direction_sd == 0.1);
  CHECK_THROWS_AS(set_parameter(tuned, "temperature", 1.0), std::invalid_argument);

  const SsupConfig back = config_from_json(to_json(tuned));
  CHECK(to_json(back) == to_json(tuned));
  CHECK(back.prior_margin == 12.0);
}

TEST_CASE("prior x range spans the object plus the margin") {
  const LevelSpec level = fixture("crate");  // one movable object at x in [100, 150]
  SsupConfig cfg;
  cfg.prior_margin = 20.0;
  const PriorSampler prior(level, cfg);
  REQUIRE(prior.regions().size() == 1);
  CHECK(prior.regions()[0].x_min == 80.0);
  CHECK(prior.regions()[0].x_max == 170.0);
  Rng rng(1);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 2000; ++i) {
    const auto a = prior.sample(rng);
    lo = std::min(lo, a.position.x());
    hi = std::max(hi, a.position.x());
  }
  CHECK(lo >= 80.0);
  CHECK(hi <= 170.0);
  CHECK(lo < 85.0);
  CHECK(hi > 165.0);

  cfg.prior_margin.reset();  // default: half the object's width
  CHECK(PriorSampler(level, cfg).regions()[0].x_min == 75.0);
}

TEST_CASE("prior samples stay in the support with uniform tools") {
  SsupConfig cfg;
  for (const auto& level : levels::load_level_dir(level_dir())) {
    CAPTURE(level.name);
    const PriorSampler prior(level, cfg);
    Rng rng(derive_seed(3, hash_name(level.name)));
    std::array<int, 3> counts{};
    std::vector<int> per_region(prior.regions().size(), 0);
    for (int i = 0; i < 10000; ++i) {
      const Action a = prior.sample(rng);
      ++counts[static_cast<std::size_t>(a.tool)];
      REQUIRE(prior.in_support(a.position));
      REQUIRE_FALSE(levels::validate_action(level, a).has_value());
      for (std::size_t r = 0; r < per_region.size(); ++r) per_region[r] += prior.regions()[r].contains(a.position);
    }
    CHECK(vtools::testing::chi2_uniform3_p(counts) > 0.01);
    for (int c : per_region) CHECK(c > 0);
  }
}

TEST_CASE("two-object prior support covers both objects") {
  const LevelSpec level = bundled("catapult");
  SsupConfig cfg;
  const PriorSampler prior(level, cfg);
  REQUIRE(prior.regions().size() == 2);
  // oracle: within half a width of the object horizontally, and above or below it
  std::vector<Aabb> objects;
  for (int idx : level.movable_indices()) objects.push_back(level.world.bodies[idx].world_bounds());
  auto supported_by = [&](const Aabb& b, const Vec2& p) {
    const double m = 0.5 * (b.max.x() - b.min.x());
    return p.x() >= b.min.x() - m && p.x() <= b.max.x() + m && (p.y() >= b.max.y() || p.y() <= b.min.y());
  };
  Rng rng(9);
  std::array<int, 2> hits{};
  for (int i = 0; i < 10000; ++i) {
    const Vec2 p = prior.sample(rng).position;
    bool inside = false;
    for (std::size_t k = 0; k < 2; ++k) {
      if (supported_by(objects[k], p)) {
        inside = true;
        ++hits[k];
      }
    }
    REQUIRE(inside);
  }
  CHECK(hits[0] > 1000);
  CHECK(hits[1] > 1000);
}

TEST_CASE("pathological level raises NoValidPlacement") {
  auto doc = nlohmann::json::parse(vtools::testing::read_file(fixture_dir() / "crate.json"));
  doc["prohibited"] = {{{0, 0}, {600, 0}, {600, 600}, {0, 600}}};
  const LevelSpec level = levels::load_level(doc.dump());
  SsupConfig cfg;
  cfg.max_placement_retries = 50;
  Rng rng(0);
  CHECK_THROWS_AS(sample_prior(level, cfg, rng), NoValidPlacement);
  CHECK_THROWS_AS(sample_uniform(level, cfg, rng), NoValidPlacement);
  CHECK_THROWS_AS(run_episode(level, cfg, Variant::kFull, 1), NoValidPlacement);
}

TEST_CASE("evaluate") {
  SsupConfig cfg;
  Rng rng(4);
  const LevelSpec topple = bundled("topple");
  const Action solving = vtools::testing::known_actions("solving").at("topple");
  const auto rec = evaluate(topple, solving, cfg, rng);
  CHECK(rec.sim_count == 4);
  CHECK(rec.action == solving);

  SsupConfig quiet = cfg;
  quiet.noise = {};
  CHECK(evaluate(topple, solving, quiet, rng).est_reward == 1.0);

  // the estimate is the mean of the individual sub-seeded rewards
  Rng a(77), b(77);
  const auto est = evaluate(topple, Action{1, Vec2(320, 400)}, cfg, a);
  const std::uint64_t base = b();
  double sum = 0.0;
  std::set<double> distinct;
  for (int i = 0; i < cfg.n_sims; ++i) {
    levels::AttemptOptions o;
    o.record_trajectory = false;
    sum += levels::attempt(topple, Action{1, Vec2(320, 400)}, cfg.noise, derive_seed(base, i), o).reward;
  }
  CHECK(est.est_reward == doctest::Approx(sum / cfg.n_sims));
  CHECK(est.est_reward >= 0.0);
  CHECK(est.est_reward <= 1.0);
}

TEST_CASE("more simulations reduce estimate spread") {
  const LevelSpec level = bundled("launch_ledge");
  const Action noisy{0, Vec2(370, 542)};
  auto spread = [&](int n_sims) {
    SsupConfig cfg;
    cfg.n_sims = n_sims;
    Rng rng(static_cast<std::uint64_t>(n_sims));
    std::vector<double> est;
    for (int i = 0; i < 200; ++i) est.push_back(evaluate(level, noisy, cfg, rng).est_reward);
    return stddev(est);
  };
  const double sd1 = spread(1);
  const double sd16 = spread(16);
  CHECK(sd1 > 0.0);
  CHECK(sd16 < sd1);
}

TEST_CASE("decide") {
  SsupConfig cfg;
  auto rec = [](double r) { return ProposalRecord{Action{}, r, ProposalSource::kPrior, 4}; };
  const std::vector<ProposalRecord> first{rec(0.95)};
  CHECK(decide(first, cfg) == std::optional<std::size_t>(0));

  const std::vector<ProposalRecord> three{rec(0.1), rec(0.3), rec(0.2)};
  CHECK_FALSE(decide(three, cfg).has_value());

  const std::vector<ProposalRecord> flat{rec(0.1), rec(0.1), rec(0.1), rec(0.1), rec(0.1)};
  CHECK(decide(flat, cfg) == std::optional<std::size_t>(0));

  const std::vector<ProposalRecord> best{rec(0.1), rec(0.6), rec(0.2), rec(0.6), rec(0.3)};
  CHECK(decide(best, cfg) == std::optional<std::size_t>(1));

  const std::vector<ProposalRecord> late{rec(0.1), rec(0.2), rec(0.8)};
  CHECK(decide(late, cfg) == std::optional<std::size_t>(2));

  CHECK_FALSE(decide({}, cfg).has_value());
}

TEST_CASE("init_policy") {
  SsupConfig cfg;
  Rng rng(2);
  SUBCASE("single sample") {
    cfg.init_samples = 1;
    const ToolSampler fixed = [](int tool, Rng&) { return Action{tool, Vec2(100 + tool, 200 - tool)}; };
    const PolicyState p = init_policy(fixed, cfg, rng);
    for (int k = 0; k < 3; ++k) {
      CHECK(p.tools[k].mean == Vec2(100 + k, 200 - k));
      CHECK(p.tools[k].sd().x() == doctest::Approx(cfg.sigma_min));
      CHECK(p.tools[k].sd().y() == doctest::Approx(cfg.sigma_min));
    }
    CHECK(p.weights().isApprox(Eigen::Vector3d::Constant(1.0 / 3.0)));
    CHECK(p.reward_baseline == 0.0);
  }
  SUBCASE("sample moments") {
    cfg.init_samples = 4;
    int i = 0;
    const ToolSampler seq = [&](int tool, Rng&) {
      const double xs[] = {10, 20, 30, 40};
      return Action{tool, Vec2(xs[i++ % 4] * 10, 300)};
    };
    const PolicyState p = init_policy(seq, cfg, rng);
    CHECK(p.tools[0].mean.x() == doctest::Approx(250));
    CHECK(p.tools[0].sd().x() == doctest::Approx(std::sqrt(50000.0 / 3.0)));
    CHECK(p.tools[0].sd().y() == doctest::Approx(cfg.sigma_min));  // zero spread, floored
  }
  SUBCASE("symmetric level centres on the axis") {
    const LevelSpec level = bundled("topple");  // mirror-symmetric about x = 300
    std::vector<double> means;
    for (int n = 0; n < 500; ++n) {
      const PolicyState p = init_policy(level, cfg, rng);
      means.push_back((p.tools[0].mean.x() + p.tools[1].mean.x() + p.tools[2].mean.x()) / 3.0);
    }
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
    const double se = stddev(means) / std::sqrt(static_cast<double>(means.size()));
    CHECK(std::abs(m - 300.0) < 2.0 * se);
  }
}

TEST_CASE("sample_policy") {
  const LevelSpec level = bundled("topple");
  SsupConfig cfg;
  const PriorSampler prior(level, cfg);
  const auto explore = [&](Rng& r) { return prior.sample(r); };
  Rng init_rng(5);
  const PolicyState policy = init_policy(level, cfg, init_rng);

  SUBCASE("epsilon 1 is the prior") {
    cfg.epsilon = 1.0;
    Rng a(8), b(8);
    for (int i = 0; i < 200; ++i) {
      const auto [action, source] = sample_policy(policy, level, cfg, explore, a);
      CHECK(source == ProposalSource::kPrior);
      CHECK(action == prior.sample(b));
    }
  }
  SUBCASE("epsilon 0.25 draws from the prior a quarter of the time") {
    cfg.epsilon = 0.25;
    Rng rng(12);
    int from_prior = 0;
    for (int i = 0; i < 10000; ++i) {
      from_prior += sample_policy(policy, level, cfg, explore, rng).second == ProposalSource::kPrior;
    }
    CHECK(from_prior / 10000.0 == doctest::Approx(0.25).epsilon(0.08));
  }
  SUBCASE("epsilon 0 with floored spread concentrates at the mean") {
    cfg.epsilon = 0.0;
    PolicyState tight = policy;
    for (auto& t : tight.tools) {
      t.mean = Vec2(450, 400);
      t.log_sd = Vec2::Constant(std::log(cfg.sigma_min));
    }
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
      const auto [action, source] = sample_policy(tight, level, cfg, explore, rng);
      CHECK(source == ProposalSource::kPolicy);
      CHECK((action.position - Vec2(450, 400)).cwiseAbs().maxCoeff() < 6.0 * cfg.sigma_min);
      CHECK_FALSE(levels::validate_action(level, action).has_value());
    }
  }
  SUBCASE("mixture weights pick tools") {
    cfg.epsilon = 0.0;
    PolicyState skewed = policy;
    skewed.tools[2].logit = 3.0;
    Rng rng(14);
    std::array<int, 3> counts{};
    for (int i = 0; i < 6000; ++i) ++counts[sample_policy(skewed, level, cfg, explore, rng).first.tool];
    const Eigen::Vector3d w = skewed.weights();
    for (int k = 0; k < 3; ++k) CHECK(counts[k] / 6000.0 == doctest::Approx(w(k)).epsilon(0.1));
  }
}

TEST_CASE("update_policy") {
  SsupConfig cfg;
  Rng rng(21);

  SUBCASE("zero advantage is the identity") {
    for (int i = 0; i < 50; ++i) {
      const PolicyState p = random_policy(rng);
      const Action a{uniform_index(rng, 3), Vec2(uniform(rng, 0, 600), uniform(rng, 0, 600))};
      CHECK(update_policy(p, a, p.reward_baseline, cfg) == p);
    }
  }
  SUBCASE("positive advantage pulls the mean towards the action") {
    PolicyState p = random_policy(rng);
    p.reward_baseline = 0.2;
    const Action right{1, p.tools[1].mean + Vec2(40, 0)};
    const PolicyState q = update_policy(p, right, 1.0, cfg);
    CHECK(q.tools[1].mean.x() > p.tools[1].mean.x());
    CHECK(q.tools[1].mean.y() == p.tools[1].mean.y());
    CHECK(q.weights()(1) > p.weights()(1));
    CHECK(q.tools[0].mean == p.tools[0].mean);
    CHECK(q.reward_baseline == doctest::Approx(0.2 + 0.1 * 0.8));

    const PolicyState r = update_policy(p, right, 0.0, cfg);
    CHECK(r.tools[1].mean.x() < p.tools[1].mean.x());
  }
  SUBCASE("invariants hold after many updates") {
    PolicyState p = random_policy(rng);
    for (int i = 0; i < 2000; ++i) {
      const Action a{uniform_index(rng, 3), Vec2(uniform(rng, 0, 600), uniform(rng, 0, 600))};
      p = update_policy(p, a, uniform(rng, 0, 1), cfg);
      for (const auto& t : p.tools) {
        REQUIRE(t.sd().minCoeff() >= cfg.sigma_min * (1 - 1e-12));
        REQUIRE(pack(p).allFinite());
      }
      REQUIRE(p.weights().sum() == doctest::Approx(1.0));
    }
  }
  SUBCASE("analytic gradient matches central differences") {
    for (int n = 0; n < 100; ++n) {
      const PolicyState p = random_policy(rng);
      const int tool = uniform_index(rng, 3);
      const Action a{tool, p.tools[tool].mean + Vec2(normal(rng, 0, 1) * p.tools[tool].sd().x(),
                                                        normal(rng, 0, 1) * p.tools[tool].sd().y())};
      const PolicyParameters theta = pack(p);
      const PolicyParameters g = log_prob_gradient(p, a);
      PolicyParameters fd;
      for (int i = 0; i < 15; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(theta(i)));
        PolicyParameters up = theta, down = theta;
        up(i) += h;
        down(i) -= h;
        fd(i) = (log_prob(unpack(up), a) - log_prob(unpack(down), a)) / (2 * h);
      }
      CHECK((g - fd).norm() <= 1e-4 * std::max(fd.norm(), 1e-8));
      for (int i = 0; i < 15; ++i) {
        CHECK(std::abs(g(i) - fd(i)) <= 1e-4 * std::max(std::abs(fd(i)), 1e-2));
      }
    }
  }
}

TEST_CASE("episodes respect the variant contracts") {
  SsupConfig cfg;
  cfg.max_attempts = 6;
  for (const char* name : {"launch_ledge", "falling_b", "crate"}) {
    const LevelSpec level = std::string(name) == "crate" ? fixture(name) : bundled(name);
    for (Variant v : kAllVariants) {
      CAPTURE(name);
      CAPTURE(to_string(v));
      int proposals_seen = 0;
      EpisodeHooks hooks;
      hooks.on_proposal = [&](const ProposalRecord& r) {
        ++proposals_seen;
        CHECK(r.sim_count == cfg.n_sims);
        CHECK(r.est_reward >= 0.0);
        CHECK(r.est_reward <= 1.0);
      };
      const EpisodeLog log = run_episode(level, cfg, v, 17, hooks);
      CHECK(log.level == level.name);
      CHECK(log.variant == v);
      CHECK(log.attempts_used() >= 1);
      CHECK(log.attempts_used() <= cfg.max_attempts);
      CHECK(log.solved == log.attempts.back().solved);
      int total = 0;
      for (std::size_t i = 0; i < log.attempts.size(); ++i) {
        const auto& a = log.attempts[i];
        CHECK_FALSE(levels::validate_action(level, a.action).has_value());
        CHECK(a.proposals <= cfg.max_proposals);
        if (i + 1 < log.attempts.size()) CHECK_FALSE(a.solved);
        total += a.proposals;
      }
      CHECK(total == proposals_seen);
      CHECK(log.simulations == proposals_seen * cfg.n_sims);
      if (v == Variant::kGuessing || v == Variant::kNoSimulation) {
        CHECK(log.simulations == 0);
        CHECK(total == 0);
      } else {
        for (const auto& a : log.attempts) CHECK(a.proposals >= 1);
      }
      if (!log.solved) CHECK(log.attempts_used() == cfg.max_attempts);
    }
  }
}

TEST_CASE("episodes are reproducible") {
  SsupConfig cfg;
  cfg.max_attempts = 5;
  const LevelSpec level = bundled("catapult");
  for (Variant v : kAllVariants) {
    CAPTURE(to_string(v));
    const EpisodeLog a = run_episode(level, cfg, v, 123);
    const EpisodeLog b = run_episode(level, cfg, v, 123);
    CHECK(a.attempts == b.attempts);
    CHECK(a.simulations == b.simulations);
    const EpisodeLog c = run_episode(level, cfg, v, 124);
    CHECK_FALSE(c.attempts.front().action == a.attempts.front().action);
  }
}

TEST_CASE("prior-only proposal streams match the prior distribution") {
  const LevelSpec level = fixture("crate");  // unsolvable, so every attempt thinks T times
  SsupConfig cfg;
  cfg.n_sims = 1;
  cfg.max_attempts = 100;
  const PriorSampler prior(level, cfg);
  Rng ref_rng(55);
  std::vector<double> ref_x, ref_y;
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p = prior.sample(ref_rng).position;
    ref_x.push_back(p.x());
    ref_y.push_back(p.y());
  }
  for (Variant v : {Variant::kFull, Variant::kNoUpdating}) {
    CAPTURE(to_string(v));
    SsupConfig run_cfg = cfg;
    if (v == Variant::kFull) run_cfg.epsilon = 1.0;
    std::vector<double> xs, ys;
    EpisodeHooks hooks;
    hooks.on_proposal = [&](const ProposalRecord& r) {
      xs.push_back(r.action.position.x());
      ys.push_back(r.action.position.y());
    };
    for (std::uint64_t seed = 0; xs.size() < 5000; ++seed) run_episode(level, run_cfg, v, seed, hooks);
    xs.resize(5000);
    ys.resize(5000);
    CHECK(ks_p_value(xs, ref_x) > 0.01);
    CHECK(ks_p_value(ys, ref_y) > 0.01);
  }
  // the test itself can tell distributions apart
  std::vector<double> shifted = ref_x;
  for (double& x : shifted) x += 5.0;
  CHECK(ks_p_value(shifted, ref_x) < 0.01);
}

TEST_CASE("easy level: full SSUP solves within two attempts") {
  const LevelSpec level = bundled("topple");
  SsupConfig cfg;
  const PriorSampler prior(level, cfg);
  Rng rng(31);
  int solved = 0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    levels::AttemptOptions o;
    o.record_trajectory = false;
    solved += levels::attempt(level, prior.sample(rng), {}, 0, o).solved;
  }
  REQUIRE(solved >= 0.6 * n);

  int quick = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EpisodeLog log = run_episode(level, cfg, Variant::kFull, seed);
    quick += log.solved && log.attempts_used() <= 2;
  }
  CHECK(quick >= 95);
}

TEST_CASE("episode JSONL round trip") {
  SsupConfig cfg;
  cfg.max_attempts = 4;
  cfg.epsilon = 0.3;
  const LevelSpec level = bundled("seesaw");
  std::stringstream ss;
  std::vector<EpisodeLog> logs;
  for (Variant v : {Variant::kFull, Variant::kGuessing}) {
    logs.push_back(run_episode(level, cfg, v, 40));
    write_episode(ss, logs.back());
  }
  const auto back = read_episodes(ss);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].level == logs[i].level);
    CHECK(back[i].variant == logs[i].variant);
    CHECK(back[i].seed == logs[i].seed);
    CHECK(back[i].solved == logs[i].solved);
    CHECK(back[i].simulations == logs[i].simulations);
    CHECK(back[i].attempts == logs[i].attempts);
    CHECK(to_json(back[i].config) == to_json(cfg));
  }
  std::stringstream broken("{\"type\":\"attempt\",\"index\":0}\n");
  CHECK_THROWS_AS(read_episodes(broken), std::runtime_error);
}
