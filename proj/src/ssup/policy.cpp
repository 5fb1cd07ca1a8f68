#include "vtools/ssup/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vtools/ssup/prior.hpp"

namespace vtools::ssup {
namespace {

// Largest change of a log sd in one update; keeps a single far-off sample
// from blowing a Gaussian up or collapsing it.
constexpr double kMaxLogSdStep = 0.5;

Eigen::Vector3d softmax(const Eigen::Vector3d& logits) {
  const Eigen::Vector3d e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::Vector3d logits_of(const PolicyState& p) {
  return {p.tools[0].logit, p.tools[1].logit, p.tools[2].logit};
}

}  // namespace

Eigen::Vector3d PolicyState::weights() const { return softmax(logits_of(*this)); }

bool PolicyState::operator==(const PolicyState& o) const {
  return pack(*this) == pack(o) && reward_baseline == o.reward_baseline;
}

PolicyParameters pack(const PolicyState& policy) {
  PolicyParameters p;
  for (int k = 0; k < 3; ++k) {
    const auto& t = policy.tools[k];
    p.segment<5>(5 * k) << t.mean, t.log_sd, t.logit;
  }
  return p;
}

PolicyState unpack(const PolicyParameters& params, double reward_baseline) {
  PolicyState policy;
  for (int k = 0; k < 3; ++k) {
    auto& t = policy.tools[k];
    t.mean = params.segment<2>(5 * k);
    t.log_sd = params.segment<2>(5 * k + 2);
    t.logit = params(5 * k + 4);
  }
  policy.reward_baseline = reward_baseline;
  return policy;
}

double log_prob(const PolicyState& policy, const levels::Action& action) {
  const auto& t = policy.tools.at(static_cast<std::size_t>(action.tool));
  const Vec2 z = ((action.position - t.mean).array() / t.sd().array()).matrix();
  const double log_norm = -0.5 * z.squaredNorm() - t.log_sd.sum() - std::log(2.0 * std::numbers::pi);
  return std::log(policy.weights()(action.tool)) + log_norm;
}

PolicyParameters log_prob_gradient(const PolicyState& policy, const levels::Action& action) {
  PolicyParameters g = PolicyParameters::Zero();
  const int k = action.tool;
  const auto& t = policy.tools.at(static_cast<std::size_t>(k));
  const Vec2 sd = t.sd();
  const Vec2 z = ((action.position - t.mean).array() / sd.array()).matrix();
  g.segment<2>(5 * k) = (z.array() / sd.array()).matrix();
  g.segment<2>(5 * k + 2) = (z.array().square() - 1.0).matrix();
  const Eigen::Vector3d w = policy.weights();
  for (int j = 0; j < 3; ++j) g(5 * j + 4) = (j == k ? 1.0 : 0.0) - w(j);
  return g;
}

PolicyState init_policy(const ToolSampler& sampler, const SsupConfig& cfg, Rng& rng) {
  PolicyState policy;
  const double floor = std::log(cfg.sigma_min);
  for (int k = 0; k < 3; ++k) {
    std::vector<Vec2> xs;
    for (int i = 0; i < cfg.init_samples; ++i) xs.push_back(sampler(k, rng).position);
    Vec2 mean = Vec2::Zero();
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    Vec2 var = Vec2::Zero();
    for (const auto& x : xs) var += (x - mean).array().square().matrix();
    if (xs.size() > 1) var /= static_cast<double>(xs.size() - 1);
    auto& t = policy.tools[k];
    t.mean = mean;
    t.log_sd = (0.5 * var.array().log()).max(floor).matrix();
    t.logit = 0.0;
  }
  return policy;
}

PolicyState init_policy(const levels::LevelSpec& level, const SsupConfig& cfg, Rng& rng) {
  const PriorSampler prior(level, cfg);
  return init_policy([&](int tool, Rng& r) { return prior.sample_for_tool(tool, r); }, cfg, rng);
}

std::pair<levels::Action, ProposalSource> sample_policy(const PolicyState& policy,
                                                        const levels::LevelSpec& level,
                                                        const SsupConfig& cfg,
                                                        const std::function<levels::Action(Rng&)>& explore,
                                                        Rng& rng) {
  if (cfg.epsilon >= 1.0 || (cfg.epsilon > 0.0 && uniform(rng, 0.0, 1.0) < cfg.epsilon)) {
    return {explore(rng), ProposalSource::kPrior};
  }
  const Eigen::Vector3d w = policy.weights();
  const double u = uniform(rng, 0.0, 1.0);
  const int tool = u < w(0) ? 0 : (u < w(0) + w(1) ? 1 : 2);
  const auto& t = policy.tools[tool];
  const Vec2 sd = t.sd();
  for (int i = 0; i < cfg.max_placement_retries; ++i) {
    const levels::Action action{tool, Vec2(normal(rng, t.mean.x(), sd.x()), normal(rng, t.mean.y(), sd.y()))};
    if (!levels::validate_action(level, action)) return {action, ProposalSource::kPolicy};
  }
  throw NoValidPlacement("policy for tool " + std::to_string(tool) + " yields no valid placement");
}

PolicyState update_policy(const PolicyState& policy, const levels::Action& action, double reward,
                          const SsupConfig& cfg) {
  PolicyState next = policy;
  const double advantage = reward - policy.reward_baseline;
  const double step = cfg.learning_rate * advantage;
  const int k = action.tool;
  auto& t = next.tools.at(static_cast<std::size_t>(k));
  const Vec2 z = ((action.position - t.mean).array() / t.sd().array()).matrix();
  t.mean += step * (action.position - t.mean);
  t.log_sd += (step * 0.5 * (z.array().square() - 1.0)).cwiseMax(-kMaxLogSdStep).cwiseMin(kMaxLogSdStep).matrix();
  t.log_sd = t.log_sd.cwiseMax(std::log(cfg.sigma_min));
  const Eigen::Vector3d w = policy.weights();
  for (int j = 0; j < 3; ++j) next.tools[j].logit += step * ((j == k ? 1.0 : 0.0) - w(j));
  next.reward_baseline += (1.0 - cfg.baseline_decay) * (reward - policy.reward_baseline);
  return next;
}

}  // namespace vtools::ssup
