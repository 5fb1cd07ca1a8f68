#pragma once

#include <array>
#include <functional>
#include <utility>

#include <Eigen/Core>

#include "vtools/common/random.hpp"
#include "vtools/levels/attempt.hpp"
#include "vtools/ssup/config.hpp"

namespace vtools::ssup {

template <typename Scalar>
struct ToolGaussianT {
  Vector2<Scalar> mean = Vector2<Scalar>::Zero();
  Vector2<Scalar> log_sd = Vector2<Scalar>::Zero();
  Scalar logit = Scalar(0);

  Vector2<Scalar> sd() const { return log_sd.array().exp().matrix(); }
};

using ToolGaussian = ToolGaussianT<double>;

// Mixture over the three tools with a diagonal Gaussian over placement
// position for each.
struct PolicyState {
  std::array<ToolGaussian, 3> tools;
  double reward_baseline = 0.0;

  Eigen::Vector3d weights() const;
  bool operator==(const PolicyState& o) const;
};

// Parameter layout per tool k: [mean x, mean y, log sd x, log sd y, logit] at 5k.
using PolicyParameters = Eigen::Matrix<double, 15, 1>;

PolicyParameters pack(const PolicyState& policy);
PolicyState unpack(const PolicyParameters& params, double reward_baseline = 0.0);

double log_prob(const PolicyState& policy, const levels::Action& action);
// Gradient of log_prob with respect to the packed parameters.
PolicyParameters log_prob_gradient(const PolicyState& policy, const levels::Action& action);

using ToolSampler = std::function<levels::Action(int tool, Rng&)>;

// Each tool's Gaussian takes the sample moments of init_samples placements
// drawn for that tool; sds are floored at sigma_min and logits start equal.
PolicyState init_policy(const ToolSampler& sampler, const SsupConfig& cfg, Rng& rng);
PolicyState init_policy(const levels::LevelSpec& level, const SsupConfig& cfg, Rng& rng);

enum class ProposalSource { kPrior, kPolicy };

// With probability epsilon defers to `explore`; otherwise draws a tool from
// the mixture weights and a position from its Gaussian, redrawn until valid.
// Throws NoValidPlacement when the Gaussian yields no valid position.
std::pair<levels::Action, ProposalSource> sample_policy(const PolicyState& policy,
                                                        const levels::LevelSpec& level,
                                                        const SsupConfig& cfg,
                                                        const std::function<levels::Action(Rng&)>& explore,
                                                        Rng& rng);

// One policy-gradient step with advantage reward - baseline, followed by the
// baseline moving average. Gaussian steps are preconditioned by the inverse
// Fisher information, so a step moves the mean a fraction lr * advantage of
// the way to the action and the log sd by lr * advantage * (z^2 - 1) / 2.
PolicyState update_policy(const PolicyState& policy, const levels::Action& action, double reward,
                          const SsupConfig& cfg);

}  // namespace vtools::ssup
