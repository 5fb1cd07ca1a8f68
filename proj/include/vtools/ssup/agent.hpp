#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtools/common/random.hpp"
#include "vtools/levels/attempt.hpp"
#include "vtools/ssup/config.hpp"
#include "vtools/ssup/policy.hpp"

namespace vtools::ssup {

struct ProposalRecord {
  levels::Action action;
  double est_reward = 0.0;
  ProposalSource source = ProposalSource::kPrior;
  int sim_count = 0;
};

// Mean reward of cfg.n_sims noisy rollouts, each with its own sub-seed.
ProposalRecord evaluate(const levels::LevelSpec& level, const levels::Action& action,
                        const SsupConfig& cfg, Rng& rng);

// Index of the proposal to act on, or nullopt to keep thinking. Acts on the
// latest proposal when it clears the threshold, otherwise on the best so far
// (earliest on ties) once max_proposals have been considered.
std::optional<std::size_t> decide(std::span<const ProposalRecord> proposals, const SsupConfig& cfg);

struct AttemptEntry {
  levels::Action action;
  double reward = 0.0;
  bool solved = false;
  double min_goal_distance = 0.0;
  int proposals = 0;  // imagined proposals considered before acting

  bool operator==(const AttemptEntry&) const = default;
};

struct EpisodeLog {
  std::string level;
  Variant variant = Variant::kFull;
  std::uint64_t seed = 0;
  std::vector<AttemptEntry> attempts;
  bool solved = false;
  int simulations = 0;  // noisy rollouts run while thinking
  SsupConfig config;

  int attempts_used() const { return static_cast<int>(attempts.size()); }
};

struct EpisodeHooks {
  std::function<void(const ProposalRecord&)> on_proposal;
};

// Plays one level until solved or cfg.max_attempts real (noiseless) attempts.
EpisodeLog run_episode(const levels::LevelSpec& level, const SsupConfig& cfg, Variant variant,
                       std::uint64_t seed, const EpisodeHooks& hooks = {});

}  // namespace vtools::ssup
