#include "vtools/ssup/agent.hpp"

#include <memory>

#include "vtools/ssup/prior.hpp"

namespace vtools::ssup {

ProposalRecord evaluate(const levels::LevelSpec& level, const levels::Action& action,
                        const SsupConfig& cfg, Rng& rng) {
  const std::uint64_t base = rng();
  levels::AttemptOptions options;
  options.record_trajectory = false;
  double total = 0.0;
  for (int i = 0; i < cfg.n_sims; ++i) {
    total += levels::attempt(level, action, cfg.noise, derive_seed(base, i), options).reward;
  }
  return {action, total / cfg.n_sims, ProposalSource::kPrior, cfg.n_sims};
}

std::optional<std::size_t> decide(std::span<const ProposalRecord> proposals, const SsupConfig& cfg) {
  if (proposals.empty()) return std::nullopt;
  if (proposals.back().est_reward >= cfg.act_threshold) return proposals.size() - 1;
  if (static_cast<int>(proposals.size()) < cfg.max_proposals) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < proposals.size(); ++i) {
    if (proposals[i].est_reward > proposals[best].est_reward) best = i;
  }
  return best;
}

namespace {

class Episode {
 public:
  Episode(const levels::LevelSpec& level, const SsupConfig& cfg, Variant variant, std::uint64_t seed,
          const EpisodeHooks& hooks)
      : level_(level), cfg_(cfg), variant_(variant), hooks_(hooks), rng_(seed) {
    log_.level = level.name;
    log_.variant = variant;
    log_.seed = seed;
    log_.config = cfg;
    if (variant != Variant::kNoPrior && variant != Variant::kGuessing) {
      prior_ = std::make_unique<PriorSampler>(level, cfg);
    }
    uniform_ = std::make_unique<UniformSampler>(level, cfg);
  }

  EpisodeLog run() {
    if (uses_policy()) {
      policy_ = init_policy([this](int tool, Rng& r) { return explore_for_tool(tool, r); }, cfg_, rng_);
    }
    while (log_.attempts_used() < cfg_.max_attempts && !log_.solved) {
      switch (variant_) {
        case Variant::kGuessing:
          act(uniform_->sample(rng_), 0);
          break;
        case Variant::kNoSimulation:
          act(propose(), 0);
          break;
        default:
          think_then_act();
      }
    }
    return std::move(log_);
  }

 private:
  bool uses_policy() const { return variant_ == Variant::kFull || variant_ == Variant::kNoPrior || variant_ == Variant::kNoSimulation; }

  levels::Action explore(Rng& r) const { return prior_ ? prior_->sample(r) : uniform_->sample(r); }
  levels::Action explore_for_tool(int tool, Rng& r) const {
    return prior_ ? prior_->sample_for_tool(tool, r) : uniform_->sample_for_tool(tool, r);
  }

  // A policy whose Gaussian sits where no placement is valid falls back to
  // exploration rather than ending the episode.
  std::pair<levels::Action, ProposalSource> sample() {
    if (!uses_policy()) return {explore(rng_), ProposalSource::kPrior};
    try {
      return sample_policy(policy_, level_, cfg_, [this](Rng& r) { return explore(r); }, rng_);
    } catch (const NoValidPlacement&) {
      return {explore(rng_), ProposalSource::kPrior};
    }
  }

  levels::Action propose() { return sample().first; }

  void think_then_act() {
    std::vector<ProposalRecord> proposals;
    for (;;) {
      const auto [action, source] = sample();
      ProposalRecord record = evaluate(level_, action, cfg_, rng_);
      record.source = source;
      log_.simulations += record.sim_count;
      if (hooks_.on_proposal) hooks_.on_proposal(record);
      if (uses_policy()) policy_ = update_policy(policy_, action, record.est_reward, cfg_);
      proposals.push_back(record);
      if (const auto chosen = decide(proposals, cfg_)) {
        act(proposals[*chosen].action, static_cast<int>(proposals.size()));
        return;
      }
    }
  }

  void act(const levels::Action& action, int proposals) {
    levels::AttemptOptions options;
    options.record_trajectory = false;
    const auto outcome = levels::attempt(level_, action, {}, 0, options);
    if (uses_policy()) policy_ = update_policy(policy_, action, outcome.reward, cfg_);
    log_.attempts.push_back({action, outcome.reward, outcome.solved, outcome.min_goal_distance, proposals});
    log_.solved = outcome.solved;
  }

  const levels::LevelSpec& level_;
  const SsupConfig& cfg_;
  Variant variant_;
  const EpisodeHooks& hooks_;
  Rng rng_;
  std::unique_ptr<PriorSampler> prior_;
  std::unique_ptr<UniformSampler> uniform_;
  PolicyState policy_;
  EpisodeLog log_;
};

}  // namespace

EpisodeLog run_episode(const levels::LevelSpec& level, const SsupConfig& cfg, Variant variant,
                       std::uint64_t seed, const EpisodeHooks& hooks) {
  cfg.validate();
  return Episode(level, cfg, variant, seed, hooks).run();
}

}  // namespace vtools::ssup
