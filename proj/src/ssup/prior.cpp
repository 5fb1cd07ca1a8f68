#include "vtools/ssup/prior.hpp"

#include <string>

namespace vtools::ssup {

bool PriorRegion::contains(const Vec2& p) const {
  if (p.x() < x_min || p.x() > x_max) return false;
  return (p.y() >= above_min && p.y() <= above_max) || (p.y() >= below_min && p.y() <= below_max);
}

PriorSampler::PriorSampler(const levels::LevelSpec& level, const SsupConfig& cfg)
    : level_(&level), retries_(cfg.max_placement_retries) {
  const auto& bounds = level.world.bounds;
  for (int idx : level.movable_indices()) {
    const auto& body = level.world.bodies[idx];
    const Aabb box = body.world_bounds();
    const double margin = cfg.prior_margin ? *cfg.prior_margin : 0.5 * box.width();
    regions_.push_back({body.id, box.min.x() - margin, box.max.x() + margin, box.max.y(),
                        bounds.max.y(), bounds.min.y(), box.min.y()});
  }
  if (regions_.empty()) {
    throw NoValidPlacement("level '" + level.name + "' has no movable objects");
  }
}

bool PriorSampler::in_support(const Vec2& p) const {
  for (const auto& r : regions_) {
    if (r.contains(p)) return true;
  }
  return false;
}

levels::Action PriorSampler::sample(Rng& rng) const { return sample_for_tool(uniform_index(rng, 3), rng); }

levels::Action PriorSampler::sample_for_tool(int tool, Rng& rng) const {
  for (int i = 0; i < retries_; ++i) {
    const PriorRegion& r = regions_[uniform_index(rng, static_cast<int>(regions_.size()))];
    const bool above = uniform_index(rng, 2) == 0;
    const double x = uniform(rng, r.x_min, r.x_max);
    const double y = above ? uniform(rng, r.above_min, r.above_max) : uniform(rng, r.below_min, r.below_max);
    const levels::Action action{tool, Vec2(x, y)};
    if (!levels::validate_action(*level_, action)) return action;
  }
  throw NoValidPlacement("no valid prior placement for tool " + std::to_string(tool) + " in level '" +
                         level_->name + "'");
}

UniformSampler::UniformSampler(const levels::LevelSpec& level, const SsupConfig& cfg)
    : level_(&level), retries_(cfg.max_placement_retries) {}

levels::Action UniformSampler::sample(Rng& rng) const { return sample_for_tool(uniform_index(rng, 3), rng); }

levels::Action UniformSampler::sample_for_tool(int tool, Rng& rng) const {
  const auto& b = level_->world.bounds;
  for (int i = 0; i < retries_; ++i) {
    const levels::Action action{tool, Vec2(uniform(rng, b.min.x(), b.max.x()),
                                           uniform(rng, b.min.y(), b.max.y()))};
    if (!levels::validate_action(*level_, action)) return action;
  }
  throw NoValidPlacement("no valid uniform placement for tool " + std::to_string(tool) + " in level '" +
                         level_->name + "'");
}

levels::Action sample_prior(const levels::LevelSpec& level, const SsupConfig& cfg, Rng& rng) {
  return PriorSampler(level, cfg).sample(rng);
}

levels::Action sample_uniform(const levels::LevelSpec& level, const SsupConfig& cfg, Rng& rng) {
  return UniformSampler(level, cfg).sample(rng);
}

}  // namespace vtools::ssup
