#pragma once

#include <stdexcept>
#include <vector>

#include "vtools/common/random.hpp"
#include "vtools/levels/attempt.hpp"
#include "vtools/ssup/config.hpp"

namespace vtools::ssup {

class NoValidPlacement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Support of the object-based prior around one movable object: x spans the
// object's width plus a margin on each side, y is either the band above the
// object (up to the top of the world) or the band below it (down to the
// bottom).
struct PriorRegion {
  std::string object_id;
  double x_min = 0.0;
  double x_max = 0.0;
  double above_min = 0.0;
  double above_max = 0.0;
  double below_min = 0.0;
  double below_max = 0.0;

  bool contains(const Vec2& p) const;
};

class PriorSampler {
 public:
  PriorSampler(const levels::LevelSpec& level, const SsupConfig& cfg);

  // Tool uniform over the three; object uniform over movable ones; band
  // uniform over above/below. Positions are redrawn for the chosen tool until
  // the placement is valid.
  levels::Action sample(Rng& rng) const;
  levels::Action sample_for_tool(int tool, Rng& rng) const;

  const std::vector<PriorRegion>& regions() const { return regions_; }
  bool in_support(const Vec2& p) const;

 private:
  const levels::LevelSpec* level_;
  std::vector<PriorRegion> regions_;
  int retries_;
};

// Placement uniform over the world bounds, redrawn until valid.
class UniformSampler {
 public:
  UniformSampler(const levels::LevelSpec& level, const SsupConfig& cfg);

  levels::Action sample(Rng& rng) const;
  levels::Action sample_for_tool(int tool, Rng& rng) const;

 private:
  const levels::LevelSpec* level_;
  int retries_;
};

levels::Action sample_prior(const levels::LevelSpec& level, const SsupConfig& cfg, Rng& rng);
levels::Action sample_uniform(const levels::LevelSpec& level, const SsupConfig& cfg, Rng& rng);

}  // namespace vtools::ssup
