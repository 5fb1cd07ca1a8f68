#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "vtools/physics/step.hpp"

namespace vtools::ssup {

struct SsupConfig {
  int n_sims = 4;
  int max_proposals = 5;  // T
  double act_threshold = 0.8;
  double epsilon = 0.1;
  double learning_rate = 0.1;
  int init_samples = 10;  // per tool
  int max_attempts = 25;
  double sigma_min = 5.0;
  double baseline_decay = 0.9;
  // Absolute x-margin for the prior; nullopt means half the object's width.
  std::optional<double> prior_margin;
  physics::NoiseConfig noise{0.2, 0.2};
  int max_placement_retries = 1000;

  // Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
};

enum class Variant { kFull, kNoPrior, kNoSimulation, kNoUpdating, kGuessing };

inline constexpr std::array<Variant, 5> kAllVariants{Variant::kFull, Variant::kNoPrior,
                                                     Variant::kNoSimulation, Variant::kNoUpdating,
                                                     Variant::kGuessing};

std::string_view to_string(Variant v);
// Throws std::invalid_argument for an unknown name.
Variant parse_variant(std::string_view name);

nlohmann::json to_json(const SsupConfig& cfg);
SsupConfig config_from_json(const nlohmann::json& doc);

// Applies "name=value" to the matching field, e.g. "epsilon=0.2".
void set_parameter(SsupConfig& cfg, std::string_view name, double value);

}  // namespace vtools::ssup
