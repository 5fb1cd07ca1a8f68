#include "vtools/ssup/config.hpp"

#include <string>

namespace vtools::ssup {
namespace {

void require(bool ok, const char* field) {
  if (!ok) throw std::invalid_argument(std::string("config: ") + field + " out of range");
}

}  // namespace

void SsupConfig::validate() const {
  require(n_sims >= 1, "n_sims");
  require(max_proposals >= 1, "max_proposals");
  require(act_threshold >= 0.0 && act_threshold <= 1.0, "act_threshold");
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon");
  require(learning_rate > 0.0, "learning_rate");
  require(init_samples >= 1, "init_samples");
  require(max_attempts >= 1, "max_attempts");
  require(sigma_min > 0.0, "sigma_min");
  require(baseline_decay >= 0.0 && baseline_decay < 1.0, "baseline_decay");
  require(!prior_margin || *prior_margin >= 0.0, "prior_margin");
  require(noise.impulse_direction_sd >= 0.0, "noise.direction_sd");
  require(noise.impulse_magnitude_sd >= 0.0, "noise.magnitude_sd");
  require(max_placement_retries >= 1, "max_placement_retries");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kNoPrior:
      return "no-prior";
    case Variant::kNoSimulation:
      return "no-simulation";
    case Variant::kNoUpdating:
      return "no-updating";
    case Variant::kGuessing:
      return "guessing";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

nlohmann::json to_json(const SsupConfig& cfg) {
  nlohmann::json j = {
      {"n_sims", cfg.n_sims},
      {"max_proposals", cfg.max_proposals},
      {"act_threshold", cfg.act_threshold},
      {"epsilon", cfg.epsilon},
      {"learning_rate", cfg.learning_rate},
      {"init_samples", cfg.init_samples},
      {"max_attempts", cfg.max_attempts},
      {"sigma_min", cfg.sigma_min},
      {"baseline_decay", cfg.baseline_decay},
      {"prior_margin", nullptr},
      {"noise_direction_sd", cfg.noise.impulse_direction_sd},
      {"noise_magnitude_sd", cfg.noise.impulse_magnitude_sd},
      {"max_placement_retries", cfg.max_placement_retries},
  };
  if (cfg.prior_margin) j["prior_margin"] = *cfg.prior_margin;
  return j;
}

SsupConfig config_from_json(const nlohmann::json& doc) {
  SsupConfig cfg;
  cfg.n_sims = doc.at("n_sims").get<int>();
  cfg.max_proposals = doc.at("max_proposals").get<int>();
  cfg.act_threshold = doc.at("act_threshold").get<double>();
  cfg.epsilon = doc.at("epsilon").get<double>();
  cfg.learning_rate = doc.at("learning_rate").get<double>();
  cfg.init_samples = doc.at("init_samples").get<int>();
  cfg.max_attempts = doc.at("max_attempts").get<int>();
  cfg.sigma_min = doc.at("sigma_min").get<double>();
  cfg.baseline_decay = doc.at("baseline_decay").get<double>();
  if (!doc.at("prior_margin").is_null()) cfg.prior_margin = doc.at("prior_margin").get<double>();
  cfg.noise.impulse_direction_sd = doc.at("noise_direction_sd").get<double>();
  cfg.noise.impulse_magnitude_sd = doc.at("noise_magnitude_sd").get<double>();
  cfg.max_placement_retries = doc.at("max_placement_retries").get<int>();
  return cfg;
}

void set_parameter(SsupConfig& cfg, std::string_view name, double value) {
  auto as_int = [&](const char* field) {
    const auto i = static_cast<int>(value);
    if (static_cast<double>(i) != value) {
      throw std::invalid_argument(std::string(field) + " must be an integer");
    }
    return i;
  };
  if (name == "n_sims") {
    cfg.n_sims = as_int("n_sims");
  } else if (name == "max_proposals" || name == "T") {
    cfg.max_proposals = as_int("max_proposals");
  } else if (name == "act_threshold") {
    cfg.act_threshold = value;
  } else if (name == "epsilon") {
    cfg.epsilon = value;
  } else if (name == "learning_rate") {
    cfg.learning_rate = value;
  } else if (name == "init_samples") {
    cfg.init_samples = as_int("init_samples");
  } else if (name == "max_attempts") {
    cfg.max_attempts = as_int("max_attempts");
  } else if (name == "sigma_min") {
    cfg.sigma_min = value;
  } else if (name == "baseline_decay") {
    cfg.baseline_decay = value;
  } else if (name == "prior_margin") {
    cfg.prior_margin = value;
  } else if (name == "noise_direction_sd") {
    cfg.noise.impulse_direction_sd = value;
  } else if (name == "noise_magnitude_sd") {
    cfg.noise.impulse_magnitude_sd = value;
  } else {
    throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
  }
}

}  // namespace vtools::ssup
