// JSON configuration: sections params, raibert, sim, references, planner.
// Unknown keys are rejected with a message naming the offending key.
#pragma once

#include <string>

#include "hopper/jerk_planner.hpp"
#include "hopper/model.hpp"
#include "hopper/raibert.hpp"
#include "hopper/sim.hpp"

namespace hopper {

struct Config {
  HopperParams params;
  RaibertGains gains;
  sim::SimConfig sim;
  plan::PlannerOptions planner;
};

/// Built-in defaults (hand-tuned for the default parameter set).
Config default_config();

/// Parses a config from JSON text. Missing sections/keys keep defaults.
/// Throws InvalidConfig naming the offending key on unknown keys, type
/// errors, or an `alpha` inconsistent with m / I_b.
Config parse_config(const std::string& json_text);

/// Loads a config file. Throws InvalidConfig when unreadable.
Config load_config(const std::string& path);

/// Serializes a config back to JSON (the README example is produced
/// this way).
std::string config_to_json(const Config& config);

}  // namespace hopper
