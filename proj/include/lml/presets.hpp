#pragma once

#include <string>
#include <vector>

#include "lml/trainer.hpp"

namespace lml {

// Named experiment presets. "loss-weight-grid" expands into six runs
// sweeping (lambda1, lambda2, lambda3); the others set the weights of a
// single run.
bool is_grid_preset(const std::string& name);
std::vector<std::string> preset_names();

// Applies a non-grid preset; throws ConfigError on unknown names.
void apply_preset(RunConfig& cfg, const std::string& name);

// Expands the grid preset into fully-named sub-configurations (sharing
// everything but the loss weights and preset name).
std::vector<RunConfig> expand_grid(const RunConfig& base);

}  // namespace lml
