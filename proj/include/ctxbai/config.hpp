#pragma once

#include <string>

#include "ctxbai/harness.hpp"

namespace ctxbai {

// Loads the INI experiment config (sections [instance], [strategy],
// [experiment], [diagnostics], [oracle]; schema documented in the README).
// Throws std::invalid_argument on missing files, unknown values, or
// malformed entries.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text);

}  // namespace ctxbai
