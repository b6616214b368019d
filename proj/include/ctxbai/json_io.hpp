#pragma once

#include <nlohmann/json_fwd.hpp>

#include "ctxbai/estimation.hpp"
#include "ctxbai/harness.hpp"

namespace ctxbai {

// Experiment result document. Parsing the emitted JSON reproduces the
// result exactly, including every double bit for bit.
nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

// Allocation table and rate report as emitted by the `allocation` command.
nlohmann::json allocation_to_json(const AllocationTable& table);
nlohmann::json rate_report_to_json(const RateReport& report);

// Nuisance snapshot (counts and clipped moment tables).
nlohmann::json nuisance_snapshot_json(const NuisanceState& state);

}  // namespace ctxbai
