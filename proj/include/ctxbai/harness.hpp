#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxbai/bandit.hpp"
#include "ctxbai/diagnostics.hpp"
#include "ctxbai/strategy.hpp"

namespace ctxbai {

inline constexpr const char* kVersion = "0.1.0";

// Declarative instance description, buildable into a BanditInstance.
struct InstanceSpec {
    RewardFamily family = RewardFamily::kGaussianLocationShift;
    std::vector<double> context_probs;
    std::vector<std::vector<double>> means;  // K rows of M entries
    std::vector<std::vector<double>> sds;    // Gaussian only, same shape
    MomentBounds bounds{};

    BanditInstance build() const;
};

enum class StrategyName { kRsAipw, kUniformEba };

struct DiagnosticsRequest {
    std::vector<std::int64_t> xi_grid;  // non-empty enables residual recording
    bool variance = false;
    bool allocation = false;

    bool any() const { return !xi_grid.empty() || variance || allocation; }
};

struct ExperimentConfig {
    InstanceSpec instance;
    StrategyName strategy_name = StrategyName::kRsAipw;
    StrategyConfig strategy{};
    std::vector<std::int64_t> budgets;
    std::int64_t n_trials = 1;
    std::uint64_t base_seed = 1;
    int threads = 0;  // <= 0 selects the hardware thread count
    std::string out_path;
    enum class Format { kCsv, kJson } format = Format::kCsv;
    DiagnosticsRequest diagnostics;
    double oracle_grid_step = 1e-3;
    // Flat section.key echo of the source config, carried into the result.
    std::map<std::string, std::string> echo;

    void validate() const;
};

// Per-trial result. Diagnostic fields are filled only when requested.
struct TrialOutcome {
    int recommended = -1;
    bool misidentified = false;
    std::vector<double> xi_at_grid;    // slot-major: arms x grid rounds
    std::vector<double> moment_sums;   // per tracked arm
    double allocation_distance = -1.0;
};

// Deterministic function of (base seed, budget, trial index); scheduling
// and thread count never affect it.
TrialOutcome run_trial(const ExperimentConfig& config,
                       const BanditInstance& instance, std::int64_t budget,
                       std::int64_t trial_index);

struct BudgetRow {
    std::int64_t budget = 0;
    std::int64_t n_trials = 0;
    std::int64_t misidentified = 0;
    double p_hat = 0.0;
    double se = 0.0;
    std::optional<double> neg_log_p_over_t;

    bool operator==(const BudgetRow&) const = default;
};

struct XiGridStat {
    std::int64_t t = 0;
    double mean = 0.0;
    double se = 0.0;
    std::int64_t n = 0;

    bool operator==(const XiGridStat&) const = default;
};

struct BudgetDiagnostics {
    std::int64_t budget = 0;
    std::vector<int> tracked_arms;
    std::vector<std::vector<XiGridStat>> xi;  // per tracked arm
    std::optional<double> v_t;
    std::optional<double> allocation_distance;

    bool operator==(const BudgetDiagnostics&) const = default;
};

struct ExperimentResult {
    std::string version;
    std::map<std::string, std::string> config_echo;
    RateReport rates;
    std::vector<BudgetRow> rows;
    std::optional<DecayFit> decay;
    std::string decay_error;  // empty when the fit succeeded
    std::vector<BudgetDiagnostics> diagnostics;
};

bool operator==(const RateReport& a, const RateReport& b);
bool operator==(const DecayFit& a, const DecayFit& b);
bool operator==(const ExperimentResult& a, const ExperimentResult& b);

// Runs n_trials x budgets trials (in parallel when threads allow) and
// aggregates in trial-index order, so the result is identical for any
// thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Fixed header `T,trials,misid,p_hat,se,neg_log_p_over_T`; floats carry 17
// significant digits. The field of an undefined -log(p)/T is left empty.
void write_csv(const ExperimentResult& result, std::ostream& out);
std::string to_csv(const ExperimentResult& result);

}  // namespace ctxbai
