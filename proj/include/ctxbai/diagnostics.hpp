#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ctxbai/allocation.hpp"
#include "ctxbai/bandit.hpp"
#include "ctxbai/estimation.hpp"
#include "ctxbai/strategy.hpp"

namespace ctxbai {

// Per-trial martingale diagnostics for the score differences
//   xi^a_t = (phi^best_t - phi^a_t - gap_a) / sqrt(T * V_a),
// normalized by the true per-arm variance constant V_a from the rate
// report. Records xi at a fixed grid of rounds and accumulates the sum of
// per-round conditional second moments E[xi_t^2 | past], evaluated in
// closed form by marginalizing the context and the randomized arm under
// the exact reward laws. Rounds whose arm is forced by the initialization
// block use the degenerate-arm variant of the same expectation.
class TrialRecorder {
public:
    TrialRecorder(const BanditInstance& instance, const RsAipwStrategy& strategy,
                  std::vector<std::int64_t> xi_grid, bool keep_full_xi = false);

    // Call after the reward is drawn and before the strategy ingests it.
    void on_round(std::int64_t t, int context, int arm, double y);
    RoundHook hook();

    int num_tracked_arms() const { return static_cast<int>(arms_.size()); }
    int tracked_arm(int slot) const { return arms_[static_cast<std::size_t>(slot)]; }

    // xi values at the requested grid rounds (NaN until the round ran).
    const std::vector<double>& xi_at_grid(int slot) const {
        return xi_grid_values_[static_cast<std::size_t>(slot)];
    }
    const std::vector<std::int64_t>& grid() const { return xi_grid_; }

    // | sum_t E[xi_t^2 | past] - 1 | for the rounds seen so far.
    double moment_sum_abs_error(int slot) const;
    double moment_sum(int slot) const;

    // Full xi trajectory, kept only when requested at construction.
    const std::vector<double>& xi_log(int slot) const;

private:
    double conditional_second_moment(std::int64_t t, int slot) const;

    const BanditInstance& instance_;
    const RsAipwStrategy& strategy_;
    std::int64_t budget_;
    std::vector<int> arms_;            // suboptimal arms, ascending
    std::vector<double> gap_;          // marginal gap per slot
    std::vector<double> variance_;     // V_a per slot
    std::vector<std::int64_t> xi_grid_;
    std::vector<std::vector<double>> xi_grid_values_;
    std::vector<double> moment_sum_;   // Kahan pairs per slot
    std::vector<double> moment_comp_;
    bool keep_full_xi_;
    std::vector<std::vector<double>> xi_full_;
    mutable std::vector<double> scratch_w_;
};

// Mean of |sum - 1| over per-trial conditional-moment sums.
double variance_convergence(const std::vector<double>& per_trial_moment_sums);

// Sup over (arm, context) of |plug-in allocation - optimal allocation|.
double allocation_convergence(const NuisanceState& state,
                              const BanditInstance& instance);

struct BudgetOutcome {
    std::int64_t budget = 0;
    std::int64_t n_trials = 0;
    std::int64_t misidentified = 0;
};

// Least-squares fit of -log p_hat on the budget. Budgets with fewer than
// 10 misidentification events are dropped as too noisy for the log;
// fitting needs at least 3 admissible budgets. Standard errors come from
// the binomial variance of p_hat through the delta method on the log.
struct DecayFit {
    std::vector<std::int64_t> budgets;
    std::vector<double> p_hat;
    std::vector<double> p_se;
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

DecayFit fit_decay_rate(const std::vector<BudgetOutcome>& outcomes);

}  // namespace ctxbai
