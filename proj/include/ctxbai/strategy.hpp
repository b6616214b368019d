#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ctxbai/allocation.hpp"
#include "ctxbai/bandit.hpp"
#include "ctxbai/estimation.hpp"

namespace ctxbai {

// Running sums of the per-round scores phi^a. The estimator for arm a after
// T rounds is sum_phi[a] / T.
struct AipwState {
    std::vector<double> sum_phi;
    std::int64_t t = 0;

    explicit AipwState(int arms) : sum_phi(static_cast<std::size_t>(arms), 0.0) {}

    void accumulate(const double* phi) {
        for (std::size_t a = 0; a < sum_phi.size(); ++a) {
            sum_phi[a] += phi[a];
        }
        ++t;
    }
};

// Scores for one round, Eq.-(3) shape:
//   phi^a = mu_at_x[a]                                   for a != chosen
//   phi^a = (y - mu_at_x[a]) / w_at_x[a] + mu_at_x[a]    for a == chosen
// The snapshots must be the values that were in force when the arm was
// drawn, i.e. measurable with respect to the past only. Rejects
// w_at_x[chosen] <= 0, which cannot occur for a valid allocation and
// signals internal corruption.
void aipw_scores(double y, int chosen, const double* mu_at_x,
                 const double* w_at_x, int K, double* phi);
std::vector<double> aipw_scores(double y, int chosen,
                                const std::vector<double>& mu_at_x,
                                const std::vector<double>& w_at_x);

// RS rule: first arm a with gamma <= w[0] + ... + w[a].
int inverse_cdf_arm(const double* w, int K, double gamma);

// Ties resolve to the lowest index.
int argmax_lowest_index(const double* values, int n);

struct StrategyConfig {
    MomentBounds bounds{};
    MixingSchedule mixing{};
    int init_rounds_per_arm = 1;
    bool record_diagnostics = false;
    enum class NuisanceMode {
        kEstimate,       // clipped running estimates (the strategy proper)
        kOracle,         // true means/variances and the true target allocation
        kFrozenUniform,  // true means but a uniform allocation that never adapts
    } nuisance_mode = NuisanceMode::kEstimate;
};

// Sequential interface shared by the strategies: one choose/observe pair
// per round, recommendation after the budget is exhausted. A strategy
// object is confined to one trial.
class SequentialStrategy {
public:
    virtual ~SequentialStrategy() = default;

    // Consumes exactly one uniform, including rounds whose arm is forced.
    virtual int choose(std::int64_t t, int context, RngStream& rng) = 0;
    virtual void observe(std::int64_t t, int context, int arm, double y) = 0;
    virtual int recommend() const = 0;
};

class RsAipwStrategy : public SequentialStrategy {
public:
    RsAipwStrategy(const BanditInstance& instance, StrategyConfig config,
                   std::int64_t budget);

    // Round-robin arm (t-1) mod K inside the initialization block, then the
    // inverse-CDF arm for one uniform against the current sampling
    // probabilities at the observed context.
    int choose(std::int64_t t, int context, RngStream& rng) override;

    // Accumulates the scores computed from the pre-round snapshot, then
    // folds the reward into the nuisance state. The update strictly follows
    // the accumulation; reversing the order breaks the martingale structure
    // of the score differences.
    void observe(std::int64_t t, int context, int arm, double y) override;

    int recommend() const override;

    // Sampling probabilities in force in round t at a context: uniform in
    // the initialization block, the (mixed) plug-in allocation afterwards.
    // Depends only on rewards observed before round t. Writes K entries.
    void sampling_probs(std::int64_t t, int context, double* out) const;
    std::vector<double> sampling_probs(std::int64_t t, int context) const;

    // Conditional-mean snapshot used for round-t scores at a context.
    double mu_snapshot(std::int64_t t, int arm, int context) const;

    std::int64_t init_rounds() const { return init_rounds_; }
    std::int64_t budget() const { return budget_; }
    const NuisanceState& nuisance() const { return nuisance_; }
    const AipwState& aipw() const { return aipw_; }
    const StrategyConfig& config() const { return config_; }

private:
    const BanditInstance& instance_;
    StrategyConfig config_;
    std::int64_t budget_;
    std::int64_t init_rounds_;
    NuisanceState nuisance_;
    AipwState aipw_;
    AllocationTable oracle_table_;  // nuisance_mode != kEstimate only
    std::vector<double> true_means_;
    std::vector<double> pending_w_;
    std::int64_t pending_t_ = 0;
    int pending_context_ = -1;
    std::vector<double> scratch_phi_;
};

// Uniform sampling with the empirical-best-arm recommendation. Shares the
// round-robin initialization block so every arm has at least one
// observation when T >= K * init_rounds_per_arm.
class UniformEbaStrategy : public SequentialStrategy {
public:
    UniformEbaStrategy(const BanditInstance& instance, StrategyConfig config,
                       std::int64_t budget);

    int choose(std::int64_t t, int context, RngStream& rng) override;
    void observe(std::int64_t t, int context, int arm, double y) override;
    int recommend() const override;

private:
    int K_;
    std::int64_t budget_;
    std::int64_t init_rounds_;
    std::int64_t rounds_done_ = 0;
    std::vector<double> sum_y_;
    std::vector<std::int64_t> count_;
};

// Called once per round after the reward is drawn and before the strategy
// ingests it, so the strategy state still reflects the past only.
using RoundHook = std::function<void(std::int64_t t, int context, int arm, double y)>;

// One full round: choose -> sample_reward -> hook -> observe.
std::pair<int, double> strategy_step(SequentialStrategy& strategy,
                                     const BanditInstance& instance,
                                     std::int64_t t, int context, RngStream& rng,
                                     const RoundHook& hook = nullptr);

}  // namespace ctxbai
