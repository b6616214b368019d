#pragma once

#include <cstdint>
#include <vector>

#include "ctxbai/allocation.hpp"
#include "ctxbai/bandit.hpp"

namespace ctxbai {

// Running per-(arm, context) counts and moment sums. Getters apply the
// clipping scheme: means to [-c_mu, c_mu], raw second moments to
// [-c_nu, c_nu], variances to [1/c_sigma2, c_sigma2]. Empty cells report 0
// for the mean and raw second moment, so their variance sits at the lower
// clip. One state per trial, single writer.
class NuisanceState {
public:
    NuisanceState(int arms, int contexts, MomentBounds bounds = {});

    void update(int arm, int context, double y);

    std::int64_t count(int arm, int context) const { return count_[cell(arm, context)]; }
    double sum_y(int arm, int context) const { return sum_y_[cell(arm, context)]; }
    double sum_y2(int arm, int context) const { return sum_y2_[cell(arm, context)]; }

    double mu_hat(int arm, int context) const;
    double nu_hat(int arm, int context) const;
    double var_hat(int arm, int context) const;

    // Empirical best arm at a context: argmax of mu_hat, ties to the lowest
    // index.
    int plug_in_best(int context) const;

    int num_arms() const { return K_; }
    int num_contexts() const { return M_; }
    const MomentBounds& bounds() const { return bounds_; }

private:
    std::size_t cell(int arm, int context) const {
        return static_cast<std::size_t>(arm) * static_cast<std::size_t>(M_) +
               static_cast<std::size_t>(context);
    }

    int K_;
    int M_;
    MomentBounds bounds_;
    std::vector<std::int64_t> count_;
    std::vector<double> sum_y_;
    std::vector<double> sum_y2_;
};

// Plug-in target allocation at one context: the closed-form optimal
// allocation evaluated at the clipped variance estimates, with the
// empirical best arm in the role of the best arm. Strictly positive,
// sums to 1. The span form writes K entries into `out`.
std::vector<double> estimated_allocation(const NuisanceState& state, int context);
void estimated_allocation(const NuisanceState& state, int context, double* out);

// Full K x M plug-in table.
AllocationTable estimated_allocation_table(const NuisanceState& state);

// Stabilization mixing rate r_t = min(1, t^-exponent); disabled schedules
// report 0 for every round.
struct MixingSchedule {
    bool enabled = true;
    double exponent = 0.5;

    double rate(std::int64_t t) const;
};

// (1 - r_t) w + r_t / K per arm.
std::vector<double> mixed_allocation(const std::vector<double>& w, std::int64_t t,
                                     const MixingSchedule& schedule);
void mixed_allocation_inplace(double* w, int K, std::int64_t t,
                              const MixingSchedule& schedule);

}  // namespace ctxbai
