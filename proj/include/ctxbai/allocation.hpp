#pragma once

#include <vector>

#include "ctxbai/bandit.hpp"

namespace ctxbai {

// Per-context probability vector over arms, stored row-major as w[a][x].
struct AllocationTable {
    int K = 0;
    int M = 0;
    std::vector<double> w;

    AllocationTable() = default;
    AllocationTable(int arms, int contexts)
        : K(arms), M(contexts),
          w(static_cast<std::size_t>(arms) * static_cast<std::size_t>(contexts), 0.0) {}

    double at(int a, int x) const {
        return w[static_cast<std::size_t>(a) * static_cast<std::size_t>(M) +
                 static_cast<std::size_t>(x)];
    }
    double& at(int a, int x) {
        return w[static_cast<std::size_t>(a) * static_cast<std::size_t>(M) +
                 static_cast<std::size_t>(x)];
    }

    // Every entry in (0, 1], each context column summing to 1 within 1e-12.
    void validate() const;
};

// Closed-form optimal target allocation from the conditional standard
// deviations (one row per arm) and the best arm:
//   w(best|x) = s_best(x) / (s_best(x) + sqrt(sum_{b != best} s_b(x)^2))
//   w(a|x)    = (1 - w(best|x)) * s_a(x)^2 / sum_{b != best} s_b(x)^2
// Rejects sd <= 0 and K < 2.
AllocationTable optimal_allocation(const std::vector<std::vector<double>>& sds,
                                   int best);
AllocationTable optimal_allocation(const BanditInstance& instance);

// All entries 1/K. Allows K = 1 (the table is then identically 1).
AllocationTable uniform_allocation(int K, int M);

// Omega_a(w) = E_x[ s_best(x)^2 / w(best|x) + s_a(x)^2 / w(a|x) ].
// Rejects arm == best_arm.
double omega(const BanditInstance& instance, const AllocationTable& w, int arm);

struct MaximinValue {
    double value = 0.0;
    int binding_arm = -1;  // attains the min; ties go to the lowest index
};

// min over suboptimal arms of gap_a^2 / (2 * Omega_a(w)).
MaximinValue maximin_objective(const BanditInstance& instance,
                               const AllocationTable& w);

struct OracleResult {
    AllocationTable table;
    double value = 0.0;  // maximin_objective at the grid solution
};

// Independent verification of the closed form: for each context, minimizes
// max over suboptimal arms of s_best^2/w(best) + s_a^2/w(a) by search over
// the probability simplex at resolution grid_step (exhaustive for K <= 3,
// coarse-to-fine grid sweeps for larger K, repeated until a sweep no longer
// improves the incumbent). Rejects K > 5, M > 3, or grid_step < 1e-3.
OracleResult oracle_maximin_allocation(const BanditInstance& instance,
                                       double grid_step);

// Theorem-level decay exponents. Delta0 is the minimum suboptimal marginal
// gap; the binding (smallest-gap) arm dominates the misidentification event.
//
// lower: Delta0^2 / (2 E[(s_best(X) + sqrt(sum_{b != best} s_b(X)^2))^2])
double lower_bound_rate(const BanditInstance& instance);

// Equal-variance-class bound, Delta0^2 / (2 E[K s_best(X)^2]), stated with
// the same 1/2 convention as lower_bound_rate.
double equal_variance_rate(const BanditInstance& instance);

struct RateReport {
    double lower_exponent = 0.0;
    double upper_exponent = 0.0;
    // Per-arm denominator E[(s_best + sqrt(sum s_b^2))^2 + (gap_a(X) - gap_a)^2]
    // (zero at the best arm). Doubles as the variance constant normalizing
    // the martingale diagnostics.
    std::vector<double> per_arm_omega;
    int binding_arm = -1;
    // True when every per-context gap equals the marginal gap, the regime
    // in which the lower-bound formula formally applies.
    bool context_constant_gaps = false;
};

// upper: min over a of gap_a^2 / (2 * per_arm_omega[a]), the strategy-side
// exponent; reduces to lower_bound_rate when gaps are context-constant.
RateReport upper_bound_rate(const BanditInstance& instance);

// Shared helper: per_arm_omega[a] for one suboptimal arm.
double theorem4_variance(const BanditInstance& instance, int arm);

}  // namespace ctxbai
