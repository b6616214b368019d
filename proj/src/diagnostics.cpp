#include "ctxbai/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctxbai {

TrialRecorder::TrialRecorder(const BanditInstance& instance,
                             const RsAipwStrategy& strategy,
                             std::vector<std::int64_t> xi_grid, bool keep_full_xi)
    : instance_(instance),
      strategy_(strategy),
      budget_(strategy.budget()),
      xi_grid_(std::move(xi_grid)),
      keep_full_xi_(keep_full_xi),
      scratch_w_(static_cast<std::size_t>(instance.num_arms()), 0.0) {
    std::sort(xi_grid_.begin(), xi_grid_.end());
    const int best = instance_.best_arm();
    const std::vector<double> gaps = instance_.gaps();
    for (int a = 0; a < instance_.num_arms(); ++a) {
        if (a == best) continue;
        arms_.push_back(a);
        gap_.push_back(gaps[static_cast<std::size_t>(a)]);
        variance_.push_back(theorem4_variance(instance_, a));
    }
    xi_grid_values_.assign(arms_.size(),
                           std::vector<double>(xi_grid_.size(),
                                               std::numeric_limits<double>::quiet_NaN()));
    moment_sum_.assign(arms_.size(), 0.0);
    moment_comp_.assign(arms_.size(), 0.0);
    if (keep_full_xi_) {
        xi_full_.assign(arms_.size(), {});
        for (auto& log : xi_full_) {
            log.reserve(static_cast<std::size_t>(budget_));
        }
    }
}

RoundHook TrialRecorder::hook() {
    return [this](std::int64_t t, int context, int arm, double y) {
        on_round(t, context, arm, y);
    };
}

double TrialRecorder::conditional_second_moment(std::int64_t t, int slot) const {
    const int best = instance_.best_arm();
    const int a = arms_[static_cast<std::size_t>(slot)];
    const double gap = gap_[static_cast<std::size_t>(slot)];
    const bool forced = t <= strategy_.init_rounds();
    const int forced_arm = forced
        ? static_cast<int>((t - 1) % instance_.num_arms())
        : -1;
    double moment = 0.0;
    for (int x = 0; x < instance_.num_contexts(); ++x) {
        const double p = instance_.context_space().probs[static_cast<std::size_t>(x)];
        strategy_.sampling_probs(t, x, scratch_w_.data());
        const double w_best = scratch_w_[static_cast<std::size_t>(best)];
        const double w_a = scratch_w_[static_cast<std::size_t>(a)];
        const double mu_best = instance_.conditional_mean(best, x);
        const double mu_a = instance_.conditional_mean(a, x);
        const double var_best = instance_.law(best, x).variance();
        const double var_a = instance_.law(a, x).variance();
        const double m_best = strategy_.mu_snapshot(t, best, x);
        const double m_a = strategy_.mu_snapshot(t, a, x);
        const double e_best = mu_best - m_best;  // conditional bias of the snapshot
        const double e_a = mu_a - m_a;
        const double c = m_best - m_a - gap;
        double cell;
        if (!forced) {
            // Randomized arm: indicators integrate to the sampling probabilities.
            cell = (var_best + e_best * e_best) / w_best +
                   (var_a + e_a * e_a) / w_a +
                   2.0 * c * (e_best - e_a) + c * c;
        } else if (forced_arm == best) {
            cell = (var_best + e_best * e_best) / (w_best * w_best) +
                   2.0 * c * e_best / w_best + c * c;
        } else if (forced_arm == a) {
            cell = (var_a + e_a * e_a) / (w_a * w_a) -
                   2.0 * c * e_a / w_a + c * c;
        } else {
            cell = c * c;
        }
        moment += p * cell;
    }
    return moment /
           (static_cast<double>(budget_) * variance_[static_cast<std::size_t>(slot)]);
}

void TrialRecorder::on_round(std::int64_t t, int context, int arm, double y) {
    const int best = instance_.best_arm();
    for (std::size_t slot = 0; slot < arms_.size(); ++slot) {
        const int a = arms_[slot];
        strategy_.sampling_probs(t, context, scratch_w_.data());
        const double m_best = strategy_.mu_snapshot(t, best, context);
        const double m_a = strategy_.mu_snapshot(t, a, context);
        double phi_best = m_best;
        double phi_a = m_a;
        if (arm == best) {
            phi_best += (y - m_best) / scratch_w_[static_cast<std::size_t>(best)];
        } else if (arm == a) {
            phi_a += (y - m_a) / scratch_w_[static_cast<std::size_t>(a)];
        }
        const double xi = (phi_best - phi_a - gap_[slot]) /
                          std::sqrt(static_cast<double>(budget_) * variance_[slot]);
        const auto at = std::lower_bound(xi_grid_.begin(), xi_grid_.end(), t);
        if (at != xi_grid_.end() && *at == t) {
            xi_grid_values_[slot][static_cast<std::size_t>(at - xi_grid_.begin())] = xi;
        }
        if (keep_full_xi_) {
            xi_full_[slot].push_back(xi);
        }
        // Kahan accumulation keeps the oracle-nuisance sum at 1 to within
        // rounding of the individual terms.
        const double term = conditional_second_moment(t, static_cast<int>(slot));
        const double adjusted = term - moment_comp_[slot];
        const double next = moment_sum_[slot] + adjusted;
        moment_comp_[slot] = (next - moment_sum_[slot]) - adjusted;
        moment_sum_[slot] = next;
    }
}

double TrialRecorder::moment_sum(int slot) const {
    return moment_sum_[static_cast<std::size_t>(slot)];
}

double TrialRecorder::moment_sum_abs_error(int slot) const {
    return std::abs(moment_sum_[static_cast<std::size_t>(slot)] - 1.0);
}

const std::vector<double>& TrialRecorder::xi_log(int slot) const {
    if (!keep_full_xi_) {
        throw std::logic_error("TrialRecorder: full xi log was not requested");
    }
    return xi_full_[static_cast<std::size_t>(slot)];
}

double variance_convergence(const std::vector<double>& per_trial_moment_sums) {
    if (per_trial_moment_sums.empty()) {
        throw std::invalid_argument("variance_convergence: no trials recorded");
    }
    double total = 0.0;
    for (double sum : per_trial_moment_sums) {
        total += std::abs(sum - 1.0);
    }
    return total / static_cast<double>(per_trial_moment_sums.size());
}

double allocation_convergence(const NuisanceState& state,
                              const BanditInstance& instance) {
    const AllocationTable estimated = estimated_allocation_table(state);
    const AllocationTable target = optimal_allocation(instance);
    double sup = 0.0;
    for (int a = 0; a < estimated.K; ++a) {
        for (int x = 0; x < estimated.M; ++x) {
            sup = std::max(sup, std::abs(estimated.at(a, x) - target.at(a, x)));
        }
    }
    return sup;
}

DecayFit fit_decay_rate(const std::vector<BudgetOutcome>& outcomes) {
    DecayFit fit;
    std::vector<double> trials;
    for (const BudgetOutcome& row : outcomes) {
        if (row.n_trials < 1 || row.misidentified < 0 ||
            row.misidentified > row.n_trials) {
            throw std::invalid_argument("fit_decay_rate: malformed outcome row");
        }
        if (row.misidentified < 10) {
            continue;  // p_hat below 10/N, log too unstable
        }
        const double p = static_cast<double>(row.misidentified) /
                         static_cast<double>(row.n_trials);
        fit.budgets.push_back(row.budget);
        fit.p_hat.push_back(p);
        fit.p_se.push_back(std::sqrt(p * (1.0 - p) /
                                     static_cast<double>(row.n_trials)));
        trials.push_back(static_cast<double>(row.n_trials));
    }
    const std::size_t n = fit.budgets.size();
    if (n < 3) {
        throw std::invalid_argument("fit_decay_rate: fewer than 3 admissible budgets");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    std::vector<double> y(n, 0.0);
    std::vector<double> var_y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = -std::log(fit.p_hat[i]);
        // Var(log p_hat) ~= (1 - p) / (N p) by the delta method.
        var_y[i] = (1.0 - fit.p_hat[i]) / (fit.p_hat[i] * trials[i]);
        mean_x += static_cast<double>(fit.budgets[i]);
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(fit.budgets[i]) - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    double slope_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double weight = (static_cast<double>(fit.budgets[i]) - mean_x) / sxx;
        slope_var += weight * weight * var_y[i];
    }
    fit.slope_se = std::sqrt(slope_var);
    return fit;
}

}  // namespace ctxbai
