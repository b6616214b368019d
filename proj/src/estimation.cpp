#include "ctxbai/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctxbai {

NuisanceState::NuisanceState(int arms, int contexts, MomentBounds bounds)
    : K_(arms), M_(contexts), bounds_(bounds) {
    if (arms < 1 || contexts < 1) {
        throw std::invalid_argument("NuisanceState: need K >= 1 and M >= 1");
    }
    const std::size_t cells = static_cast<std::size_t>(arms) * static_cast<std::size_t>(contexts);
    count_.assign(cells, 0);
    sum_y_.assign(cells, 0.0);
    sum_y2_.assign(cells, 0.0);
}

void NuisanceState::update(int arm, int context, double y) {
    const std::size_t i = cell(arm, context);
    count_[i] += 1;
    sum_y_[i] += y;
    sum_y2_[i] += y * y;
}

double NuisanceState::mu_hat(int arm, int context) const {
    const std::size_t i = cell(arm, context);
    if (count_[i] == 0) {
        return 0.0;
    }
    const double mean = sum_y_[i] / static_cast<double>(count_[i]);
    return std::clamp(mean, -bounds_.c_mu, bounds_.c_mu);
}

double NuisanceState::nu_hat(int arm, int context) const {
    const std::size_t i = cell(arm, context);
    if (count_[i] == 0) {
        return 0.0;
    }
    const double second = sum_y2_[i] / static_cast<double>(count_[i]);
    return std::clamp(second, -bounds_.c_nu, bounds_.c_nu);
}

double NuisanceState::var_hat(int arm, int context) const {
    const double mu = mu_hat(arm, context);
    const double raw = nu_hat(arm, context) - mu * mu;
    return std::clamp(raw, 1.0 / bounds_.c_sigma2, bounds_.c_sigma2);
}

int NuisanceState::plug_in_best(int context) const {
    int best = 0;
    double best_value = mu_hat(0, context);
    for (int a = 1; a < K_; ++a) {
        const double value = mu_hat(a, context);
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    return best;
}

void estimated_allocation(const NuisanceState& state, int context, double* out) {
    const int K = state.num_arms();
    const int best = state.plug_in_best(context);
    double rest_var = 0.0;
    for (int a = 0; a < K; ++a) {
        const double v = state.var_hat(a, context);
        out[a] = v;
        if (a != best) {
            rest_var += v;
        }
    }
    const double s_best = std::sqrt(out[best]);
    const double w_best = s_best / (s_best + std::sqrt(rest_var));
    for (int a = 0; a < K; ++a) {
        out[a] = a == best ? w_best : (1.0 - w_best) * out[a] / rest_var;
    }
}

std::vector<double> estimated_allocation(const NuisanceState& state, int context) {
    std::vector<double> out(static_cast<std::size_t>(state.num_arms()), 0.0);
    estimated_allocation(state, context, out.data());
    return out;
}

AllocationTable estimated_allocation_table(const NuisanceState& state) {
    const int K = state.num_arms();
    const int M = state.num_contexts();
    AllocationTable table(K, M);
    std::vector<double> column(static_cast<std::size_t>(K), 0.0);
    for (int x = 0; x < M; ++x) {
        estimated_allocation(state, x, column.data());
        for (int a = 0; a < K; ++a) {
            table.at(a, x) = column[static_cast<std::size_t>(a)];
        }
    }
    return table;
}

double MixingSchedule::rate(std::int64_t t) const {
    if (!enabled) {
        return 0.0;
    }
    if (t < 1) {
        throw std::invalid_argument("MixingSchedule: round index must be >= 1");
    }
    return std::min(1.0, std::pow(static_cast<double>(t), -exponent));
}

void mixed_allocation_inplace(double* w, int K, std::int64_t t,
                              const MixingSchedule& schedule) {
    const double r = schedule.rate(t);
    if (r == 0.0) {
        return;
    }
    const double uniform = 1.0 / static_cast<double>(K);
    for (int a = 0; a < K; ++a) {
        w[a] = (1.0 - r) * w[a] + r * uniform;
    }
}

std::vector<double> mixed_allocation(const std::vector<double>& w, std::int64_t t,
                                     const MixingSchedule& schedule) {
    std::vector<double> out = w;
    mixed_allocation_inplace(out.data(), static_cast<int>(out.size()), t, schedule);
    return out;
}

}  // namespace ctxbai
