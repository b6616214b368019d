#include "ctxbai/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ctxbai {

namespace {

constexpr double kColumnSumTol = 1e-12;
constexpr double kGapConstTol = 1e-12;

// Enumerates integer count vectors c of length K with c[i] in [lo[i], hi[i]]
// and sum == n, invoking visit(c) for each. Counts map to weights c[i]/n.
void for_each_composition(const std::vector<int>& lo, const std::vector<int>& hi,
                          int n, std::vector<int>& c, std::size_t index,
                          int remaining,
                          const std::function<void(const std::vector<int>&)>& visit) {
    const std::size_t K = lo.size();
    if (index + 1 == K) {
        if (remaining >= lo[index] && remaining <= hi[index]) {
            c[index] = remaining;
            visit(c);
        }
        return;
    }
    int suffix_lo = 0;
    int suffix_hi = 0;
    for (std::size_t j = index + 1; j < K; ++j) {
        suffix_lo += lo[j];
        suffix_hi += hi[j];
    }
    const int from = std::max(lo[index], remaining - suffix_hi);
    const int to = std::min(hi[index], remaining - suffix_lo);
    for (int v = from; v <= to; ++v) {
        c[index] = v;
        for_each_composition(lo, hi, n, c, index + 1, remaining - v, visit);
    }
}

// Worst suboptimal-arm value of the per-context program at integer counts:
//   max over a != best of s_best^2/w(best) + s_a^2/w(a),  w(i) = c[i]/n.
double context_objective(const std::vector<double>& variances, int best, int n,
                         const std::vector<int>& c) {
    const double dn = static_cast<double>(n);
    double worst_ratio = 0.0;
    for (std::size_t a = 0; a < variances.size(); ++a) {
        if (static_cast<int>(a) == best) continue;
        worst_ratio = std::max(worst_ratio, variances[a] / static_cast<double>(c[a]));
    }
    return dn * (variances[static_cast<std::size_t>(best)] /
                     static_cast<double>(c[static_cast<std::size_t>(best)]) +
                 worst_ratio);
}

// Exhaustive search over [lo, hi] at resolution n; returns best counts found
// starting from (and possibly keeping) the incumbent.
void exhaustive_pass(const std::vector<double>& variances, int best, int n,
                     const std::vector<int>& lo, const std::vector<int>& hi,
                     std::vector<int>& incumbent, double& incumbent_value) {
    const std::size_t K = variances.size();
    std::vector<int> c(K, 0);
    for_each_composition(lo, hi, n, c, 0, n,
                         [&](const std::vector<int>& candidate) {
                             const double value =
                                 context_objective(variances, best, n, candidate);
                             if (value < incumbent_value) {
                                 incumbent_value = value;
                                 incumbent = candidate;
                             }
                         });
}

// Minimizes the per-context program on the simplex grid of resolution n.
// K <= 3 is searched exhaustively; K >= 4 coarse-to-fine, each level
// followed by single-quantum pairwise sweeps until no sweep improves.
std::vector<int> solve_context_grid(const std::vector<double>& variances,
                                    int best, int n) {
    const std::size_t K = variances.size();
    const int k = static_cast<int>(K);
    std::vector<int> incumbent(K, 0);
    double incumbent_value = std::numeric_limits<double>::infinity();

    const bool direct = k <= 3;
    int level = direct ? n : std::min(n, 100);

    {
        std::vector<int> lo(K, 1);
        std::vector<int> hi(K, level - (k - 1));
        exhaustive_pass(variances, best, level, lo, hi, incumbent, incumbent_value);
    }
    while (level < n) {
        const int next = std::min(n, level * 10);
        const int scale_num = next;
        const int band = 2 * (next / level) + 5;
        std::vector<int> base(K), lo(K), hi(K);
        long long base_sum = 0;
        for (std::size_t i = 0; i < K; ++i) {
            base[i] = static_cast<int>(
                static_cast<long long>(incumbent[i]) * scale_num / level);
            base_sum += base[i];
        }
        base[0] += static_cast<int>(next - base_sum);  // repair rounding drift
        for (std::size_t i = 0; i < K; ++i) {
            lo[i] = std::max(1, base[i] - band);
            hi[i] = std::min(next - (k - 1), base[i] + band);
        }
        incumbent_value = std::numeric_limits<double>::infinity();
        exhaustive_pass(variances, best, next, lo, hi, incumbent, incumbent_value);
        level = next;
    }

    // Pairwise quantum transfers at the final resolution.
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                if (i == j || incumbent[i] <= 1) continue;
                incumbent[i] -= 1;
                incumbent[j] += 1;
                const double value = context_objective(variances, best, n, incumbent);
                if (value < incumbent_value - 1e-10) {
                    incumbent_value = value;
                    improved = true;
                } else {
                    incumbent[i] += 1;
                    incumbent[j] -= 1;
                }
            }
        }
    }
    return incumbent;
}

}  // namespace

void AllocationTable::validate() const {
    for (int x = 0; x < M; ++x) {
        double sum = 0.0;
        for (int a = 0; a < K; ++a) {
            const double v = at(a, x);
            if (!(v > 0.0 && v <= 1.0)) {
                throw std::invalid_argument("AllocationTable: entries must be in (0,1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kColumnSumTol) {
            throw std::invalid_argument("AllocationTable: context column must sum to 1");
        }
    }
}

AllocationTable optimal_allocation(const std::vector<std::vector<double>>& sds,
                                   int best) {
    const int K = static_cast<int>(sds.size());
    if (K < 2) {
        throw std::invalid_argument("optimal_allocation: need K >= 2");
    }
    if (best < 0 || best >= K) {
        throw std::invalid_argument("optimal_allocation: best arm out of range");
    }
    const int M = static_cast<int>(sds.front().size());
    AllocationTable table(K, M);
    for (int x = 0; x < M; ++x) {
        double rest_var = 0.0;
        for (int a = 0; a < K; ++a) {
            const double sd = sds[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)];
            if (!(sd > 0.0)) {
                throw std::invalid_argument("optimal_allocation: sd must be > 0");
            }
            if (a != best) {
                rest_var += sd * sd;
            }
        }
        const double rest_sd = std::sqrt(rest_var);
        const double s_best = sds[static_cast<std::size_t>(best)][static_cast<std::size_t>(x)];
        const double w_best = s_best / (s_best + rest_sd);
        table.at(best, x) = w_best;
        for (int a = 0; a < K; ++a) {
            if (a == best) continue;
            const double sd = sds[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)];
            table.at(a, x) = (1.0 - w_best) * (sd * sd) / rest_var;
        }
    }
    return table;
}

AllocationTable optimal_allocation(const BanditInstance& instance) {
    return optimal_allocation(instance.sd_table(), instance.best_arm());
}

AllocationTable uniform_allocation(int K, int M) {
    if (K < 1 || M < 1) {
        throw std::invalid_argument("uniform_allocation: need K >= 1 and M >= 1");
    }
    AllocationTable table(K, M);
    const double v = 1.0 / static_cast<double>(K);
    std::fill(table.w.begin(), table.w.end(), v);
    return table;
}

double omega(const BanditInstance& instance, const AllocationTable& w, int arm) {
    const int best = instance.best_arm();
    if (arm == best) {
        throw std::invalid_argument("omega: arm must differ from the best arm");
    }
    double value = 0.0;
    for (int x = 0; x < instance.num_contexts(); ++x) {
        const double p = instance.context_space().probs[static_cast<std::size_t>(x)];
        const double s_best = instance.conditional_sd(best, x);
        const double s_a = instance.conditional_sd(arm, x);
        value += p * (s_best * s_best / w.at(best, x) + s_a * s_a / w.at(arm, x));
    }
    return value;
}

MaximinValue maximin_objective(const BanditInstance& instance,
                               const AllocationTable& w) {
    const int best = instance.best_arm();
    const std::vector<double> gap = instance.gaps();
    MaximinValue out;
    out.value = std::numeric_limits<double>::infinity();
    for (int a = 0; a < instance.num_arms(); ++a) {
        if (a == best) continue;
        const double g = gap[static_cast<std::size_t>(a)];
        const double value = g * g / (2.0 * omega(instance, w, a));
        if (value < out.value) {
            out.value = value;
            out.binding_arm = a;
        }
    }
    return out;
}

OracleResult oracle_maximin_allocation(const BanditInstance& instance,
                                       double grid_step) {
    if (instance.num_arms() > 5 || instance.num_contexts() > 3) {
        throw std::invalid_argument("oracle_maximin_allocation: instance too large");
    }
    if (!(grid_step >= 1e-3 && grid_step <= 0.5)) {
        throw std::invalid_argument("oracle_maximin_allocation: grid_step must be in [1e-3, 0.5]");
    }
    const int n = static_cast<int>(std::lround(1.0 / grid_step));
    const int K = instance.num_arms();
    const int M = instance.num_contexts();
    const int best = instance.best_arm();

    OracleResult out;
    out.table = AllocationTable(K, M);
    for (int x = 0; x < M; ++x) {
        std::vector<double> variances(static_cast<std::size_t>(K), 0.0);
        for (int a = 0; a < K; ++a) {
            const double sd = instance.conditional_sd(a, x);
            if (!(sd > 0.0)) {
                throw std::invalid_argument("oracle_maximin_allocation: sd must be > 0");
            }
            variances[static_cast<std::size_t>(a)] = sd * sd;
        }
        const std::vector<int> counts = solve_context_grid(variances, best, n);
        for (int a = 0; a < K; ++a) {
            out.table.at(a, x) = static_cast<double>(counts[static_cast<std::size_t>(a)]) /
                                 static_cast<double>(n);
        }
    }
    out.value = maximin_objective(instance, out.table).value;
    return out;
}

namespace {

// E[(s_best(X) + sqrt(sum_{b != best} s_b(X)^2))^2]
double small_gap_denominator(const BanditInstance& instance) {
    const int best = instance.best_arm();
    double value = 0.0;
    for (int x = 0; x < instance.num_contexts(); ++x) {
        const double p = instance.context_space().probs[static_cast<std::size_t>(x)];
        double rest_var = 0.0;
        for (int a = 0; a < instance.num_arms(); ++a) {
            if (a == best) continue;
            const double sd = instance.conditional_sd(a, x);
            rest_var += sd * sd;
        }
        const double s = instance.conditional_sd(best, x) + std::sqrt(rest_var);
        value += p * s * s;
    }
    return value;
}

double min_suboptimal_gap(const BanditInstance& instance) {
    const std::vector<double> gap = instance.gaps();
    double out = std::numeric_limits<double>::infinity();
    for (int a = 0; a < instance.num_arms(); ++a) {
        if (a == instance.best_arm()) continue;
        out = std::min(out, gap[static_cast<std::size_t>(a)]);
    }
    return out;
}

}  // namespace

double lower_bound_rate(const BanditInstance& instance) {
    const double delta = min_suboptimal_gap(instance);
    return delta * delta / (2.0 * small_gap_denominator(instance));
}

double equal_variance_rate(const BanditInstance& instance) {
    const int best = instance.best_arm();
    double mean_var = 0.0;
    for (int x = 0; x < instance.num_contexts(); ++x) {
        const double p = instance.context_space().probs[static_cast<std::size_t>(x)];
        const double sd = instance.conditional_sd(best, x);
        mean_var += p * sd * sd;
    }
    const double delta = min_suboptimal_gap(instance);
    return delta * delta / (2.0 * static_cast<double>(instance.num_arms()) * mean_var);
}

double theorem4_variance(const BanditInstance& instance, int arm) {
    const int best = instance.best_arm();
    if (arm == best) {
        throw std::invalid_argument("theorem4_variance: arm must differ from the best arm");
    }
    const double marginal_gap =
        instance.marginal_mean(best) - instance.marginal_mean(arm);
    double deviation = 0.0;
    for (int x = 0; x < instance.num_contexts(); ++x) {
        const double p = instance.context_space().probs[static_cast<std::size_t>(x)];
        const double context_gap =
            instance.conditional_mean(best, x) - instance.conditional_mean(arm, x);
        const double d = context_gap - marginal_gap;
        deviation += p * d * d;
    }
    return small_gap_denominator(instance) + deviation;
}

RateReport upper_bound_rate(const BanditInstance& instance) {
    const int best = instance.best_arm();
    const std::vector<double> gap = instance.gaps();
    RateReport report;
    report.per_arm_omega.assign(static_cast<std::size_t>(instance.num_arms()), 0.0);
    report.lower_exponent = lower_bound_rate(instance);
    report.upper_exponent = std::numeric_limits<double>::infinity();
    report.context_constant_gaps = true;
    for (int a = 0; a < instance.num_arms(); ++a) {
        if (a == best) continue;
        const double v = theorem4_variance(instance, a);
        report.per_arm_omega[static_cast<std::size_t>(a)] = v;
        const double g = gap[static_cast<std::size_t>(a)];
        const double exponent = g * g / (2.0 * v);
        if (exponent < report.upper_exponent) {
            report.upper_exponent = exponent;
            report.binding_arm = a;
        }
        for (int x = 0; x < instance.num_contexts(); ++x) {
            const double context_gap =
                instance.conditional_mean(best, x) - instance.conditional_mean(a, x);
            if (std::abs(context_gap - g) > kGapConstTol) {
                report.context_constant_gaps = false;
            }
        }
    }
    return report;
}

}  // namespace ctxbai
