#include "ctxbai/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ctxbai {

BanditInstance InstanceSpec::build() const {
    const std::size_t K = means.size();
    if (K == 0) {
        throw std::invalid_argument("InstanceSpec: no arms given");
    }
    const std::size_t M = context_probs.size();
    std::vector<std::vector<RewardLaw>> laws(K);
    for (std::size_t a = 0; a < K; ++a) {
        if (means[a].size() != M) {
            throw std::invalid_argument("InstanceSpec: means row has wrong width");
        }
        laws[a].reserve(M);
        for (std::size_t x = 0; x < M; ++x) {
            if (family == RewardFamily::kGaussianLocationShift) {
                if (sds.size() != K || sds[a].size() != M) {
                    throw std::invalid_argument("InstanceSpec: sds must match means");
                }
                laws[a].push_back(RewardLaw::gaussian(means[a][x], sds[a][x]));
            } else {
                laws[a].push_back(RewardLaw::bernoulli(means[a][x]));
            }
        }
    }
    return BanditInstance(ContextSpace(context_probs), std::move(laws), bounds);
}

void ExperimentConfig::validate() const {
    if (budgets.empty()) {
        throw std::invalid_argument("ExperimentConfig: no budgets");
    }
    for (std::size_t i = 1; i < budgets.size(); ++i) {
        if (budgets[i] <= budgets[i - 1]) {
            throw std::invalid_argument("ExperimentConfig: budgets must be strictly increasing");
        }
    }
    if (n_trials < 1) {
        throw std::invalid_argument("ExperimentConfig: n_trials must be >= 1");
    }
    const std::int64_t init = static_cast<std::int64_t>(strategy.init_rounds_per_arm) *
                              static_cast<std::int64_t>(instance.means.size());
    if (budgets.front() < init) {
        throw std::invalid_argument("ExperimentConfig: smallest budget below initialization block");
    }
    if (diagnostics.any() && strategy_name != StrategyName::kRsAipw) {
        throw std::invalid_argument("ExperimentConfig: diagnostics require the rs_aipw strategy");
    }
}

TrialOutcome run_trial(const ExperimentConfig& config,
                       const BanditInstance& instance, std::int64_t budget,
                       std::int64_t trial_index) {
    const std::uint64_t stream =
        mix64(mix64(static_cast<std::uint64_t>(budget)),
              static_cast<std::uint64_t>(trial_index));
    RngStream rng(config.base_seed, stream);

    TrialOutcome outcome;
    if (config.strategy_name == StrategyName::kUniformEba) {
        UniformEbaStrategy strategy(instance, config.strategy, budget);
        for (std::int64_t t = 1; t <= budget; ++t) {
            const int x = sample_context(instance, rng);
            strategy_step(strategy, instance, t, x, rng);
        }
        outcome.recommended = strategy.recommend();
        outcome.misidentified = outcome.recommended != instance.best_arm();
        return outcome;
    }

    RsAipwStrategy strategy(instance, config.strategy, budget);
    std::optional<TrialRecorder> recorder;
    RoundHook hook;
    if (config.diagnostics.any()) {
        std::vector<std::int64_t> grid;
        for (std::int64_t t : config.diagnostics.xi_grid) {
            if (t >= 1 && t <= budget) {
                grid.push_back(t);
            }
        }
        recorder.emplace(instance, strategy, grid);
        hook = recorder->hook();
    }
    for (std::int64_t t = 1; t <= budget; ++t) {
        const int x = sample_context(instance, rng);
        strategy_step(strategy, instance, t, x, rng, hook);
    }
    outcome.recommended = strategy.recommend();
    outcome.misidentified = outcome.recommended != instance.best_arm();
    if (recorder) {
        const int slots = recorder->num_tracked_arms();
        for (int s = 0; s < slots; ++s) {
            const auto& values = recorder->xi_at_grid(s);
            outcome.xi_at_grid.insert(outcome.xi_at_grid.end(), values.begin(),
                                      values.end());
            outcome.moment_sums.push_back(recorder->moment_sum(s));
        }
        if (config.diagnostics.allocation) {
            outcome.allocation_distance =
                allocation_convergence(strategy.nuisance(), instance);
        }
    }
    return outcome;
}

namespace {

double sample_mean(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_se(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    return std::sqrt(ss / (static_cast<double>(values.size()) *
                           static_cast<double>(values.size() - 1)));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const BanditInstance instance = config.instance.build();

    const std::size_t num_budgets = config.budgets.size();
    const std::size_t per_budget = static_cast<std::size_t>(config.n_trials);
    const std::size_t total = num_budgets * per_budget;
    std::vector<std::vector<TrialOutcome>> outcomes(num_budgets);
    for (auto& v : outcomes) {
        v.resize(per_budget);
    }

    int threads = config.threads;
    if (threads <= 0) {
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    threads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(threads), total));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total) {
                return;
            }
            const std::size_t b = job / per_budget;
            const std::size_t i = job % per_budget;
            try {
                outcomes[b][i] = run_trial(config, instance, config.budgets[b],
                                           static_cast<std::int64_t>(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(total);
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }

    ExperimentResult result;
    result.version = kVersion;
    result.config_echo = config.echo;
    result.rates = upper_bound_rate(instance);

    std::vector<BudgetOutcome> fit_rows;
    for (std::size_t b = 0; b < num_budgets; ++b) {
        BudgetRow row;
        row.budget = config.budgets[b];
        row.n_trials = config.n_trials;
        for (const TrialOutcome& trial : outcomes[b]) {
            row.misidentified += trial.misidentified ? 1 : 0;
        }
        row.p_hat = static_cast<double>(row.misidentified) /
                    static_cast<double>(row.n_trials);
        row.se = std::sqrt(row.p_hat * (1.0 - row.p_hat) /
                           static_cast<double>(row.n_trials));
        if (row.misidentified > 0) {
            row.neg_log_p_over_t = -std::log(row.p_hat) /
                                   static_cast<double>(row.budget);
        }
        result.rows.push_back(row);
        fit_rows.push_back({row.budget, row.n_trials, row.misidentified});
    }
    try {
        result.decay = fit_decay_rate(fit_rows);
    } catch (const std::invalid_argument& e) {
        result.decay_error = e.what();
    }

    if (config.diagnostics.any()) {
        for (std::size_t b = 0; b < num_budgets; ++b) {
            BudgetDiagnostics diag;
            diag.budget = config.budgets[b];
            std::vector<std::int64_t> grid;
            for (std::int64_t t : config.diagnostics.xi_grid) {
                if (t >= 1 && t <= config.budgets[b]) {
                    grid.push_back(t);
                }
            }
            std::sort(grid.begin(), grid.end());
            const int best = instance.best_arm();
            for (int a = 0; a < instance.num_arms(); ++a) {
                if (a != best) diag.tracked_arms.push_back(a);
            }
            const std::size_t slots = diag.tracked_arms.size();
            diag.xi.resize(slots);
            for (std::size_t s = 0; s < slots; ++s) {
                for (std::size_t g = 0; g < grid.size(); ++g) {
                    std::vector<double> values;
                    values.reserve(per_budget);
                    for (const TrialOutcome& trial : outcomes[b]) {
                        const std::size_t idx = s * grid.size() + g;
                        if (idx < trial.xi_at_grid.size() &&
                            !std::isnan(trial.xi_at_grid[idx])) {
                            values.push_back(trial.xi_at_grid[idx]);
                        }
                    }
                    if (values.empty()) continue;
                    XiGridStat stat;
                    stat.t = grid[g];
                    stat.mean = sample_mean(values);
                    stat.se = sample_se(values, stat.mean);
                    stat.n = static_cast<std::int64_t>(values.size());
                    diag.xi[s].push_back(stat);
                }
            }
            if (config.diagnostics.variance) {
                std::vector<double> sums;
                sums.reserve(per_budget);
                for (const TrialOutcome& trial : outcomes[b]) {
                    if (!trial.moment_sums.empty()) {
                        sums.push_back(trial.moment_sums.front());
                    }
                }
                if (!sums.empty()) {
                    diag.v_t = variance_convergence(sums);
                }
            }
            if (config.diagnostics.allocation) {
                std::vector<double> distances;
                distances.reserve(per_budget);
                for (const TrialOutcome& trial : outcomes[b]) {
                    if (trial.allocation_distance >= 0.0) {
                        distances.push_back(trial.allocation_distance);
                    }
                }
                if (!distances.empty()) {
                    diag.allocation_distance = sample_mean(distances);
                }
            }
            result.diagnostics.push_back(std::move(diag));
        }
    }
    return result;
}

bool operator==(const RateReport& a, const RateReport& b) {
    return a.lower_exponent == b.lower_exponent &&
           a.upper_exponent == b.upper_exponent &&
           a.per_arm_omega == b.per_arm_omega && a.binding_arm == b.binding_arm &&
           a.context_constant_gaps == b.context_constant_gaps;
}

bool operator==(const DecayFit& a, const DecayFit& b) {
    return a.budgets == b.budgets && a.p_hat == b.p_hat && a.p_se == b.p_se &&
           a.slope == b.slope && a.slope_se == b.slope_se &&
           a.intercept == b.intercept && a.r2 == b.r2;
}

bool operator==(const ExperimentResult& a, const ExperimentResult& b) {
    return a.version == b.version && a.config_echo == b.config_echo &&
           a.rates == b.rates && a.rows == b.rows && a.decay == b.decay &&
           a.decay_error == b.decay_error && a.diagnostics == b.diagnostics;
}

namespace {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

void write_csv(const ExperimentResult& result, std::ostream& out) {
    out << "T,trials,misid,p_hat,se,neg_log_p_over_T\n";
    for (const BudgetRow& row : result.rows) {
        out << row.budget << ',' << row.n_trials << ',' << row.misidentified
            << ',' << format_double(row.p_hat) << ',' << format_double(row.se)
            << ',';
        if (row.neg_log_p_over_t) {
            out << format_double(*row.neg_log_p_over_t);
        }
        out << '\n';
    }
}

std::string to_csv(const ExperimentResult& result) {
    std::ostringstream out;
    write_csv(result, out);
    return out.str();
}

}  // namespace ctxbai
