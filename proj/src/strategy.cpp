#include "ctxbai/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctxbai {

void aipw_scores(double y, int chosen, const double* mu_at_x,
                 const double* w_at_x, int K, double* phi) {
    if (!(w_at_x[chosen] > 0.0)) {
        throw std::logic_error("aipw_scores: nonpositive sampling probability");
    }
    for (int a = 0; a < K; ++a) {
        phi[a] = mu_at_x[a];
    }
    phi[chosen] += (y - mu_at_x[chosen]) / w_at_x[chosen];
}

std::vector<double> aipw_scores(double y, int chosen,
                                const std::vector<double>& mu_at_x,
                                const std::vector<double>& w_at_x) {
    std::vector<double> phi(mu_at_x.size(), 0.0);
    aipw_scores(y, chosen, mu_at_x.data(), w_at_x.data(),
                static_cast<int>(mu_at_x.size()), phi.data());
    return phi;
}

int inverse_cdf_arm(const double* w, int K, double gamma) {
    double cum = 0.0;
    for (int a = 0; a < K; ++a) {
        cum += w[a];
        if (gamma <= cum) {
            return a;
        }
    }
    return K - 1;  // cum rounding below 1
}

int argmax_lowest_index(const double* values, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

RsAipwStrategy::RsAipwStrategy(const BanditInstance& instance,
                               StrategyConfig config, std::int64_t budget)
    : instance_(instance),
      config_(config),
      budget_(budget),
      init_rounds_(0),
      nuisance_(instance.num_arms(), instance.num_contexts(), config.bounds),
      aipw_(instance.num_arms()),
      pending_w_(static_cast<std::size_t>(instance.num_arms()), 0.0),
      scratch_phi_(static_cast<std::size_t>(instance.num_arms()), 0.0) {
    if (config_.init_rounds_per_arm < 1) {
        throw std::invalid_argument("StrategyConfig: init_rounds_per_arm must be >= 1");
    }
    const bool estimate = config_.nuisance_mode == StrategyConfig::NuisanceMode::kEstimate;
    // With known nuisances there is nothing to warm up, so sampling is
    // randomized from the first round and every round keeps the
    // conditional-expectation identity exact.
    init_rounds_ = estimate
        ? static_cast<std::int64_t>(config_.init_rounds_per_arm) * instance.num_arms()
        : 0;
    if (budget_ < std::max<std::int64_t>(init_rounds_, 1)) {
        throw std::invalid_argument("RsAipwStrategy: budget below initialization block");
    }
    if (!estimate) {
        oracle_table_ = config_.nuisance_mode == StrategyConfig::NuisanceMode::kOracle
            ? optimal_allocation(instance_)
            : uniform_allocation(instance_.num_arms(), instance_.num_contexts());
        true_means_.resize(static_cast<std::size_t>(instance_.num_arms()) *
                           static_cast<std::size_t>(instance_.num_contexts()));
        for (int a = 0; a < instance_.num_arms(); ++a) {
            for (int x = 0; x < instance_.num_contexts(); ++x) {
                true_means_[static_cast<std::size_t>(a) *
                                static_cast<std::size_t>(instance_.num_contexts()) +
                            static_cast<std::size_t>(x)] = instance_.conditional_mean(a, x);
            }
        }
    }
}

void RsAipwStrategy::sampling_probs(std::int64_t t, int context, double* out) const {
    const int K = instance_.num_arms();
    if (config_.nuisance_mode != StrategyConfig::NuisanceMode::kEstimate) {
        for (int a = 0; a < K; ++a) {
            out[a] = oracle_table_.at(a, context);
        }
        return;
    }
    if (t <= init_rounds_) {
        const double uniform = 1.0 / static_cast<double>(K);
        for (int a = 0; a < K; ++a) {
            out[a] = uniform;
        }
        return;
    }
    estimated_allocation(nuisance_, context, out);
    mixed_allocation_inplace(out, K, t, config_.mixing);
}

std::vector<double> RsAipwStrategy::sampling_probs(std::int64_t t, int context) const {
    std::vector<double> out(static_cast<std::size_t>(instance_.num_arms()), 0.0);
    sampling_probs(t, context, out.data());
    return out;
}

double RsAipwStrategy::mu_snapshot(std::int64_t t, int arm, int context) const {
    if (config_.nuisance_mode != StrategyConfig::NuisanceMode::kEstimate) {
        return true_means_[static_cast<std::size_t>(arm) *
                               static_cast<std::size_t>(instance_.num_contexts()) +
                           static_cast<std::size_t>(context)];
    }
    // Estimates are pinned to zero across the initialization block.
    return t <= init_rounds_ ? 0.0 : nuisance_.mu_hat(arm, context);
}

int RsAipwStrategy::choose(std::int64_t t, int context, RngStream& rng) {
    if (t != aipw_.t + 1 || t > budget_) {
        throw std::logic_error("RsAipwStrategy: rounds must advance one at a time");
    }
    sampling_probs(t, context, pending_w_.data());
    pending_t_ = t;
    pending_context_ = context;
    const double gamma = rng.uniform();
    if (t <= init_rounds_) {
        return static_cast<int>((t - 1) % instance_.num_arms());
    }
    return inverse_cdf_arm(pending_w_.data(), instance_.num_arms(), gamma);
}

void RsAipwStrategy::observe(std::int64_t t, int context, int arm, double y) {
    if (t != pending_t_ || context != pending_context_) {
        throw std::logic_error("RsAipwStrategy: observe does not match the pending round");
    }
    const int K = instance_.num_arms();
    for (int a = 0; a < K; ++a) {
        scratch_phi_[static_cast<std::size_t>(a)] = mu_snapshot(t, a, context);
    }
    const double w_chosen = pending_w_[static_cast<std::size_t>(arm)];
    if (!(w_chosen > 0.0)) {
        throw std::logic_error("RsAipwStrategy: nonpositive sampling probability");
    }
    scratch_phi_[static_cast<std::size_t>(arm)] +=
        (y - scratch_phi_[static_cast<std::size_t>(arm)]) / w_chosen;
    aipw_.accumulate(scratch_phi_.data());
    nuisance_.update(arm, context, y);
    pending_t_ = 0;
    pending_context_ = -1;
}

int RsAipwStrategy::recommend() const {
    if (aipw_.t != budget_) {
        throw std::logic_error("RsAipwStrategy: recommendation requires the full budget");
    }
    return argmax_lowest_index(aipw_.sum_phi.data(), instance_.num_arms());
}

UniformEbaStrategy::UniformEbaStrategy(const BanditInstance& instance,
                                       StrategyConfig config, std::int64_t budget)
    : K_(instance.num_arms()),
      budget_(budget),
      init_rounds_(static_cast<std::int64_t>(config.init_rounds_per_arm) * K_),
      sum_y_(static_cast<std::size_t>(K_), 0.0),
      count_(static_cast<std::size_t>(K_), 0) {
    if (config.init_rounds_per_arm < 1) {
        throw std::invalid_argument("StrategyConfig: init_rounds_per_arm must be >= 1");
    }
    if (budget_ < init_rounds_) {
        throw std::invalid_argument("UniformEbaStrategy: budget below initialization block");
    }
}

int UniformEbaStrategy::choose(std::int64_t t, int context, RngStream& rng) {
    (void)context;
    if (t != rounds_done_ + 1 || t > budget_) {
        throw std::logic_error("UniformEbaStrategy: rounds must advance one at a time");
    }
    const double u = rng.uniform();
    if (t <= init_rounds_) {
        return static_cast<int>((t - 1) % K_);
    }
    return std::min(K_ - 1, static_cast<int>(u * static_cast<double>(K_)));
}

void UniformEbaStrategy::observe(std::int64_t t, int context, int arm, double y) {
    (void)t;
    (void)context;
    sum_y_[static_cast<std::size_t>(arm)] += y;
    count_[static_cast<std::size_t>(arm)] += 1;
    rounds_done_ += 1;
}

int UniformEbaStrategy::recommend() const {
    if (rounds_done_ != budget_) {
        throw std::logic_error("UniformEbaStrategy: recommendation requires the full budget");
    }
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < K_; ++a) {
        const double value = count_[static_cast<std::size_t>(a)] == 0
            ? -std::numeric_limits<double>::infinity()
            : sum_y_[static_cast<std::size_t>(a)] /
                  static_cast<double>(count_[static_cast<std::size_t>(a)]);
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    return best;
}

std::pair<int, double> strategy_step(SequentialStrategy& strategy,
                                     const BanditInstance& instance,
                                     std::int64_t t, int context, RngStream& rng,
                                     const RoundHook& hook) {
    const int arm = strategy.choose(t, context, rng);
    const double y = sample_reward(instance, arm, context, rng);
    if (hook) {
        hook(t, context, arm, y);
    }
    strategy.observe(t, context, arm, y);
    return {arm, y};
}

}  // namespace ctxbai
