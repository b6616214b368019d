#include "ctxbai/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ctxbai {

namespace {
constexpr double kProbSumTol = 1e-12;
constexpr double kUniqueTol = 1e-12;
// Slack for the Assumption-1 range checks so that boundary values such as
// sd == sqrt(c_sigma2) pass after rounding.
constexpr double kBoundSlack = 1e-9;
}  // namespace

ContextSpace::ContextSpace(std::vector<double> probabilities,
                           std::vector<std::string> names)
    : labels(std::move(names)), probs(std::move(probabilities)) {
    if (probs.empty()) {
        throw std::invalid_argument("ContextSpace: need at least one context");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p > 0.0)) {
            throw std::invalid_argument("ContextSpace: probabilities must be positive");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTol) {
        throw std::invalid_argument("ContextSpace: probabilities must sum to 1");
    }
    if (labels.empty()) {
        labels.reserve(probs.size());
        for (std::size_t x = 0; x < probs.size(); ++x) {
            labels.push_back("x" + std::to_string(x));
        }
    }
    if (labels.size() != probs.size()) {
        throw std::invalid_argument("ContextSpace: labels/probs size mismatch");
    }
}

RewardLaw RewardLaw::gaussian(double mean, double sd) {
    if (!(sd >= 0.0)) {
        throw std::invalid_argument("RewardLaw: Gaussian sd must be >= 0");
    }
    return RewardLaw{RewardFamily::kGaussianLocationShift, mean, sd};
}

RewardLaw RewardLaw::bernoulli(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("RewardLaw: Bernoulli mean must be in (0,1)");
    }
    return RewardLaw{RewardFamily::kBernoulli, p, std::sqrt(p * (1.0 - p))};
}

BanditInstance::BanditInstance(ContextSpace context_space,
                               std::vector<std::vector<RewardLaw>> laws,
                               MomentBounds bounds)
    : context_space_(std::move(context_space)),
      laws_(std::move(laws)),
      bounds_(bounds) {
    const std::size_t num_contexts = context_space_.probs.size();
    if (laws_.size() < 2) {
        throw std::invalid_argument("BanditInstance: need K >= 2 arms");
    }
    if (!(bounds_.c_mu > 0.0 && bounds_.c_nu > 0.0 && bounds_.c_sigma2 >= 1.0)) {
        throw std::invalid_argument("BanditInstance: invalid moment bounds");
    }
    const double sd_lo = 1.0 / std::sqrt(bounds_.c_sigma2);
    const double sd_hi = std::sqrt(bounds_.c_sigma2);
    for (const auto& row : laws_) {
        if (row.size() != num_contexts) {
            throw std::invalid_argument("BanditInstance: law table is not K x M");
        }
        for (const RewardLaw& law : row) {
            if (std::abs(law.mean) > bounds_.c_mu + kBoundSlack) {
                throw std::invalid_argument("BanditInstance: |mean| exceeds c_mu");
            }
            if (std::abs(law.second_moment()) > bounds_.c_nu + kBoundSlack) {
                throw std::invalid_argument("BanditInstance: second moment exceeds c_nu");
            }
            const bool degenerate = law.sd == 0.0;
            if (!degenerate &&
                (law.sd < sd_lo - kBoundSlack || law.sd > sd_hi + kBoundSlack)) {
                throw std::invalid_argument(
                    "BanditInstance: sd outside [1/sqrt(c_sigma2), sqrt(c_sigma2)]");
            }
        }
    }
    double best_value = marginal_mean(0);
    double second_value = -std::numeric_limits<double>::infinity();
    for (int a = 1; a < num_arms(); ++a) {
        const double value = marginal_mean(a);
        if (value > best_value) {
            second_value = best_value;
            best_value = value;
            best_arm_ = a;
        } else if (value > second_value) {
            second_value = value;
        }
    }
    if (!(best_value - second_value > kUniqueTol)) {
        throw std::invalid_argument("BanditInstance: best arm is not unique");
    }
}

double BanditInstance::marginal_mean(int arm) const {
    const auto& row = laws_[static_cast<std::size_t>(arm)];
    double mean = 0.0;
    for (int x = 0; x < num_contexts(); ++x) {
        mean += context_space_.probs[static_cast<std::size_t>(x)] *
                row[static_cast<std::size_t>(x)].mean;
    }
    return mean;
}

std::vector<double> BanditInstance::gaps() const {
    const double best_mean = marginal_mean(best_arm_);
    std::vector<double> out(static_cast<std::size_t>(num_arms()), 0.0);
    for (int a = 0; a < num_arms(); ++a) {
        out[static_cast<std::size_t>(a)] = a == best_arm_ ? 0.0 : best_mean - marginal_mean(a);
    }
    return out;
}

std::vector<std::vector<double>> BanditInstance::sd_table() const {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(num_arms()));
    for (int a = 0; a < num_arms(); ++a) {
        auto& row = out[static_cast<std::size_t>(a)];
        row.resize(static_cast<std::size_t>(num_contexts()));
        for (int x = 0; x < num_contexts(); ++x) {
            row[static_cast<std::size_t>(x)] = conditional_sd(a, x);
        }
    }
    return out;
}

int sample_context(const BanditInstance& instance, RngStream& rng) {
    const auto& probs = instance.context_space().probs;
    const double u = rng.uniform();
    double cum = 0.0;
    const int M = static_cast<int>(probs.size());
    for (int x = 0; x < M; ++x) {
        cum += probs[static_cast<std::size_t>(x)];
        if (u < cum) {
            return x;
        }
    }
    return M - 1;  // guards against cum rounding below 1
}

double sample_reward(const BanditInstance& instance, int arm, int context,
                     RngStream& rng) {
    const RewardLaw& law = instance.law(arm, context);
    switch (law.family) {
        case RewardFamily::kGaussianLocationShift: {
            // Box-Muller, cosine branch. Both uniforms are always drawn so
            // the stream advances by exactly two per Gaussian sample.
            const double u1 = 1.0 - rng.uniform();  // (0, 1], keeps log finite
            const double u2 = rng.uniform();
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * 3.14159265358979323846 * u2;
            return law.mean + law.sd * (radius * std::cos(angle));
        }
        case RewardFamily::kBernoulli:
            return rng.uniform() < law.mean ? 1.0 : 0.0;
    }
    throw std::logic_error("sample_reward: unknown reward family");
}

}  // namespace ctxbai
