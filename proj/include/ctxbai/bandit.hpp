#pragma once

#include <string>
#include <vector>

#include "ctxbai/rng.hpp"

namespace ctxbai {

// Known bounds on conditional moments. They act as validation limits at
// instance construction and as clipping limits in estimation.
struct MomentBounds {
    double c_mu = 100.0;      // |E[Y|x]| <= c_mu
    double c_nu = 1e4;        // |E[Y^2|x]| <= c_nu
    double c_sigma2 = 100.0;  // Var(Y|x) in [1/c_sigma2, c_sigma2]
};

// Finite context (covariate) distribution.
struct ContextSpace {
    std::vector<std::string> labels;
    std::vector<double> probs;

    // Validates M >= 1, strictly positive probabilities summing to 1
    // within 1e-12. Labels default to "x0", "x1", ...
    explicit ContextSpace(std::vector<double> probabilities,
                          std::vector<std::string> names = {});

    int size() const { return static_cast<int>(probs.size()); }
};

enum class RewardFamily { kGaussianLocationShift, kBernoulli };

// Per-(arm, context) reward law. Bernoulli standard deviation is always
// derived from the mean, never supplied.
struct RewardLaw {
    RewardFamily family;
    double mean;
    double sd;

    static RewardLaw gaussian(double mean, double sd);
    static RewardLaw bernoulli(double p);

    double variance() const { return sd * sd; }
    double second_moment() const { return sd * sd + mean * mean; }
};

// Ground-truth environment: context distribution plus a K x M table of
// reward laws. Immutable after construction and safe to share across
// threads. All validation happens here, not at use:
//   - K >= 2, law table rectangular over M contexts,
//   - |mean| <= c_mu, second moment <= c_nu for every cell,
//   - Gaussian sd inside [1/sqrt(c_sigma2), sqrt(c_sigma2)], with sd == 0
//     additionally admitted as a degenerate (noiseless) law,
//   - the marginal best arm is unique within 1e-12.
class BanditInstance {
public:
    BanditInstance(ContextSpace context_space,
                   std::vector<std::vector<RewardLaw>> laws,
                   MomentBounds bounds = {});

    int num_arms() const { return static_cast<int>(laws_.size()); }
    int num_contexts() const { return context_space_.size(); }
    const ContextSpace& context_space() const { return context_space_; }
    const MomentBounds& bounds() const { return bounds_; }

    const RewardLaw& law(int arm, int context) const {
        return laws_[static_cast<std::size_t>(arm)][static_cast<std::size_t>(context)];
    }
    double conditional_mean(int arm, int context) const { return law(arm, context).mean; }
    double conditional_sd(int arm, int context) const { return law(arm, context).sd; }

    // E over contexts of the conditional mean.
    double marginal_mean(int arm) const;
    int best_arm() const { return best_arm_; }
    // gap[a] = marginal_mean(best) - marginal_mean(a); zero exactly at the
    // best arm, strictly positive elsewhere.
    std::vector<double> gaps() const;

    // K x M table of conditional standard deviations.
    std::vector<std::vector<double>> sd_table() const;

private:
    ContextSpace context_space_;
    std::vector<std::vector<RewardLaw>> laws_;
    MomentBounds bounds_;
    int best_arm_ = 0;
};

// Draws a context index by inverse CDF over the cumulative probabilities.
// Consumes exactly one uniform.
int sample_context(const BanditInstance& instance, RngStream& rng);

// Draws one reward from laws[arm][context]. Gaussian sampling uses
// Box-Muller and consumes exactly two uniforms (the sine branch is
// discarded); Bernoulli consumes exactly one.
double sample_reward(const BanditInstance& instance, int arm, int context,
                     RngStream& rng);

}  // namespace ctxbai
