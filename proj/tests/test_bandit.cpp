#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctxbai/bandit.hpp"

using namespace ctxbai;

namespace {

BanditInstance gaussian_instance(std::vector<double> probs,
                                 std::vector<std::vector<double>> means,
                                 std::vector<std::vector<double>> sds,
                                 MomentBounds bounds = {}) {
    std::vector<std::vector<RewardLaw>> laws(means.size());
    for (std::size_t a = 0; a < means.size(); ++a) {
        for (std::size_t x = 0; x < means[a].size(); ++x) {
            laws[a].push_back(RewardLaw::gaussian(means[a][x], sds[a][x]));
        }
    }
    return BanditInstance(ContextSpace(std::move(probs)), std::move(laws), bounds);
}

}  // namespace

TEST_CASE("context space validation") {
    CHECK_THROWS_AS(ContextSpace({}), std::invalid_argument);
    CHECK_THROWS_AS(ContextSpace({0.5, 0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(ContextSpace({0.5, 0.6}), std::invalid_argument);
    const ContextSpace space({0.25, 0.75});
    CHECK(space.size() == 2);
    CHECK(space.labels[0] == "x0");
}

TEST_CASE("reward law construction") {
    CHECK_THROWS_AS(RewardLaw::bernoulli(0.0), std::invalid_argument);
    CHECK_THROWS_AS(RewardLaw::bernoulli(1.0), std::invalid_argument);
    const RewardLaw bern = RewardLaw::bernoulli(0.3);
    CHECK(bern.sd == doctest::Approx(std::sqrt(0.21)).epsilon(1e-15));
    CHECK_THROWS_AS(RewardLaw::gaussian(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("instance validation") {
    // non-unique best arm
    CHECK_THROWS_AS(gaussian_instance({1.0}, {{1.0}, {1.0}}, {{1.0}, {1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        gaussian_instance({1.0}, {{1.0}, {1.0 - 1e-13}}, {{1.0}, {1.0}}),
        std::invalid_argument);
    // mean beyond c_mu
    CHECK_THROWS_AS(gaussian_instance({1.0}, {{101.0}, {0.0}}, {{1.0}, {1.0}}),
                    std::invalid_argument);
    // sd outside the Assumption-1 range for c_sigma2 = 100
    CHECK_THROWS_AS(gaussian_instance({1.0}, {{1.0}, {0.0}}, {{11.0}, {1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(gaussian_instance({1.0}, {{1.0}, {0.0}}, {{0.05}, {1.0}}),
                    std::invalid_argument);
    // degenerate noiseless laws stay admissible
    CHECK_NOTHROW(gaussian_instance({1.0}, {{1.0}, {0.0}}, {{0.0}, {0.0}}));
    // K = 1 is not a bandit
    CHECK_THROWS_AS(gaussian_instance({1.0}, {{1.0}}, {{1.0}}),
                    std::invalid_argument);
}

TEST_CASE("marginal mean arithmetic") {
    const BanditInstance two = gaussian_instance({0.5, 0.5}, {{1.0, 3.0}, {0.0, 0.0}},
                                                 {{1.0, 1.0}, {1.0, 1.0}});
    CHECK(two.marginal_mean(0) == doctest::Approx(2.0).epsilon(1e-15));

    const BanditInstance single = gaussian_instance({1.0}, {{0.7}, {0.1}},
                                                    {{1.0}, {1.0}});
    CHECK(single.marginal_mean(0) == 0.7);

    const BanditInstance skew = gaussian_instance({0.2, 0.8}, {{0.0, 1.0}, {-1.0, -1.0}},
                                                  {{1.0, 1.0}, {1.0, 1.0}});
    CHECK(skew.marginal_mean(0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("marginal mean superposition") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const double p = 0.1 + 0.8 * rng.uniform();
        std::vector<double> probs{p, 1.0 - p};
        std::vector<double> a{rng.uniform(), rng.uniform()};
        std::vector<double> b{rng.uniform(), rng.uniform()};
        const double alpha = rng.uniform();
        const double beta = rng.uniform();
        // linear in the means row
        std::vector<double> combo{alpha * a[0] + beta * b[0], alpha * a[1] + beta * b[1]};
        auto marginal = [&](const std::vector<double>& row) {
            return probs[0] * row[0] + probs[1] * row[1];
        };
        const BanditInstance inst = gaussian_instance(
            probs, {combo, {-5.0, -5.0}}, {{1.0, 1.0}, {1.0, 1.0}});
        CHECK(inst.marginal_mean(0) ==
              doctest::Approx(alpha * marginal(a) + beta * marginal(b)).epsilon(1e-12));
        // linear in the probabilities
        const double lambda = rng.uniform();
        std::vector<double> q{0.3, 0.7};
        std::vector<double> mix{lambda * probs[0] + (1 - lambda) * q[0],
                                lambda * probs[1] + (1 - lambda) * q[1]};
        const BanditInstance mixed = gaussian_instance(
            mix, {a, {-5.0, -5.0}}, {{1.0, 1.0}, {1.0, 1.0}});
        const BanditInstance q_inst = gaussian_instance(
            q, {a, {-5.0, -5.0}}, {{1.0, 1.0}, {1.0, 1.0}});
        const BanditInstance p_inst = gaussian_instance(
            probs, {a, {-5.0, -5.0}}, {{1.0, 1.0}, {1.0, 1.0}});
        CHECK(mixed.marginal_mean(0) ==
              doctest::Approx(lambda * p_inst.marginal_mean(0) +
                              (1 - lambda) * q_inst.marginal_mean(0)).epsilon(1e-12));
    }
}

TEST_CASE("best arm and gaps") {
    const BanditInstance a = gaussian_instance({1.0}, {{1.0}, {0.8}}, {{1.0}, {1.0}});
    CHECK(a.best_arm() == 0);
    CHECK(a.gaps()[0] == 0.0);
    CHECK(a.gaps()[1] == doctest::Approx(0.2).epsilon(1e-12));

    const BanditInstance b = gaussian_instance({1.0}, {{0.8}, {1.0}, {0.9}},
                                               {{1.0}, {1.0}, {1.0}});
    CHECK(b.best_arm() == 1);

    const BanditInstance c = gaussian_instance({1.0}, {{0.5}, {0.9}, {0.7}},
                                               {{1.0}, {1.0}, {1.0}});
    const std::vector<double> gaps = c.gaps();
    CHECK(gaps[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(gaps[1] == 0.0);
    CHECK(gaps[2] == doctest::Approx(0.2).epsilon(1e-12));

    // equal shift per context: gap vector is (0, delta)
    const BanditInstance d = gaussian_instance({0.5, 0.5},
                                               {{1.0, 2.0}, {0.75, 1.75}},
                                               {{1.0, 1.0}, {1.0, 1.0}});
    CHECK(d.gaps()[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("sample_context degenerate and determinism") {
    const BanditInstance single = gaussian_instance({1.0}, {{1.0}, {0.0}},
                                                    {{1.0}, {1.0}});
    RngStream rng(3, 5);
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_context(single, rng) == 0);
    }

    const BanditInstance multi = gaussian_instance(
        {0.2, 0.3, 0.5}, {{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}},
        {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
    RngStream r1(42, 7);
    RngStream r2(42, 7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(sample_context(multi, r1) == sample_context(multi, r2));
    }
}

TEST_CASE("sample_context frequencies at a million draws") {
    const BanditInstance inst = gaussian_instance(
        {0.5, 0.5}, {{1.0, 1.0}, {0.0, 0.0}}, {{1.0, 1.0}, {1.0, 1.0}});
    RngStream rng(2024, 1);
    const int n = 1000000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        zeros += sample_context(inst, rng) == 0 ? 1 : 0;
    }
    const double freq = static_cast<double>(zeros) / n;
    CHECK(freq >= 0.498);
    CHECK(freq <= 0.502);
}

TEST_CASE("sample_context chi-square goodness of fit") {
    const std::vector<double> probs{0.2, 0.3, 0.5};
    const BanditInstance inst = gaussian_instance(
        probs, {{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}},
        {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
    RngStream rng(99, 12);
    const int n = 1000000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) {
        counts[static_cast<std::size_t>(sample_context(inst, rng))] += 1;
    }
    double chi2 = 0.0;
    for (std::size_t x = 0; x < probs.size(); ++x) {
        const double expected = n * probs[x];
        const double d = counts[x] - expected;
        chi2 += d * d / expected;
    }
    // dof = 2: the chi-square CDF is 1 - exp(-x/2), so the critical value at
    // significance 1e-4 is -2 log(1e-4).
    const double critical = -2.0 * std::log(1e-4);
    CHECK(chi2 < critical);
}

TEST_CASE("sample_reward degenerate, draw counts, determinism") {
    const BanditInstance inst = gaussian_instance({1.0}, {{2.0}, {0.0}},
                                                  {{0.0}, {0.0}});
    RngStream rng(5, 5);
    CHECK(sample_reward(inst, 0, 0, rng) == 2.0);

    // Gaussian consumes exactly two uniforms, Bernoulli exactly one: the
    // next context draw must line up with a manually advanced twin stream.
    const BanditInstance noisy = gaussian_instance({0.5, 0.5},
                                                   {{1.0, 1.0}, {0.0, 0.0}},
                                                   {{1.0, 1.0}, {1.0, 1.0}});
    RngStream a(7, 1);
    RngStream b(7, 1);
    (void)sample_reward(noisy, 0, 0, a);
    (void)b.uniform();
    (void)b.uniform();
    CHECK(sample_context(noisy, a) == sample_context(noisy, b));

    std::vector<std::vector<RewardLaw>> bern_laws{{RewardLaw::bernoulli(0.3)},
                                                  {RewardLaw::bernoulli(0.2)}};
    const BanditInstance bern(ContextSpace({1.0}), bern_laws);
    RngStream c(7, 2);
    RngStream d(7, 2);
    (void)sample_reward(bern, 0, 0, c);
    (void)d.uniform();
    CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("sample_reward Monte Carlo moments") {
    std::vector<std::vector<RewardLaw>> bern_laws{{RewardLaw::bernoulli(0.3)},
                                                  {RewardLaw::bernoulli(0.2)}};
    const BanditInstance bern(ContextSpace({1.0}), bern_laws);
    RngStream rng(17, 3);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += sample_reward(bern, 0, 0, rng);
    }
    const double tol = 4.0 * std::sqrt(0.21 / n);
    CHECK(std::abs(sum / n - 0.3) <= tol);

    const BanditInstance gauss = gaussian_instance({1.0}, {{0.0}, {-1.0}},
                                                   {{1.0}, {1.0}});
    RngStream rng2(17, 4);
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = sample_reward(gauss, 0, 0, rng2);
        s1 += y;
        s2 += y * y;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(var - 1.0) <= 0.01);
}

TEST_CASE("trajectory replay is bitwise identical") {
    const BanditInstance inst = gaussian_instance(
        {0.4, 0.6}, {{1.0, 2.0}, {0.5, 1.0}}, {{1.0, 2.0}, {0.5, 1.5}});
    auto trajectory = [&](std::uint64_t seed, std::uint64_t stream) {
        RngStream rng(seed, stream);
        std::vector<double> out;
        for (int i = 0; i < 500; ++i) {
            const int x = sample_context(inst, rng);
            out.push_back(sample_reward(inst, i % 2, x, rng));
        }
        return out;
    };
    CHECK(trajectory(1234, 77) == trajectory(1234, 77));
    CHECK(trajectory(1234, 77) != trajectory(1234, 78));
}
