#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctxbai/estimation.hpp"

using namespace ctxbai;

TEST_CASE("update accumulates raw moments") {
    NuisanceState state(2, 1);
    state.update(0, 0, 2.0);
    CHECK(state.count(0, 0) == 1);
    CHECK(state.mu_hat(0, 0) == 2.0);

    NuisanceState pair(2, 1);
    pair.update(0, 0, 1.0);
    pair.update(0, 0, 3.0);
    CHECK(pair.mu_hat(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(pair.nu_hat(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("update long-run mean") {
    NuisanceState state(2, 1);
    RngStream rng(8, 8);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        // Box-Muller by hand; the state does not care where samples come from
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        const double y = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * 3.14159265358979323846 * u2);
        state.update(0, 0, y);
    }
    CHECK(std::abs(state.mu_hat(0, 0)) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("mu_hat clipping") {
    NuisanceState fresh(2, 1);
    CHECK(fresh.mu_hat(0, 0) == 0.0);
    CHECK(fresh.mu_hat(1, 0) == 0.0);

    NuisanceState big(2, 1);
    big.update(0, 0, 1e6);
    big.update(0, 0, 1e6);
    CHECK(big.mu_hat(0, 0) == 100.0);
}

TEST_CASE("var_hat clipping") {
    NuisanceState fresh(2, 1);
    CHECK(fresh.var_hat(0, 0) == doctest::Approx(0.01).epsilon(1e-15));

    NuisanceState pair(2, 1);
    pair.update(0, 0, 1.0);
    pair.update(0, 0, 3.0);
    CHECK(pair.var_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    NuisanceState constant(2, 1);
    for (int i = 0; i < 3; ++i) {
        constant.update(0, 0, 2.0);
    }
    CHECK(constant.var_hat(0, 0) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("clipping ranges hold under adversarial inputs") {
    const MomentBounds bounds{5.0, 50.0, 16.0};
    NuisanceState state(3, 2, bounds);
    RngStream rng(21, 4);
    for (int i = 0; i < 20000; ++i) {
        const int arm = static_cast<int>(rng.uniform() * 3.0);
        const int x = static_cast<int>(rng.uniform() * 2.0);
        double y = (rng.uniform() - 0.5) * 1e8;
        if (rng.uniform() < 0.3) {
            y = 0.0;  // long constant stretches push the raw variance to 0
        }
        state.update(arm, x, y);
        for (int a = 0; a < 3; ++a) {
            for (int c = 0; c < 2; ++c) {
                const double mu = state.mu_hat(a, c);
                const double var = state.var_hat(a, c);
                CHECK(mu >= -bounds.c_mu);
                CHECK(mu <= bounds.c_mu);
                CHECK(var >= 1.0 / bounds.c_sigma2 - 1e-15);
                CHECK(var <= bounds.c_sigma2 + 1e-15);
            }
        }
    }
}

TEST_CASE("estimated allocation plug-in") {
    NuisanceState fresh(2, 1);
    const std::vector<double> w0 = estimated_allocation(fresh, 0);
    CHECK(w0[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w0[1] == doctest::Approx(0.5).epsilon(1e-15));

    // var_hat = (1, 4) with the empirical best at arm 0 gives (1/3, 2/3)
    NuisanceState state(2, 1);
    state.update(0, 0, 0.0);
    state.update(0, 0, 2.0);   // mu = 1, nu = 2, var = 1
    state.update(1, 0, -2.0);
    state.update(1, 0, 2.0);   // mu = 0, nu = 4, var = 4
    const std::vector<double> w = estimated_allocation(state, 0);
    CHECK(w[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // var_hat = (4, 1, 1), best 0: same shape as the sigma = (2, 1, 1) case
    NuisanceState three(3, 1);
    three.update(0, 0, -1.0);
    three.update(0, 0, 3.0);   // mu = 1, var = 4
    three.update(1, 0, -1.0);
    three.update(1, 0, 1.0);   // mu = 0, var = 1
    three.update(2, 0, -1.0);
    three.update(2, 0, 1.0);
    const std::vector<double> w3 = estimated_allocation(three, 0);
    CHECK(w3[0] == doctest::Approx(0.5857864376269049).epsilon(1e-7));
    CHECK(w3[1] == doctest::Approx(0.2071067811865475).epsilon(1e-7));
    CHECK(w3[2] == doctest::Approx(0.2071067811865475).epsilon(1e-7));

    double total = 0.0;
    for (double v : w3) {
        CHECK(v > 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("estimated allocation is symmetric in equal non-best arms") {
    NuisanceState state(3, 1);
    state.update(0, 0, 0.0);
    state.update(0, 0, 2.0);
    // arms 1 and 2 get the same raw moments through different samples
    state.update(1, 0, -1.0);
    state.update(1, 0, 1.0);
    state.update(2, 0, 1.0);
    state.update(2, 0, -1.0);
    const std::vector<double> w = estimated_allocation(state, 0);
    CHECK(w[1] == w[2]);
}

TEST_CASE("plug-in best arm ties to the lowest index") {
    NuisanceState state(3, 1);
    state.update(0, 0, 1.0);
    state.update(1, 0, 1.0);
    state.update(2, 0, 0.5);
    CHECK(state.plug_in_best(0) == 0);
}

TEST_CASE("plug-in allocation converges to the target") {
    // every cell receives many i.i.d. samples; the plug-in table must land
    // within 0.02 of the closed form at the true standard deviations
    const std::vector<std::vector<double>> means{{0.6, 0.9}, {0.1, 0.2}};
    const std::vector<std::vector<double>> sds{{3.0, 1.2}, {1.0, 2.1}};
    std::vector<std::vector<RewardLaw>> laws(2);
    for (int a = 0; a < 2; ++a) {
        for (int x = 0; x < 2; ++x) {
            laws[a].push_back(RewardLaw::gaussian(
                means[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)],
                sds[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)]));
        }
    }
    const BanditInstance inst(ContextSpace({0.5, 0.5}), laws);
    NuisanceState state(2, 2);
    RngStream rng(777, 0);
    for (int a = 0; a < 2; ++a) {
        for (int x = 0; x < 2; ++x) {
            for (int i = 0; i < 100000; ++i) {
                state.update(a, x, sample_reward(inst, a, x, rng));
            }
        }
    }
    const AllocationTable target = optimal_allocation(inst);
    const AllocationTable plug_in = estimated_allocation_table(state);
    for (int a = 0; a < 2; ++a) {
        for (int x = 0; x < 2; ++x) {
            CHECK(std::abs(plug_in.at(a, x) - target.at(a, x)) <= 0.02);
        }
    }
}

TEST_CASE("mixing schedule") {
    const MixingSchedule def{};
    CHECK(def.rate(1) == 1.0);
    CHECK(def.rate(4) == doctest::Approx(0.5).epsilon(1e-15));
    const MixingSchedule off{false, 0.5};
    CHECK(off.rate(1) == 0.0);
    CHECK_THROWS_AS(def.rate(0), std::invalid_argument);

    const std::vector<double> w{0.9, 0.1};
    CHECK(mixed_allocation(w, 10, off) == w);

    const MixingSchedule full{true, 0.0};  // r_t = 1 for every t
    const std::vector<double> four =
        mixed_allocation({0.7, 0.1, 0.1, 0.1}, 3, full);
    for (double v : four) {
        CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    }

    // r = 0.5 on (0.9, 0.1): (0.7, 0.3)
    const MixingSchedule half{true, 0.5};
    const std::vector<double> mixed = mixed_allocation(w, 4, half);
    CHECK(mixed[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(mixed[1] == doctest::Approx(0.3).epsilon(1e-15));
}
