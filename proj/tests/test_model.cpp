#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qrepsim/error.hpp"
#include "qrepsim/model.hpp"

using namespace qrepsim;
using doctest::Approx;

namespace {

// Raw hashing yield written out independently of the library.
double raw_yield(double f) {
    return 1.0 + f * std::log2(f) + (1.0 - f) * std::log2((1.0 - f) / 3.0);
}

double bisect_threshold() {
    double lo = 0.8;
    double hi = 0.82;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (raw_yield(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

NetworkParams chain(int nodes, double t_dp, double lambda) {
    NetworkParams p;
    p.num_nodes = nodes;
    p.dephasing_time_s = t_dp;
    p.bsm_ideality = lambda;
    return p;
}

}  // namespace

TEST_CASE("channel success probability") {
    CHECK(channel_success_prob(1e-18, 22.0) == 1.0);
    CHECK(channel_success_prob(22.0, 22.0) == Approx(0.36787944117144233).epsilon(1e-15));
    // 25-node, 50 km chain
    CHECK(channel_success_prob(50.0 / 24.0, 22.0) == Approx(0.9096485437810087).epsilon(1e-15));
    CHECK_THROWS_AS(channel_success_prob(0.0, 22.0), InvalidParameter);
    CHECK_THROWS_AS(channel_success_prob(1.0, -1.0), InvalidParameter);
}

TEST_CASE("dephasing probability") {
    CHECK(dephase_prob(0.0, 1e-3) == 0.0);
    CHECK(dephase_prob(1e6, 1e-3) == 0.5);
    CHECK(dephase_prob(2e-3, 2e-3) == Approx(0.31606027941427883).epsilon(1e-15));
    CHECK_THROWS_AS(dephase_prob(-1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(dephase_prob(1.0, 0.0), InvalidParameter);
}

TEST_CASE("alpha and beta") {
    auto ab = alpha_beta(0.0, 0.0);
    CHECK(ab.alpha == 1.0);
    CHECK(ab.beta == 0.0);
    ab = alpha_beta(0.5, 0.5);
    CHECK(ab.alpha == 0.5);
    CHECK(ab.beta == 0.5);
    ab = alpha_beta(0.3, 0.0);
    CHECK(ab.alpha == Approx(0.7));
    CHECK(ab.beta == Approx(0.3));
    CHECK_THROWS_AS(alpha_beta(0.6, 0.0), InvalidParameter);
    CHECK_THROWS_AS(alpha_beta(0.1, -0.1), InvalidParameter);

    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> half(0.0, 0.5);
    for (int i = 0; i < 10000; ++i) {
        const auto r = alpha_beta(half(gen), half(gen));
        CHECK(r.alpha + r.beta == Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("closed-form fidelity") {
    CHECK(closed_form_fidelity(0.0, chain(7, 1e-3, 1.0)) == 1.0);
    CHECK(closed_form_fidelity(1e-3, chain(3, 1e-3, 1.0)) == Approx(0.6839397205857212).epsilon(1e-15));
    CHECK(closed_form_fidelity(0.0, chain(4, 1e-3, 0.9)) == Approx(0.81).epsilon(1e-15));
    CHECK_THROWS_AS(closed_form_fidelity(-1.0, chain(3, 1e-3, 1.0)), InvalidParameter);

    SUBCASE("bounds and monotonicity") {
        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < 2000; ++i) {
            const int nodes = 2 + static_cast<int>(unit(gen) * 30);
            const double t_dp = std::pow(10.0, -4.0 + 3.0 * unit(gen));
            const double lambda = 0.8 + 0.2 * unit(gen);
            const double t = 5.0 * t_dp * unit(gen);
            const double dt = t_dp * unit(gen);
            const auto params = chain(nodes, t_dp, lambda);
            const double f = closed_form_fidelity(t, params);
            const double ceiling = std::pow(lambda, nodes - 2);
            CHECK(f <= ceiling * (1.0 + 1e-15));
            CHECK(f >= ceiling / 2.0 * (1.0 - 1e-15));
            CHECK(closed_form_fidelity(t + dt, params) <= f);
            CHECK(closed_form_fidelity(t, chain(nodes + 1, t_dp, lambda)) <= f);
            CHECK(closed_form_fidelity(t, chain(nodes, t_dp * 2.0, lambda)) >= f);
        }
    }
}

TEST_CASE("hashing yield") {
    const double threshold = bisect_threshold();
    CHECK(threshold == Approx(0.8107103750847682).epsilon(1e-12));
    CHECK(hashing_threshold() == Approx(threshold).epsilon(1e-12));

    CHECK(hashing_yield(1.0) == 1.0);
    CHECK(hashing_yield(0.25) == 0.0);
    CHECK(hashing_yield_raw(0.25) == Approx(-1.0));
    CHECK(hashing_yield(0.0) == 0.0);
    CHECK(hashing_yield(threshold) == Approx(0.0).epsilon(1e-12));
    CHECK(hashing_yield(0.81) == 0.0);
    CHECK_THROWS_AS(hashing_yield(1.5), InvalidParameter);

    // zero on [0, F*], strictly increasing on [F*, 1]
    double previous = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double f = i / 1000.0;
        const double y = hashing_yield(f);
        if (f <= threshold) {
            CHECK(y == 0.0);
        } else if (f == 1.0) {
            CHECK(y == 1.0);
        } else {
            CHECK(y > previous);
            CHECK(y == Approx(raw_yield(f)).epsilon(1e-12));
        }
        previous = y;
    }
}

TEST_CASE("hashing rate") {
    CHECK(hashing_rate(1.0, 1.0) == 1.0);
    CHECK(hashing_rate(1.0, 0.5) == 2.0);
    CHECK(hashing_rate(0.8, 1e-6) == 0.0);
    CHECK_THROWS_AS(hashing_rate(1.0, 0.0), InvalidParameter);
}

TEST_CASE("normalized time") {
    NetworkParams two;
    CHECK(normalized_time_to_seconds(0.0, two) == 0.0);
    CHECK(normalized_time_to_seconds(1.0, two) == Approx(2.5e-4).epsilon(1e-15));
    NetworkParams twenty_five;
    twenty_five.num_nodes = 25;
    CHECK(normalized_time_to_seconds(2.0, twenty_five) == Approx(2.0833333333333336e-05).epsilon(1e-14));
    CHECK_THROWS_AS(normalized_time_to_seconds(-1.0, two), InvalidParameter);
}

TEST_CASE("network parameter validation") {
    NetworkParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.num_swaps() == 0);
    p.num_nodes = 1;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("N >= 2"), InvalidParameter);
    p = NetworkParams{};
    p.bsm_ideality = 1.5;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = NetworkParams{};
    p.dephasing_time_s = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = NetworkParams{};
    p.total_length_km = -3.0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = NetworkParams{};
    p.dephasing_time_s = std::numeric_limits<double>::infinity();
    CHECK_NOTHROW(p.validate());
}
