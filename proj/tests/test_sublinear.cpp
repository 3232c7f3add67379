#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gstab/integrators.hpp"
#include "gstab/sublinear.hpp"

using namespace gstab;

namespace {

TrajectoryBundle simulate(const CoefficientSystem& sys, const GParams& gp, const DelayGrid& g, const InitialSegment& xi,
                          std::size_t K, std::size_t R, std::uint64_t seed, bool delay = true) {
    const auto fam = make_scenario_family(gp, K, g.steps(), seed);
    TrajectoryBundle b(fam.size());
    for (std::size_t k = 0; k < fam.size(); ++k) {
        auto ctl = std::make_shared<VolatilityControl>(fam[k]);
        for (std::size_t r = 0; r < R; ++r) {
            const auto sc = sample_increments(ctl, g, {seed, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(r)});
            b[k].push_back(delay ? em_sdde(sys, xi, g, sc) : em_sde(sys, xi.at(0), g, sc));
        }
    }
    return b;
}

InitialSegment flat(double v, std::size_t m) {
    const std::vector<double> x{v};
    return InitialSegment::constant(x, m);
}

}  // namespace

TEST(UpperExpectation, Examples) {
    EXPECT_DOUBLE_EQ(upper_expectation({{1, 2, 3}, {2, 2, 2}}), 2.0);
    EXPECT_DOUBLE_EQ(upper_expectation({{-1, -3}}), -2.0);
    EXPECT_THROW(upper_expectation({}), std::invalid_argument);
    EXPECT_THROW(upper_expectation({{1.0}, {}}), std::invalid_argument);
}

TEST(UpperExpectation, SublinearAxiomsOnDyadicSamples) {
    std::mt19937_64 gen(21);
    std::uniform_int_distribution<int> u(-64, 64);
    auto sample = [&] {
        std::vector<std::vector<double>> s(4, std::vector<double>(16));
        for (auto& row : s)
            for (auto& v : row) v = u(gen) / 8.0;
        return s;
    };
    for (int trial = 0; trial < 100; ++trial) {
        auto X = sample(), Y = sample();
        auto sum = X, maxXY = X, scaled = X, shifted = X, neg = X;
        for (std::size_t k = 0; k < X.size(); ++k)
            for (std::size_t i = 0; i < X[k].size(); ++i) {
                sum[k][i] = X[k][i] + Y[k][i];
                maxXY[k][i] = std::max(X[k][i], Y[k][i]);
                scaled[k][i] = 4.0 * X[k][i];
                shifted[k][i] = X[k][i] + 1.5;
                neg[k][i] = -X[k][i];
            }
        const double eX = upper_expectation(X), eY = upper_expectation(Y);
        EXPECT_LE(eX, upper_expectation(maxXY));
        EXPECT_LE(upper_expectation(sum), eX + eY);
        EXPECT_EQ(upper_expectation(scaled), 4.0 * eX);
        EXPECT_EQ(upper_expectation(shifted), eX + 1.5);
        EXPECT_LE(-upper_expectation(neg), eX);
        const std::vector<std::vector<double>> c(3, std::vector<double>(5, 0.625));
        EXPECT_EQ(upper_expectation(c), 0.625);
    }
}

TEST(UpperExpectation, AxiomsWithRoundingTolerance) {
    std::mt19937_64 gen(22);
    std::normal_distribution<double> n(0, 1);
    std::vector<std::vector<double>> X(3, std::vector<double>(300)), Y = X;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 300; ++i) {
            X[k][i] = n(gen);
            Y[k][i] = n(gen);
        }
    auto sum = X, scaled = X, shifted = X;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 300; ++i) {
            sum[k][i] += Y[k][i];
            scaled[k][i] *= 0.3;
            shifted[k][i] += 0.1;
        }
    const double eX = upper_expectation(X);
    EXPECT_LE(upper_expectation(sum), eX + upper_expectation(Y) + 1e-14);
    EXPECT_NEAR(upper_expectation(scaled), 0.3 * eX, 1e-14);
    EXPECT_NEAR(upper_expectation(shifted), eX + 0.1, 1e-14);
}

TEST(OrderedMean, IndependentOfBlockPlacement) {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1 + i);
    double naive = 0;
    for (double x : v) naive += x;
    EXPECT_NEAR(ordered_mean(v), naive / 1000, 1e-15);
}

TEST(EstimateMoments, WorkerCountDoesNotChangeResults) {
    auto sampler = [](std::size_t k, std::size_t r, std::span<double> out) {
        CounterStream s(RngKey{3, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(r)},
                        StreamPurpose::increments);
        out[0] = s.normal(0);
        out[1] = s.normal(1) * s.normal(1);
    };
    const auto a = estimate_moments(3, 500, 2, sampler, 1);
    for (std::size_t w : {2u, 3u, 7u}) {
        const auto b = estimate_moments(3, 500, 2, sampler, w);
        EXPECT_EQ(a.mean, b.mean);
        EXPECT_EQ(a.std_error, b.std_error);
    }
}

TEST(EstimateMoments, RethrowsFirstFailureInOrder) {
    auto sampler = [](std::size_t k, std::size_t r, std::span<double> out) {
        if (k == 1 && r == 200) throw std::runtime_error("first");
        if (k == 2 && r == 10) throw std::runtime_error("second");
        out[0] = 1.0;
    };
    for (std::size_t w : {1u, 4u}) {
        try {
            estimate_moments(3, 300, 1, sampler, w);
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "first");
        }
    }
}

TEST(MomentCurve, ZeroSystemIsConstant) {
    const DelayGrid g(1.0, 4, 2.0);
    const auto b = simulate(zero_system(1), GParams(0.5, 1.0), g, flat(2.0, 4), 3, 10, 1);
    const auto c = moment_curve(b, 3.0);
    ASSERT_EQ(c.size(), g.steps() + 1);
    for (double v : c.values) EXPECT_DOUBLE_EQ(v, 8.0);
    for (double t : {0.0, 1.0}) EXPECT_EQ(c.times[static_cast<std::size_t>(g.index_of(t))], t);
}

TEST(MomentCurve, AdditiveNoiseGrowsLinearly) {
    // dx = dB with sigma = 1: E|x(t)|^2 = x0^2 + t.
    LinearSystem ls;
    ls.c_h = {1.0};
    const DelayGrid g(1.0, 4, 2.0);
    const auto b = simulate(ls.to_system(), GParams(1.0, 1.0), g, flat(0.5, 4), 1, 4000, 2);
    const auto c = moment_curve(b, 2.0);
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double want = 0.25 + c.times[n];
        EXPECT_NEAR(c.values[n], want, 5 * c.std_error[n] + 1e-15) << "t=" << c.times[n];
    }
}

TEST(MomentCurve, DeterministicDecayMatchesClosedForm) {
    LinearSystem ls;
    ls.A_f = {-1.0};
    const DelayGrid g(1.0, 10, 2.0);
    const auto b = simulate(ls.to_system(), GParams(0.0, 0.0), g, flat(1.0, 10), 1, 3, 4, false);
    const auto c = moment_curve(b, 2.0);
    for (std::size_t n = 0; n < c.size(); ++n) EXPECT_NEAR(c.values[n], std::pow(0.81, static_cast<double>(n)), 1e-10);
}

TEST(DelayDifference, ConstantDriftGivesTauToThePower) {
    LinearSystem ls;
    ls.c_f = {1.0};
    const DelayGrid g(0.5, 4, 2.0);
    const auto b = simulate(ls.to_system(), GParams(0.0, 0.0), g, flat(0.0, 4), 1, 2, 1);
    const auto c = delay_difference_curve(b, 2.0);
    // The first delay reaches into the flat initial segment.
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double want = c.times[n] >= 0.5 ? 0.25 : c.times[n] * c.times[n];
        EXPECT_NEAR(c.values[n], want, 1e-13) << c.times[n];
    }
    const auto z = delay_difference_curve(simulate(zero_system(1), GParams(0, 1), g, flat(1.0, 4), 2, 2, 1), 2.0);
    for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(GapCurve, IdenticalBundlesGiveZeroAndShiftsGiveConstant) {
    const DelayGrid g(1.0, 4, 1.0);
    const GParams gp(0.5, 1.0);
    const auto a = simulate(zero_system(1), gp, g, flat(1.0, 4), 3, 5, 9);
    const auto b = simulate(zero_system(1), gp, g, flat(1.5, 4), 3, 5, 9);
    for (double v : gap_curve(a, a, 2.0).values) EXPECT_EQ(v, 0.0);
    for (double v : gap_curve(a, b, 2.0).values) EXPECT_EQ(v, 0.25);
    const auto other = simulate(zero_system(1), gp, g, flat(1.0, 4), 3, 5, 10);
    EXPECT_THROW(gap_curve(a, other, 2.0), std::invalid_argument);
}

TEST(MomentCurve, WorstCaseScenarioIsReported) {
    LinearSystem ls;
    ls.c_h = {1.0};
    const DelayGrid g(1.0, 4, 1.0);
    const auto b = simulate(ls.to_system(), GParams(0.2, 1.0), g, flat(0.0, 4), 2, 2000, 6);
    const auto c = moment_curve(b, 2.0);
    EXPECT_EQ(c.argmax.back(), 1u);  // constant sigma_hi
    EXPECT_EQ(c.scenarios, 2u);
    EXPECT_EQ(c.paths, 2000u);
    std::ostringstream os;
    write_curve_csv(os, c);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,value,argmax_scenario,stderr");
}
