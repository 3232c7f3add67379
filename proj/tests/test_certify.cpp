#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "golden_check.hpp"
#include "gstab/certify.hpp"

using namespace gstab;

namespace {

const ModelConstants kModel{2.0, 0.1, 0.1, 1.0, 1.0};

StabilityParams params(SystemKind k, double M = 3.0, double lambda = 0.5, double d = 0.0) {
    return StabilityParams::make(k, M, lambda, d);
}

}  // namespace

TEST(Golden, EveryFormulaMatchesTheOracle) {
    const auto doc = golden::load(GSTAB_GOLDEN_PATH);
    const auto results = golden::check_all(doc, 1e-12);
    EXPECT_GE(results.size(), 15u);
    for (const auto& [formula, r] : results) {
        EXPECT_GE(r.cases, 50u) << formula;
        EXPECT_EQ(r.failures, 0u) << formula << ": " << r.first_failure;
    }
}

TEST(Golden, PinnedReports) {
    const auto doc = golden::load(GSTAB_GOLDEN_PATH);
    const auto& pin = doc.at("pinned");
    const double tau = 1e-3;
    const std::vector<std::pair<std::string, CertReport>> reports{
        {"transfer_sdde_to_sde", transfer_sdde_to_sde(params(SystemKind::sdde), kModel, tau, 0.5)},
        {"transfer_sde_to_emsde", transfer_sde_to_emsde(params(SystemKind::sde), kModel, tau, tau, 0.5)},
        {"transfer_emsde_to_emsdde", transfer_emsde_to_emsdde(params(SystemKind::em_sde), kModel, tau, 0.5)},
        {"transfer_emsdde_to_sdde", transfer_emsdde_to_sdde(params(SystemKind::em_sdde), kModel, tau, tau, 0.5)}};
    for (const auto& [name, r] : reports) {
        const auto& want = pin.at(name);
        EXPECT_LE(golden::rel_error(r.T, want.at("T").get<double>()), 1e-12) << name;
        EXPECT_LE(golden::rel_error(r.threshold, want.at("threshold").get<double>()), 1e-12) << name;
        EXPECT_LE(golden::rel_error(r.intermediates.back().second, want.at("d_internal").get<double>()), 1e-12)
            << name;
        EXPECT_EQ(r.applicable, want.at("applicable").get<bool>()) << name;
        EXPECT_FALSE(r.output.has_value());
        EXPECT_NE(r.note.find("not applicable"), std::string::npos);
    }
}

TEST(BdgConstant, Examples) {
    EXPECT_DOUBLE_EQ(bdg_constant(2.0), 4.0);
    EXPECT_NEAR(bdg_constant(4.0), std::pow(1024.0 / 54.0, 2), 1e-9 * 359.6);
    EXPECT_NEAR(bdg_constant(2.0 + 1e-12), 4.0, 1e-9);
    EXPECT_THROW(bdg_constant(1.9), std::invalid_argument);
}

TEST(OddDoubleFactorial, ExactAtIntegers) {
    EXPECT_NEAR(odd_double_factorial(2.0), 3.0, 1e-13);
    EXPECT_NEAR(odd_double_factorial(4.0), 105.0, 1e-11);
}

TEST(LemmaBounds, Examples) {
    EXPECT_NEAR(lemma_bound_sdde(2, 1, 1, 0.5, 1, 1), 5.5 * std::exp(7.0), 1e-12 * 5.5 * std::exp(7.0));
    EXPECT_NEAR(lemma_bound_sdde(2, 1, 1, 0.5, 2, 0), 2.5 * 2, 1e-14);
    EXPECT_EQ(lemma_bound_sdde(2, 1e-300, 1, 0.5, 0, 0), 0.0);
    EXPECT_NEAR(lemma_bound_sde(2, 1, 1, 1, 1), 4 * std::exp(8.0), 1e-12 * 4 * std::exp(8.0));
    EXPECT_EQ(lemma_bound_sde(2, 1, 1, 0.7, 0), 0.7);
    EXPECT_EQ(lemma_bound_sde(2, 1, 1, 0, 0), 0.0);
    EXPECT_THROW(lemma_bound_sdde(2, 1, 1, 0.5, 1, -1), std::invalid_argument);
}

TEST(DelayDiffConstants, Examples) {
    EXPECT_NEAR(delay_diff_constants(2, 1, 1, 1, 0).K2, 2 + 8 * std::exp(7.0), 1e-12 * 8775.07);
    EXPECT_NEAR(delay_diff_constants(2, 1, 1, 0.5, 0).N2, 3 * std::exp(3.5), 1e-12 * 99.35);
    const auto c = delay_diff_constants(2, 1, 1, 0.5, 0);
    EXPECT_GT(c.K1, 0);
    EXPECT_GT(c.N1, 0);
    EXPECT_LT(c.N1, delay_diff_constants(2, 1, 1, 0.5, 1).N1);
}

TEST(EmOneStep, Examples) {
    EXPECT_NEAR(em_onestep_constant_sde(2, 1, 1, 1), 3 * (2 + std::sqrt(3.0)), 1e-13);
    EXPECT_NEAR(em_onestep_constant_sde(2, 0.4, 0, 0.3), 3 * 0.4 * 0.3, 1e-15);
    EXPECT_NEAR(em_onestep_constant_sde(4, 1, 1, 1), 81 * (2 + std::sqrt(105.0)), 1e-11);
    const double loose = em_onestep_constant_sdde(2, 1, 1, 1, 0.01, 1, 1, false);
    const double strict = em_onestep_constant_sdde(2, 1, 1, 1, 0.01, 1, 1, true);
    EXPECT_NEAR(strict, loose * 0.01, 1e-12 * loose);
}

TEST(GapBound, Limits) {
    GapInputs in;
    in.p = 2;
    in.L = 0.1;
    in.L_hat = 0.2;
    in.sigma_hi = 1;
    in.tau = 0.5;
    in.span = 1;
    in.seg_norm = 1;
    in.init_moment = 1;
    in.step = 1e-30;
    EXPECT_LT(gap_bound(GapMode::y_Y, in), 1e-25);
    in.step = 0.01;
    EXPECT_GT(gap_bound(GapMode::y_Y, in), 0.0);
    GapInputs small = in;
    small.tau = 1e-30;
    EXPECT_LT(gap_bound(GapMode::X_Y, small), 1e-25);
    EXPECT_LT(gap_bound(GapMode::x_y, small), 1e-25);
    GapInputs missing = in;
    missing.seg_norm = NAN;
    EXPECT_THROW(gap_bound(GapMode::x_X, missing), std::invalid_argument);
    EXPECT_NEAR(log_gap_bound(GapMode::x_X, in), std::log(gap_bound(GapMode::x_X, in)), 1e-12);
}

TEST(Thresholds, EqualDeltaAtZero) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    for (int i = 0; i < 20; ++i) {
        const ModelConstants mc{2.0 + u(gen), u(gen), u(gen), 0.0, u(gen)};
        const double delta = 0.1 + 0.4 * u(gen);
        const auto in = params(SystemKind::sdde, 1 + u(gen), u(gen), u(gen));
        EXPECT_EQ(threshold_R(in, mc, 0.0, delta), delta);
        EXPECT_EQ(threshold_U(in, mc, 0.5, 0.0, delta), delta);
        EXPECT_EQ(threshold_V(in, mc, 0.0, delta), delta);
        EXPECT_EQ(threshold_W(in, mc, 0.5, 0.0, delta), delta);
    }
}

TEST(Thresholds, RAndWIncreaseInTheirParameter) {
    const auto in = params(SystemKind::sdde, 2.0, 1.0, 0.0);
    double prevR = 0.5, prevW = 0.5;
    for (int i = 1; i <= 20; ++i) {
        const double s = 0.005 * i;
        const double r = threshold_R(in, kModel, s, 0.5);
        const double w = threshold_W(in, kModel, 0.1, s, 0.5);
        EXPECT_GT(r, prevR);
        EXPECT_GT(w, prevW);
        prevR = r;
        prevW = w;
    }
}

TEST(Thresholds, WExcessScalesLikeStepToHalfP) {
    const auto in = params(SystemKind::em_sdde, 2.0, 1.0, 0.0);
    for (double p : {2.0, 3.0, 4.0}) {
        ModelConstants mc = kModel;
        mc.p = p;
        const double a = threshold_W(in, mc, 0.01, 1e-12, 0.5) - 0.5;
        const double b = threshold_W(in, mc, 0.01, 4e-12, 0.5) - 0.5;
        EXPECT_NEAR(b / a, std::pow(4.0, p / 2), 1e-6 * std::pow(4.0, p / 2));
    }
}

TEST(Transfer, TimeHorizonExample) {
    const auto in = params(SystemKind::sdde, 2.0, 1.0, 0.0);
    for (double tau : {1e-3, 0.1}) {
        const auto r = transfer_sdde_to_sde(in, kModel, tau, 0.5);
        EXPECT_NEAR(r.T, std::log(8.0) + tau, 1e-14);
        EXPECT_EQ(r.threshold_name, "R");
    }
}

TEST(Transfer, HorizonsAreGridMultiples) {
    const auto u = transfer_sde_to_emsde(params(SystemKind::sde), kModel, 0.3, 0.01, 0.5);
    EXPECT_NEAR(u.T / 0.01, std::round(u.T / 0.01), 1e-9);
    const auto v = transfer_emsde_to_emsdde(params(SystemKind::em_sde), kModel, 0.03, 0.5);
    EXPECT_NEAR(v.T / 0.03, std::round(v.T / 0.03), 1e-9);
    const auto w = transfer_emsdde_to_sdde(params(SystemKind::em_sdde), kModel, 0.03, 0.01, 0.5);
    EXPECT_NEAR(w.T / 0.03, std::round(w.T / 0.03), 1e-9);
}

TEST(Transfer, LargeParametersAreInapplicableNotErrors) {
    const auto r = transfer_sdde_to_sde(params(SystemKind::sdde), kModel, 1e6, 0.5);
    EXPECT_FALSE(r.applicable);
    EXPECT_GE(r.threshold, 1.0);
    EXPECT_FALSE(r.output.has_value());
    EXPECT_NE(r.note.find("decrease"), std::string::npos);
}

TEST(Transfer, RejectsInvalidConfidence) {
    EXPECT_THROW(transfer_sdde_to_sde(params(SystemKind::sdde), kModel, 0.1, 1.0), std::invalid_argument);
    EXPECT_THROW(transfer_sdde_to_sde(params(SystemKind::sdde), kModel, 0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(transfer_sdde_to_sde(params(SystemKind::sde), kModel, 0.1, 0.5), std::invalid_argument);
}

TEST(Transfer, ApplicableReportsSatisfyRateIdentity) {
    // Weak coupling with a generous confidence level keeps every threshold below one.
    const ModelConstants mc{2.0, 1e-4, 1e-4, 0.05, 0.1};
    const double tau = 1e-4, step = 1e-4;
    const std::vector<CertReport> reports{
        transfer_sdde_to_sde(params(SystemKind::sdde, 1.5, 2.0, 0.01), mc, tau, 0.9),
        transfer_sde_to_emsde(params(SystemKind::sde, 1.5, 2.0, 0.01), mc, tau, step, 0.9),
        transfer_emsde_to_emsdde(params(SystemKind::em_sde, 1.5, 2.0, 0.01), mc, tau, 0.9),
        transfer_emsdde_to_sdde(params(SystemKind::em_sdde, 1.5, 2.0, 0.01), mc, tau, step, 0.9)};
    for (const auto& r : reports) {
        ASSERT_TRUE(r.applicable) << r.threshold_name << " = " << r.threshold;
        ASSERT_TRUE(r.output.has_value());
        EXPECT_NEAR(std::exp(-r.output->lambda * r.T), r.threshold, 1e-12 * r.threshold);
        EXPECT_GT(r.output->M, 0.0);
        EXPECT_GE(r.output->d, 0.0);
        EXPECT_EQ(r.output->kind, target_of(r.direction));
    }
    EXPECT_EQ(reports[0].output->basis, NormBasis::initial_moment);
    EXPECT_EQ(reports[3].output->basis, NormBasis::segment);
}

TEST(Transfer, IntermediatesAreNamed) {
    const auto r = transfer_sdde_to_sde(params(SystemKind::sdde), kModel, 1e-3, 0.5);
    for (const char* n : {"Cp", "K1", "K2", "N1", "N2", "d3"}) EXPECT_GT(r.intermediate(n), 0.0) << n;
    EXPECT_THROW(r.intermediate("d8"), std::out_of_range);
    ASSERT_EQ(r.intermediates.size(), r.log_intermediates.size());
    for (std::size_t i = 0; i < r.intermediates.size(); ++i)
        EXPECT_NEAR(std::log(r.intermediates[i].second), r.log_intermediates[i].second, 1e-12);
}

TEST(Transfer, HugeConstantsStayFiniteInLogSpace) {
    const ModelConstants mc{6.0, 5.0, 5.0, 1.0, 3.0};
    const auto r = transfer_emsdde_to_sdde(params(SystemKind::em_sdde, 1e3, 0.01, 0.0), mc, 5.0, 0.5, 0.5);
    EXPECT_FALSE(r.applicable);
    EXPECT_TRUE(std::isfinite(r.log_threshold));
    EXPECT_GT(r.log_threshold, 700.0);
}

TEST(Chain, StopsAtFirstInapplicable) {
    ChainInputs in{kModel, 1.0, 1.0, 0.5, 1.0};
    const auto reports = transfer_chain(params(SystemKind::em_sde), in);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_FALSE(reports[0].applicable);
    EXPECT_EQ(reports[0].direction, Direction::emsde_to_emsdde);
}

TEST(Chain, TinyParametersGiveFourApplicableReports) {
    // The horizons grow along the chain, so the start needs a fast decay for
    // the last thresholds to fit below one at a representable tau.
    ChainInputs in{kModel, 1e-200, 1e-200, 0.01, 1.0};
    const auto start = params(SystemKind::sdde, 3.0, 10.0, 0.0);
    const auto reports = transfer_chain(start, in);
    ASSERT_EQ(reports.size(), 4u);
    for (const auto& r : reports) EXPECT_TRUE(r.applicable) << r.threshold_name << " = " << r.threshold;
    EXPECT_EQ(reports.back().output->kind, SystemKind::sdde);
    EXPECT_GE(reports.back().output->M, start.M);
    EXPECT_LE(reports.back().output->lambda, start.lambda);
    EXPECT_GE(reports.back().output->d, start.d);
}

TEST(Bounds, NondecreasingInEveryArgument) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double p = 2 + u(gen), Lh = u(gen), s = u(gen), tau = u(gen), seg = u(gen), span = u(gen);
        const double base = lemma_bound_sdde(p, Lh, s, tau, seg, span);
        EXPECT_LE(base, lemma_bound_sdde(p, Lh * 1.1, s, tau, seg, span));
        EXPECT_LE(base, lemma_bound_sdde(p, Lh, s * 1.1, tau, seg, span));
        EXPECT_LE(base, lemma_bound_sdde(p, Lh, s, tau * 1.1, seg, span));
        EXPECT_LE(base, lemma_bound_sdde(p, Lh, s, tau, seg * 1.1, span));
        EXPECT_LE(base, lemma_bound_sdde(p, Lh, s, tau, seg, span * 1.1));
        GapInputs g{p, u(gen), Lh, s, tau, 0.01, span, seg, seg};
        for (auto mode : {GapMode::x_y, GapMode::y_Y, GapMode::X_Y, GapMode::x_X}) {
            const double b = gap_bound(mode, g);
            EXPECT_GT(b, 0.0);
            GapInputs h = g;
            h.L *= 1.1;
            EXPECT_LE(b, gap_bound(mode, h));
            h = g;
            h.span *= 1.1;
            EXPECT_LE(b, gap_bound(mode, h));
        }
    }
}

TEST(StabilityParams, EnvelopeAndValidation) {
    const auto s = StabilityParams::make(SystemKind::sde, 3.0, 2.0, 0.1);
    EXPECT_NEAR(s.envelope(2.0, 0.5), 6.0 * std::exp(-1.0) + 0.1, 1e-15);
    EXPECT_EQ(s.basis, NormBasis::initial_moment);
    EXPECT_THROW(StabilityParams::make(SystemKind::sdde, 0.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(StabilityParams::make(SystemKind::sdde, 1.0, -1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(StabilityParams::make(SystemKind::sdde, 1.0, 1.0, -0.1), std::invalid_argument);
    EXPECT_EQ(system_kind_from_string("em_sdde"), SystemKind::em_sdde);
    EXPECT_THROW(system_kind_from_string("ode"), std::invalid_argument);
}
