#include "gstab/certify.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gstab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLn2 = std::numbers::ln2;
const double kLn3 = std::log(3.0);

// log(e^a + e^b), exact when either side is -inf.
double lse(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double ln(double x) { return x == 0.0 ? kNegInf : std::log(x); }

// e * log(x) with x^0 = 1 also at x = 0.
double ln_pow(double x, double e) { return e == 0.0 ? 0.0 : e * ln(x); }

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_p(double p) { require(std::isfinite(p) && p >= 2.0, "p must be finite and >= 2"); }
void check_nonneg(double v, const char* what) { require(std::isfinite(v) && v >= 0.0, what); }

// Log-space constants of one parameter set; every bound is assembled from these.
struct Core {
    double p, L, Lh, sh, s2, tau;
    double lnA, lnB;           // A = Lh (1 + s2 p), B = 1 + Lh tau (1 + s2 p)
    double a1, a2, beta;       // exponent rates of the two moment lemmas and of N1
    double r1, r2, r3;         // exponent rates of the gap lemmas
    double lnQ;                // tau^{p/2} + s2^p tau^{p/2} + C(p) sigma_hi^p
    double lnLip;              // L + s2 p L
    double lnC;                // 3^{3p/2 - 2} Lh^{p/2}

    Core(double p_, double L_, double Lh_, double sh_, double tau_)
        : p(p_), L(L_), Lh(Lh_), sh(sh_), s2(sh_ * sh_), tau(tau_) {
        check_p(p);
        check_nonneg(L, "L must be finite and >= 0");
        check_nonneg(Lh, "L_hat must be finite and >= 0");
        check_nonneg(sh, "sigma_hi must be finite and >= 0");
        check_nonneg(tau, "tau must be finite and >= 0");
        lnA = ln(Lh) + std::log1p(s2 * p);
        lnB = std::log1p(Lh * tau * (1.0 + s2 * p));
        a1 = (p + 3 * p * Lh - 2 * Lh + s2 * (p + 2 * p * p * Lh - p * Lh)) / 2;
        a2 = (p + 3 * p * Lh - 2 * Lh + s2 * p * (1 - 2 * Lh + 3 * p * Lh)) / 2;
        beta = (p + 2 * p * Lh + s2 * (p + p * p * Lh + p * Lh)) / 2;
        r1 = (p + 5 * p * L - 4 * L + s2 * (p + 5 * p * p * L - 4 * p * L)) / 2;
        r2 = 4 * p * L - 4 * L + p / 2 + s2 * (p / 2 + 4 * p * p * L - 4 * p * L);
        r3 = (p + 8 * p * L - 8 * L + s2 * (p + 8 * p * p * L - 8 * p * L)) / 2;
        lnQ = lse(ln_pow(tau, p / 2) + std::log1p(std::pow(s2, p)), std::log(bdg_constant(p)) + ln_pow(sh, p));
        lnLip = ln(L) + std::log1p(s2 * p);
        lnC = (1.5 * p - 2) * kLn3 + ln_pow(Lh, p / 2);
    }

    // log(A span + B seg)
    double ln_growth(double span, double seg) const { return lse(lnA + ln(span), lnB + ln(seg)); }

    double lnK1() const { return (1.5 * p - 1) * kLn3 + ln_pow(Lh, p / 2) + lnB + lnQ; }
    double lnN1(double span) const { return lnC + lse(0.0, kLn2 + lnA + ln(span) + beta * span) + lnQ; }
    double lnK2() const { return (p - 1) * kLn2 + lse(0.0, lnB + a1 * tau); }
    double lnN2() const { return (p - 1) * kLn2 + ln(tau) + lnA + a1 * tau; }
    double lnD1() const {
        return lnC + lse(ln_pow(tau, p / 2) + std::log1p(std::pow(s2, p)),
                         ln_pow(sh, p) + 0.5 * std::log(odd_double_factorial(p)));
    }
    // d7 without the step factor.
    double lnD7(double span, double seg) const {
        return lnC + lnQ + lse(0.0, kLn2 + ln_growth(span, seg) + a1 * span);
    }
};

}  // namespace

// ---------------------------------------------------------------- names

const char* to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::sdde: return "sdde";
        case SystemKind::sde: return "sde";
        case SystemKind::em_sdde: return "em_sdde";
        case SystemKind::em_sde: return "em_sde";
    }
    return "unknown";
}

SystemKind system_kind_from_string(const std::string& name) {
    if (name == "sdde") return SystemKind::sdde;
    if (name == "sde") return SystemKind::sde;
    if (name == "em_sdde") return SystemKind::em_sdde;
    if (name == "em_sde") return SystemKind::em_sde;
    throw std::invalid_argument("unknown system kind '" + name + "' (expected sdde, sde, em_sde or em_sdde)");
}

const char* to_string(GapMode mode) {
    switch (mode) {
        case GapMode::x_y: return "x_y";
        case GapMode::y_Y: return "y_Y";
        case GapMode::X_Y: return "X_Y";
        case GapMode::x_X: return "x_X";
    }
    return "unknown";
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::sdde_to_sde: return "sdde_to_sde";
        case Direction::sde_to_emsde: return "sde_to_emsde";
        case Direction::emsde_to_emsdde: return "emsde_to_emsdde";
        case Direction::emsdde_to_sdde: return "emsdde_to_sdde";
    }
    return "unknown";
}

Direction direction_from(SystemKind source) {
    switch (source) {
        case SystemKind::sdde: return Direction::sdde_to_sde;
        case SystemKind::sde: return Direction::sde_to_emsde;
        case SystemKind::em_sde: return Direction::emsde_to_emsdde;
        case SystemKind::em_sdde: return Direction::emsdde_to_sdde;
    }
    throw std::invalid_argument("unknown system kind");
}

SystemKind target_of(Direction d) {
    switch (d) {
        case Direction::sdde_to_sde: return SystemKind::sde;
        case Direction::sde_to_emsde: return SystemKind::em_sde;
        case Direction::emsde_to_emsdde: return SystemKind::em_sdde;
        case Direction::emsdde_to_sdde: return SystemKind::sdde;
    }
    throw std::invalid_argument("unknown direction");
}

// ---------------------------------------------------------------- params

StabilityParams StabilityParams::make(SystemKind kind, double M, double lambda, double d) {
    require(std::isfinite(M) && M > 0.0, "StabilityParams: M must be finite and > 0");
    require(std::isfinite(d) && d >= 0.0, "StabilityParams: d must be finite and >= 0");
    return from_log(kind, std::log(M), lambda, ln(d));
}

StabilityParams StabilityParams::from_log(SystemKind kind, double log_M, double lambda, double log_d) {
    require(std::isfinite(lambda) && lambda > 0.0, "StabilityParams: lambda must be finite and > 0");
    require(!std::isnan(log_M) && log_M != kNegInf && log_M != -kNegInf, "StabilityParams: log M must be finite");
    require(!std::isnan(log_d) && log_d != -kNegInf, "StabilityParams: log d must be < inf");
    StabilityParams s;
    s.kind = kind;
    s.basis = (kind == SystemKind::sde || kind == SystemKind::em_sde) ? NormBasis::initial_moment
                                                                       : NormBasis::segment;
    s.log_M = log_M;
    s.log_d = log_d;
    s.M = std::exp(log_M);
    s.d = std::exp(log_d);
    s.lambda = lambda;
    return s;
}

double StabilityParams::envelope(double norm, double t) const {
    return std::exp(log_M + ln(norm) - lambda * t) + d;
}

// ---------------------------------------------------------------- constants

double bdg_constant(double p) {
    check_p(p);
    return std::exp(p / 2 * ((p + 1) * std::log(p) - kLn2 - (p - 1) * std::log(p - 1)));
}

double odd_double_factorial(double p) {
    require(std::isfinite(p) && p >= 0.0, "odd_double_factorial: p must be finite and >= 0");
    return std::exp(p * kLn2 + std::lgamma(p + 0.5) - 0.5 * std::log(std::numbers::pi));
}

double lemma_bound_sdde(double p, double L_hat, double sigma_hi, double tau, double seg_norm, double span) {
    check_nonneg(span, "lemma_bound_sdde: span must be >= 0");
    check_nonneg(seg_norm, "lemma_bound_sdde: segment norm must be >= 0");
    Core c(p, 0.0, L_hat, sigma_hi, tau);
    return std::exp(c.ln_growth(span, seg_norm) + c.a1 * span);
}

double lemma_bound_sde(double p, double L_hat, double sigma_hi, double init_moment, double span) {
    check_nonneg(span, "lemma_bound_sde: span must be >= 0");
    check_nonneg(init_moment, "lemma_bound_sde: initial moment must be >= 0");
    Core c(p, 0.0, L_hat, sigma_hi, 0.0);
    return std::exp(lse(ln(init_moment), c.lnA + ln(span)) + c.a2 * span);
}

DelayDiffConstants delay_diff_constants(double p, double L_hat, double sigma_hi, double tau, double span) {
    require(tau > 0.0, "delay_diff_constants: tau must be > 0");
    check_nonneg(span, "delay_diff_constants: span must be >= 0");
    Core c(p, 0.0, L_hat, sigma_hi, tau);
    return {std::exp(c.lnK1()), std::exp(c.lnN1(span)), std::exp(c.lnK2()), std::exp(c.lnN2())};
}

double em_onestep_constant_sde(double p, double L_hat, double sigma_hi, double tau) {
    Core c(p, 0.0, L_hat, sigma_hi, tau);
    return std::exp(c.lnD1());
}

double em_onestep_constant_sdde(double p, double L_hat, double sigma_hi, double tau, double step, double span,
                                double seg_norm, bool strict) {
    check_nonneg(step, "em_onestep_constant_sdde: step must be >= 0");
    check_nonneg(span, "em_onestep_constant_sdde: span must be >= 0");
    check_nonneg(seg_norm, "em_onestep_constant_sdde: segment norm must be >= 0");
    Core c(p, 0.0, L_hat, sigma_hi, tau);
    return std::exp(c.lnD7(span, seg_norm) + (strict ? ln_pow(step, p / 2) : 0.0));
}

double log_gap_bound(GapMode mode, const GapInputs& in) {
    auto need = [&](double v, const char* name) {
        if (std::isnan(v)) throw std::invalid_argument(std::string("gap_bound(") + to_string(mode) +
                                                       "): missing input " + name);
    };
    need(in.p, "p");
    need(in.L, "L");
    need(in.L_hat, "L_hat");
    need(in.sigma_hi, "sigma_hi");
    need(in.tau, "tau");
    need(in.span, "span");
    if (mode == GapMode::y_Y || mode == GapMode::x_X) need(in.step, "step");
    if (mode == GapMode::y_Y)
        need(in.init_moment, "init_moment");
    else
        need(in.seg_norm, "seg_norm");
    check_nonneg(in.span, "gap_bound: span must be >= 0");
    Core c(in.p, in.L, in.L_hat, in.sigma_hi, in.tau);
    const double p = in.p, span = in.span, tau = in.tau;

    switch (mode) {
        case GapMode::x_y: {
            check_nonneg(in.seg_norm, "gap_bound: seg_norm must be >= 0");
            const double k = lse(c.lnK2() + ln(in.seg_norm), c.lnN2()) + ln(tau);
            const double n = ln_pow(tau, p / 2) +
                             lse(c.lnK1() + ln(in.seg_norm) + c.beta * span, c.lnN1(span) + ln(span));
            return kLn2 + c.lnLip + lse(k, n) + c.r1 * span;
        }
        case GapMode::y_Y: {
            check_nonneg(in.init_moment, "gap_bound: init_moment must be >= 0");
            check_nonneg(in.step, "gap_bound: step must be >= 0");
            const double growth = lse(ln(in.init_moment), c.lnA + ln(span)) + c.a2 * span;
            return 2 * kLn2 + c.lnD1() + c.lnLip + ln_pow(in.step, p / 2) + c.r2 * span +
                   lse(ln(span), kLn2 + growth);
        }
        case GapMode::X_Y: {
            check_nonneg(in.seg_norm, "gap_bound: seg_norm must be >= 0");
            const double first = ln_pow(tau, p / 2 - 1) +
                                 lse(c.lnK1() + ln(in.seg_norm) + c.beta * span, c.lnN1(span) + ln(span));
            const double second = lse(c.lnK2() + ln(in.seg_norm), c.lnN2());
            const double d5 = kLn2 + c.lnLip + lse(first, second);
            return d5 + ln(tau) + c.r1 * span;
        }
        case GapMode::x_X: {
            check_nonneg(in.seg_norm, "gap_bound: seg_norm must be >= 0");
            check_nonneg(in.step, "gap_bound: step must be >= 0");
            return 2 * kLn2 + c.lnLip + c.lnD7(span, in.seg_norm) + ln_pow(in.step, p / 2) + c.r3 * span;
        }
    }
    throw std::invalid_argument("gap_bound: unknown mode");
}

double gap_bound(GapMode mode, const GapInputs& in) { return std::exp(log_gap_bound(mode, in)); }

// ---------------------------------------------------------------- transfers

double CertReport::intermediate(const std::string& name) const {
    for (const auto& [k, v] : intermediates)
        if (k == name) return v;
    throw std::out_of_range("CertReport: no intermediate named " + name);
}

namespace {

void check_transfer_inputs(const StabilityParams& in, double delta_conf) {
    require(delta_conf > 0.0 && delta_conf < 1.0, "transfer: delta must lie in (0, 1)");
    require(in.lambda > 0.0 && std::isfinite(in.lambda), "transfer: input rate must be > 0");
    require(std::isfinite(in.log_M), "transfer: input M must be finite");
}

// log(2^{p-1} M / delta), which must be positive for T to exceed the window.
double log_q(const StabilityParams& in, double p, double delta_conf) {
    const double q = (p - 1) * kLn2 + in.log_M - std::log(delta_conf);
    require(q > 0.0, "transfer: need 2^{p-1} M > delta");
    return q;
}

// T = (floor(q / (rate h)) + k) h, or the h -> 0 limit q / rate.
double grid_T(double q, double rate, double h, int k) {
    if (h == 0.0) return q / rate;
    return (std::floor(q / (rate * h)) + k) * h;
}

struct Threshold {
    double value;
    double log_value;
};

// delta + e^{lx}
Threshold add_delta(double delta_conf, double lx) {
    return {delta_conf + std::exp(lx), lse(std::log(delta_conf), lx)};
}

CertReport start_report(Direction dir, const StabilityParams& in, const ModelConstants& mc, double tau, double step,
                        double delta_conf, const char* name) {
    require(direction_from(in.kind) == dir,
            (std::string(to_string(dir)) + ": input envelope belongs to " + to_string(in.kind)).c_str());
    CertReport r;
    r.direction = dir;
    r.model = mc;
    r.tau = tau;
    r.step = step;
    r.delta_conf = delta_conf;
    r.input = in;
    r.threshold_name = name;
    return r;
}

void add(CertReport& r, const char* name, double log_value) {
    r.intermediates.emplace_back(name, std::exp(log_value));
    r.log_intermediates.emplace_back(name, log_value);
}

// Fills rate, applicability and the verdict note; returns the rate or 0.
double finish_threshold(CertReport& r, Threshold th) {
    r.threshold = th.value;
    r.log_threshold = th.log_value;
    r.applicable = th.value < 1.0;
    if (!r.applicable) {
        r.note = std::string("threshold ") + r.threshold_name + " >= 1: not applicable; decrease " +
                 ((r.direction == Direction::sdde_to_sde || r.direction == Direction::emsde_to_emsdde) ? "tau"
                                                                                                         : "the step size");
        return 0.0;
    }
    return -std::log(th.value) / r.T;
}

// log(x / (1 - e^{-rate T}))
double ln_tail_sum(double lx, double rate, double T) { return lx - std::log(-std::expm1(-rate * T)); }

struct ThresholdParts {
    double T;
    double lx;  // log of the correction added to delta
};

ThresholdParts parts_R(const Core& c, const StabilityParams& in, double delta_conf) {
    const double T = log_q(in, c.p, delta_conf) / in.lambda + c.tau;
    const double w = 2 * T - c.tau;
    const double inner = lse(c.lnK2() + ln(c.tau), c.lnK1() + ln_pow(c.tau, c.p / 2) + c.beta * w);
    return {T, c.p * kLn2 + c.lnLip + inner + c.r1 * w};
}

double u_rate(const Core& c) {
    const double p = c.p, L = c.L, Lh = c.Lh, s2 = c.s2;
    const double e1 = p + 4 * p * L - 8 * L + s2 * (p + 8 * p * p * L - 8 * p * L);
    const double e2 = p + 3 * p * Lh - 2 * Lh + s2 * (p - 2 * p * Lh + 3 * p * p * Lh);
    return e1 + e2;
}

ThresholdParts parts_U(const Core& c, const StabilityParams& in, double step, double delta_conf) {
    const double T = grid_T(log_q(in, c.p, delta_conf), in.lambda, step, 1);
    return {T, (c.p + 2) * kLn2 + c.lnD1() + c.lnLip + u_rate(c) * T + ln_pow(step, c.p / 2)};
}

ThresholdParts parts_V(const Core& c, const StabilityParams& in, double delta_conf) {
    const double T = grid_T(log_q(in, c.p, delta_conf), in.lambda, c.tau, 2);
    const double inner = lse(ln_pow(c.tau, c.p / 2) + c.lnK1() + 2 * c.beta * T, ln(c.tau) + c.lnK2());
    return {T, c.p * kLn2 + c.lnLip + inner + 2 * c.r1 * T};
}

double ln_w_prefactor(const Core& c) { return (c.p + 2) * kLn2 + c.lnC + c.lnLip + c.lnQ + c.lnB; }

ThresholdParts parts_W(const Core& c, const StabilityParams& in, double step, double delta_conf) {
    const double T = grid_T(log_q(in, c.p, delta_conf), in.lambda, c.tau, 3);
    const double w = T - c.tau;
    return {T, ln_w_prefactor(c) + 2 * c.a1 * w + 2 * c.r3 * w + ln_pow(step, c.p / 2)};
}

Core core_of(const ModelConstants& mc, double tau) {
    require(mc.sigma_lo >= 0.0 && mc.sigma_lo <= mc.sigma_hi, "need 0 <= sigma_lo <= sigma_hi");
    return Core(mc.p, mc.L, mc.L_hat, mc.sigma_hi, tau);
}

void check_small(double v, const char* what) { require(std::isfinite(v) && v >= 0.0, what); }

}  // namespace

double threshold_R(const StabilityParams& in, const ModelConstants& mc, double tau, double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    check_small(tau, "threshold_R: tau must be >= 0");
    return add_delta(delta_conf, parts_R(core_of(mc, tau), in, delta_conf).lx).value;
}

double threshold_U(const StabilityParams& in, const ModelConstants& mc, double tau, double step, double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    check_small(step, "threshold_U: step must be >= 0");
    return add_delta(delta_conf, parts_U(core_of(mc, tau), in, step, delta_conf).lx).value;
}

double threshold_V(const StabilityParams& in, const ModelConstants& mc, double tau, double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    check_small(tau, "threshold_V: tau must be >= 0");
    return add_delta(delta_conf, parts_V(core_of(mc, tau), in, delta_conf).lx).value;
}

double threshold_W(const StabilityParams& in, const ModelConstants& mc, double tau, double step, double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    require(tau > 0.0, "threshold_W: tau must be > 0");
    check_small(step, "threshold_W: step must be >= 0");
    return add_delta(delta_conf, parts_W(core_of(mc, tau), in, step, delta_conf).lx).value;
}

CertReport transfer_sdde_to_sde(const StabilityParams& in, const ModelConstants& mc, double tau, double delta_conf,
                                double norm_ratio) {
    check_transfer_inputs(in, delta_conf);
    require(tau > 0.0 && std::isfinite(tau), "transfer_sdde_to_sde: tau must be > 0");
    require(norm_ratio >= 1.0 && std::isfinite(norm_ratio),
            "transfer_sdde_to_sde: norm ratio ||xi||^p / E|xi(0)|^p must be finite and >= 1");
    const Core c = core_of(mc, tau);
    auto r = start_report(Direction::sdde_to_sde, in, mc, tau, 0.0, delta_conf, "R");
    r.norm_ratio = norm_ratio;
    const auto parts = parts_R(c, in, delta_conf);
    r.T = parts.T;
    const double w = 2 * r.T - tau;
    add(r, "Cp", std::log(bdg_constant(c.p)));
    add(r, "K1", c.lnK1());
    add(r, "K2", c.lnK2());
    add(r, "N1", c.lnN1(r.T));
    add(r, "N2", c.lnN2());
    const double rate = finish_threshold(r, add_delta(delta_conf, parts.lx));
    const double ln_d3 =
        lse((c.p - 1) * kLn2 + in.log_d,
            c.p * kLn2 + c.lnLip + lse(c.lnN2() + ln(tau), c.lnN1(r.T) + ln_pow(tau, c.p / 2) + ln(w)) + c.r1 * w);
    add(r, "d3", ln_d3);
    if (r.applicable) {
        const double ln_M = lse((c.p - 1) * kLn2 + in.log_M, 0.0) + std::log(norm_ratio) + rate * r.T;
        r.output = StabilityParams::from_log(SystemKind::sde, ln_M, rate, ln_tail_sum(ln_d3, rate, r.T));
        r.note = "prefactor is relative to E|xi(0)|^p and includes the ratio ||xi||^p / E|xi(0)|^p";
    }
    return r;
}

CertReport transfer_sde_to_emsde(const StabilityParams& in, const ModelConstants& mc, double tau, double step,
                                 double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    require(tau > 0.0 && std::isfinite(tau), "transfer_sde_to_emsde: tau must be > 0");
    require(step > 0.0 && std::isfinite(step), "transfer_sde_to_emsde: step must be > 0");
    const Core c = core_of(mc, tau);
    auto r = start_report(Direction::sde_to_emsde, in, mc, tau, step, delta_conf, "U");
    const auto parts = parts_U(c, in, step, delta_conf);
    r.T = parts.T;
    add(r, "Cp", std::log(bdg_constant(c.p)));
    add(r, "D1", c.lnD1());
    const double rate = finish_threshold(r, add_delta(delta_conf, parts.lx));
    const double ln_d4 = lse((c.p - 1) * kLn2 + in.log_d,
                             (c.p + 1) * kLn2 + c.lnD1() + ln(r.T) + ln_pow(tau, c.p / 2) + c.lnLip +
                                 std::log1p(2 * c.Lh + 2 * c.s2 * c.p * c.Lh) + u_rate(c) * r.T);
    add(r, "d4", ln_d4);
    if (r.applicable) {
        const double ln_M = lse((c.p - 1) * kLn2 + in.log_M + rate * r.T, 0.0);
        r.output = StabilityParams::from_log(SystemKind::em_sde, ln_M, rate, ln_tail_sum(ln_d4, rate, r.T));
    }
    return r;
}

CertReport transfer_emsde_to_emsdde(const StabilityParams& in, const ModelConstants& mc, double tau,
                                    double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    require(tau > 0.0 && std::isfinite(tau), "transfer_emsde_to_emsdde: tau must be > 0");
    const Core c = core_of(mc, tau);
    auto r = start_report(Direction::emsde_to_emsdde, in, mc, tau, 0.0, delta_conf, "V");
    const auto parts = parts_V(c, in, delta_conf);
    r.T = parts.T;
    add(r, "Cp", std::log(bdg_constant(c.p)));
    add(r, "K1", c.lnK1());
    add(r, "K2", c.lnK2());
    add(r, "N1", c.lnN1(r.T));
    add(r, "N2", c.lnN2());
    const double rate = finish_threshold(r, add_delta(delta_conf, parts.lx));
    const double ln_d6 =
        lse((c.p - 1) * kLn2 + in.log_d,
            c.p * kLn2 + c.lnLip +
                lse(kLn2 + ln_pow(tau, c.p / 2) + ln(r.T) + c.lnN1(r.T), ln(tau) + c.lnN2()) + 2 * c.r1 * r.T);
    add(r, "d6", ln_d6);
    if (r.applicable) {
        const double ln_M = lse((c.p - 1) * kLn2 + in.log_M, 0.0) + rate * r.T;
        r.output = StabilityParams::from_log(SystemKind::em_sdde, ln_M, rate, ln_tail_sum(ln_d6, rate, r.T));
    }
    return r;
}

CertReport transfer_emsdde_to_sdde(const StabilityParams& in, const ModelConstants& mc, double tau, double step,
                                   double delta_conf) {
    check_transfer_inputs(in, delta_conf);
    require(tau > 0.0 && std::isfinite(tau), "transfer_emsdde_to_sdde: tau must be > 0");
    require(step > 0.0 && step <= tau * (1 + 1e-12), "transfer_emsdde_to_sdde: need 0 < step <= tau");
    const double m = tau / step;
    require(std::abs(m - std::round(m)) <= 1e-9 * m, "transfer_emsdde_to_sdde: tau must be a multiple of step");
    const Core c = core_of(mc, tau);
    auto r = start_report(Direction::emsdde_to_sdde, in, mc, tau, step, delta_conf, "W");
    const auto parts = parts_W(c, in, step, delta_conf);
    r.T = parts.T;
    const double w = r.T - tau;
    add(r, "Cp", std::log(bdg_constant(c.p)));
    const double rate = finish_threshold(r, add_delta(delta_conf, parts.lx));
    const double ln_d8 =
        lse((c.p - 1) * kLn2 + in.log_d, (c.p + 1) * kLn2 + c.lnC + c.lnLip + c.lnQ + ln_pow(step, c.p / 2) +
                                             lse(0.0, 2 * kLn2 + c.lnA + ln(w) + 2 * c.a1 * w) + 2 * c.r3 * w);
    add(r, "d8", ln_d8);
    if (r.applicable) {
        const double ln_common = lse(0.0, (c.p - 1) * kLn2 + in.log_M) + (c.a1 + rate) * w;
        const double ln_d = lse(ln_common + c.lnA + ln(tau), ln_tail_sum(ln_d8, in.lambda, r.T));
        r.output = StabilityParams::from_log(SystemKind::sdde, ln_common + c.lnB, rate, ln_d);
        r.note = "envelope carries the decay factor e^{-lambda t}";
    }
    return r;
}

std::vector<CertReport> transfer_chain(const StabilityParams& start, const ChainInputs& in) {
    std::vector<CertReport> out;
    StabilityParams cur = start;
    for (int i = 0; i < 4; ++i) {
        CertReport r;
        switch (direction_from(cur.kind)) {
            case Direction::sdde_to_sde:
                r = transfer_sdde_to_sde(cur, in.model, in.tau, in.delta_conf, in.norm_ratio);
                break;
            case Direction::sde_to_emsde:
                r = transfer_sde_to_emsde(cur, in.model, in.tau, in.step, in.delta_conf);
                break;
            case Direction::emsde_to_emsdde:
                r = transfer_emsde_to_emsdde(cur, in.model, in.tau, in.delta_conf);
                break;
            case Direction::emsdde_to_sdde:
                r = transfer_emsdde_to_sdde(cur, in.model, in.tau, in.step, in.delta_conf);
                break;
        }
        const bool ok = r.applicable;
        out.push_back(std::move(r));
        if (!ok) break;
        cur = *out.back().output;
    }
    return out;
}

}  // namespace gstab
