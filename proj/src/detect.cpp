#include "gstab/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gstab {

void FitConfig::validate() const {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw std::invalid_argument("FitConfig: tail fraction must lie in (0, 1)");
    if (!(window_lo >= 0.0 && window_lo < window_hi && window_hi <= 1.0))
        throw std::invalid_argument("FitConfig: decay window must satisfy 0 <= lo < hi <= 1");
    if (!(floor_eps > 0.0)) throw std::invalid_argument("FitConfig: floor must be > 0");
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace

FitResult fit_practical_stability(std::span<const double> t, std::span<const double> v, double seg_norm,
                                  const FitConfig& cfg, SystemKind kind) {
    cfg.validate();
    if (t.size() != v.size()) throw std::invalid_argument("fit_practical_stability: times and values differ in length");
    if (t.size() < 10) throw std::invalid_argument("fit_practical_stability: need at least 10 points");
    if (!(seg_norm > 0.0) || !std::isfinite(seg_norm))
        throw std::invalid_argument("fit_practical_stability: segment norm must be > 0");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]) || !std::isfinite(t[i]))
            throw std::invalid_argument("fit_practical_stability: non-finite curve value");

    const std::size_t n = t.size();
    const double t0 = t.front();
    const double span = t.back() - t0;
    if (!(span > 0.0)) throw std::invalid_argument("fit_practical_stability: times must increase");

    std::vector<std::size_t> tail, window;
    const double tail_start = t.back() - cfg.tail_fraction * span;
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] >= tail_start) tail.push_back(i);
        if (t[i] >= t0 + cfg.window_lo * span && t[i] <= t0 + cfg.window_hi * span) window.push_back(i);
    }
    if (tail.empty() || window.size() < 2) throw std::invalid_argument("fit_practical_stability: windows too small");

    auto tail_mean = [&](auto residual) {
        double s = 0.0;
        for (std::size_t i : tail) s += residual(i);
        return s / static_cast<double>(tail.size());
    };

    FitResult res;
    double d = tail_mean([&](std::size_t i) { return v[i]; });
    LineFit fit;
    std::vector<double> x, y;
    auto regress = [&] {
        x.clear();
        y.clear();
        for (std::size_t i : window) {
            x.push_back(t[i]);
            y.push_back(std::log(std::max(v[i] - d, cfg.floor_eps)));
        }
        fit = least_squares(x, y);
    };
    regress();
    for (std::size_t it = 0; it < cfg.backfit_iterations && -fit.slope > 0.0; ++it) {
        const double a = fit.intercept, b = fit.slope;
        const double next = tail_mean([&](std::size_t i) { return v[i] - std::exp(a + b * t[i]); });
        res.iterations = it + 1;
        if (next == d) break;
        const double prev = d;
        d = next;
        regress();
        if (std::abs(d - prev) <= 1e-15 * std::max(std::abs(d), 1e-300)) break;
    }

    res.lambda_hat = -fit.slope;
    res.d_hat = d;
    res.r_squared = fit.r_squared;
    res.M_hat = std::exp(fit.intercept) / seg_norm;
    if (!(res.lambda_hat > 0.0)) {
        res.decaying = false;
        res.verdict = "no practical exponential decay detected";
        return res;
    }
    res.decaying = true;
    res.verdict = "practical exponential decay detected";

    double M = res.M_hat;
    double d_out = std::max(d, 0.0);
    if (cfg.inflate) {
        double factor = 1.0;
        for (std::size_t i : window) {
            const double e = M * seg_norm * std::exp(-res.lambda_hat * t[i]);
            if (e > 0.0) factor = std::max(factor, (v[i] - d_out) / e);
        }
        M *= factor;
        res.M_inflation = factor;
        // Raise d until the envelope, evaluated exactly as verify_envelope
        // does, dominates every point.
        for (int guard = 0; guard < 64; ++guard) {
            const auto trial = StabilityParams::make(kind, M, res.lambda_hat, d_out);
            const auto check = verify_envelope(t, v, trial, seg_norm);
            if (check.holds) break;
            d_out = std::nextafter(d_out + check.max_violation, std::numeric_limits<double>::infinity());
        }
        res.d_inflation = d_out - std::max(res.d_hat, 0.0);
    }
    res.params = StabilityParams::make(kind, M, res.lambda_hat, d_out);
    return res;
}

FitResult fit_practical_stability(const MomentCurve& curve, double seg_norm, const FitConfig& cfg, SystemKind kind) {
    return fit_practical_stability(curve.times, curve.values, seg_norm, cfg, kind);
}

EnvelopeCheck verify_envelope(std::span<const double> t, std::span<const double> v, const StabilityParams& params,
                              double seg_norm) {
    if (t.size() != v.size() || t.empty()) throw std::invalid_argument("verify_envelope: bad curve");
    EnvelopeCheck out;
    out.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double gap = v[i] - params.envelope(seg_norm, t[i]);
        if (gap > out.max_violation || std::isnan(gap)) {
            out.max_violation = gap;
            out.worst_index = i;
        }
    }
    out.holds = out.max_violation <= 0.0;
    return out;
}

EnvelopeCheck verify_envelope(const MomentCurve& curve, const StabilityParams& params, double seg_norm) {
    return verify_envelope(curve.times, curve.values, params, seg_norm);
}

}  // namespace gstab
