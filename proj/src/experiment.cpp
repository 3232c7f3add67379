#include "gstab/experiment.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "gstab/integrators.hpp"
#include "gstab/scenario.hpp"

namespace gstab {

void CoupledSetup::validate() const {
    if (!system) throw std::invalid_argument("CoupledSetup: missing coefficient system");
    if (xi.dim() != system->dim()) throw std::invalid_argument("CoupledSetup: initial segment dimension mismatch");
    if (xi.m() != grid.m()) throw std::invalid_argument("CoupledSetup: initial segment does not match the grid");
    if (!(p >= 2.0)) throw std::invalid_argument("CoupledSetup: p must be >= 2");
    if (scenarios == 0 || paths == 0) throw std::invalid_argument("CoupledSetup: need scenarios and paths");
    if (refine_factor == 0) throw std::invalid_argument("CoupledSetup: refine factor must be positive");
    if (paths > 0xFFFFFFFFu || scenarios > 0xFFFFFFFFu) throw std::invalid_argument("CoupledSetup: too many paths");
}

namespace {

RngKey key_of(const CoupledSetup& s, std::size_t k, std::size_t j) {
    return RngKey{s.seed, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j)};
}

std::vector<std::shared_ptr<const VolatilityControl>> family_of(const CoupledSetup& s, std::size_t steps,
                                                                std::size_t repeat) {
    std::vector<std::shared_ptr<const VolatilityControl>> out;
    for (auto& c : make_scenario_family(s.gp, s.scenarios, steps, s.seed))
        out.push_back(std::make_shared<const VolatilityControl>(repeat == 1 ? std::move(c) : c.repeated(repeat)));
    return out;
}

}  // namespace

CoupledCurves simulate_coupled(const CoupledSetup& s) {
    s.validate();
    const DelayGrid& grid = s.grid;
    const std::size_t N = grid.steps();
    const std::size_t m = grid.m();
    const std::size_t r = s.refine_factor;
    const DelayGrid fine_grid = grid.refined(r);
    const InitialSegment fine_xi = s.xi.resampled(r);
    const auto family = family_of(s, N, 1);
    const std::size_t K = family.size();
    const auto y0 = s.xi.at(0);
    IntegratorOptions opts;
    opts.magnitude_cap = s.magnitude_cap;

    // Columns: x, X, y, Y on n = 0..N; delay_x, delay_X on n = 0..N;
    // gap_x_y, gap_y_Y, gap_X_Y, gap_x_X on n = 0..N.
    const std::size_t len = N + 1;
    const std::size_t width = 10 * len;
    auto sampler = [&](std::size_t k, std::size_t j, std::span<double> out) {
        const auto noise = sample_increments(family[k], grid, key_of(s, k, j));
        const auto fine_noise = refine(noise, r);
        auto x = em_sdde(*s.system, fine_xi, fine_grid, fine_noise, opts);
        auto y = em_sde(*s.system, y0, fine_grid, fine_noise, opts);
        if (r > 1) {
            x = restrict_to_coarse(x, grid, r);
            y = restrict_to_coarse(y, grid, r);
        }
        const auto X = em_sdde(*s.system, s.xi, grid, noise, opts);
        const auto Y = em_sde(*s.system, y0, grid, noise, opts);
        const auto lag = static_cast<std::ptrdiff_t>(m);
        for (std::size_t i = 0; i < len; ++i) {
            const auto n = static_cast<std::ptrdiff_t>(i);
            out[0 * len + i] = pow_norm(x.at(n), s.p);
            out[1 * len + i] = pow_norm(X.at(n), s.p);
            out[2 * len + i] = pow_norm(y.at(n), s.p);
            out[3 * len + i] = pow_norm(Y.at(n), s.p);
            out[4 * len + i] = pow_norm_diff(x.at(n), x.at(n - lag), s.p);
            out[5 * len + i] = pow_norm_diff(X.at(n), X.at(n - lag), s.p);
            out[6 * len + i] = pow_norm_diff(x.at(n), y.at(n), s.p);
            out[7 * len + i] = pow_norm_diff(y.at(n), Y.at(n), s.p);
            out[8 * len + i] = pow_norm_diff(X.at(n), Y.at(n), s.p);
            out[9 * len + i] = pow_norm_diff(x.at(n), X.at(n), s.p);
        }
    };
    const auto moments = estimate_moments(K, s.paths, width, sampler, s.workers);
    std::vector<double> times(len);
    for (std::size_t i = 0; i < len; ++i) times[i] = grid.time(static_cast<std::ptrdiff_t>(i));
    auto curve = [&](std::size_t c) { return curve_from_moments(moments, c * len, times, s.p, s.seed); };
    return {curve(0), curve(1), curve(2), curve(3), curve(4), curve(5), curve(6), curve(7), curve(8), curve(9)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    return sxy / sxx;
}

ConvergenceStudy convergence_study(const CoupledSetup& s, std::size_t levels, std::size_t reference_factor) {
    s.validate();
    if (levels < 2) throw std::invalid_argument("convergence_study: need at least two levels");
    if (reference_factor == 0) throw std::invalid_argument("convergence_study: reference factor must be positive");
    const DelayGrid& base = s.grid;
    const std::size_t top = std::size_t{1} << (levels - 1);
    const std::size_t ref_factor = top * reference_factor;
    const DelayGrid ref_grid = base.refined(ref_factor);
    const InitialSegment ref_xi = s.xi.resampled(ref_factor);
    const auto family = family_of(s, base.steps(), ref_factor);
    const std::size_t K = family.size();
    const auto y0 = s.xi.at(0);
    IntegratorOptions opts;
    opts.magnitude_cap = s.magnitude_cap;

    std::vector<DelayGrid> grids;
    std::vector<InitialSegment> xis;
    for (std::size_t l = 0; l < levels; ++l) {
        grids.push_back(base.refined(std::size_t{1} << l));
        xis.push_back(s.xi.resampled(std::size_t{1} << l));
    }

    auto sampler = [&](std::size_t k, std::size_t j, std::span<double> out) {
        const auto noise = sample_increments(family[k], ref_grid, key_of(s, k, j));
        const auto x = em_sdde(*s.system, ref_xi, ref_grid, noise, opts);
        const auto y = em_sde(*s.system, y0, ref_grid, noise, opts);
        const auto xT = x.at(x.last_index());
        const auto yT = y.at(y.last_index());
        for (std::size_t l = 0; l < levels; ++l) {
            const auto coarse = coarsen(noise, ref_factor >> l);
            const auto X = em_sdde(*s.system, xis[l], grids[l], coarse, opts);
            const auto Y = em_sde(*s.system, y0, grids[l], coarse, opts);
            out[l] = pow_norm_diff(yT, Y.at(Y.last_index()), s.p);
            out[levels + l] = pow_norm_diff(xT, X.at(X.last_index()), s.p);
        }
    };
    const auto m = estimate_moments(K, s.paths, 2 * levels, sampler, s.workers);
    std::vector<double> idx(levels);
    const auto yY = curve_from_moments(m, 0, idx, s.p, s.seed);
    const auto xX = curve_from_moments(m, levels, idx, s.p, s.seed);

    ConvergenceStudy out;
    for (std::size_t l = 0; l < levels; ++l) out.steps.push_back(grids[l].delta());
    out.gap_y_Y = yY.values;
    out.gap_x_X = xX.values;
    out.stderr_y_Y = yY.std_error;
    out.stderr_x_X = xX.std_error;
    out.slope_y_Y = loglog_slope(out.steps, out.gap_y_Y);
    out.slope_x_X = loglog_slope(out.steps, out.gap_x_X);
    return out;
}

}  // namespace gstab
