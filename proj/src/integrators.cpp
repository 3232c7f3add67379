#include "gstab/integrators.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gstab/errors.hpp"
#include "gstab/format.hpp"

namespace gstab {

const char* to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::sdde_em: return "sdde-em";
        case TrajectoryKind::sde_em: return "sde-em";
        case TrajectoryKind::sdde_reference: return "sdde-reference";
        case TrajectoryKind::sde_reference: return "sde-reference";
    }
    return "unknown";
}

std::span<const double> Trajectory::at(std::ptrdiff_t n) const {
    if (n < first_index || n > last_index()) throw std::out_of_range("Trajectory: index outside stored range");
    return {states.data() + static_cast<std::size_t>(n - first_index) * dim, dim};
}

namespace {

void check_noise(const DelayGrid& grid, const NoiseScenario& sc, std::size_t start) {
    if (sc.steps() < grid.steps()) throw std::invalid_argument("integrator: scenario has fewer steps than the grid");
    if (std::abs(sc.delta - grid.delta()) > 1e-12 * grid.delta())
        throw std::invalid_argument("integrator: scenario step size differs from the grid");
    if (start > grid.steps()) throw std::invalid_argument("integrator: start step beyond the horizon");
}

[[noreturn]] void explode(const NoiseScenario& sc, std::size_t step, double norm) {
    std::ostringstream os;
    os << "integration diverged at step " << step << " (scenario " << sc.key.scenario << ", path "
       << sc.key.path << "): state norm " << norm;
    throw IntegrationError(os.str());
}

// Shared EM recursion. `delayed(n)` points at X_{n-m} (or X_n for the SDE).
template <bool Delay>
void em_loop(const CoefficientSystem& sys, const DelayGrid& grid, const NoiseScenario& sc,
             const IntegratorOptions& opts, Trajectory& tr) {
    const std::size_t d = sys.dim();
    const std::size_t m = grid.m();
    const double dt = grid.delta();
    std::vector<double> f(d), g(d), h(d);
    const std::size_t base = Delay ? m : 0;  // offset of index start_step in storage
    for (std::size_t n = opts.start_step; n < grid.steps(); ++n) {
        const std::size_t k = base + (n - opts.start_step);
        std::span<const double> x(tr.states.data() + k * d, d);
        std::span<const double> y = Delay ? std::span<const double>(tr.states.data() + (k - m) * d, d) : x;
        sys.drift(x, y, f);
        sys.qv_drift(x, y, g);
        sys.diffusion(x, y, h);
        double* next = tr.states.data() + (k + 1) * d;
        const double dq = sc.dQV[n];
        const double db = sc.dB[n];
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            next[i] = x[i] + f[i] * dt + g[i] * dq + h[i] * db;
            norm_sq += next[i] * next[i];
        }
        if (!(norm_sq <= opts.magnitude_cap * opts.magnitude_cap)) explode(sc, n + 1, std::sqrt(norm_sq));
    }
}

}  // namespace

Trajectory em_sdde(const CoefficientSystem& sys, const InitialSegment& xi, const DelayGrid& grid,
                   const NoiseScenario& sc, const IntegratorOptions& opts) {
    if (xi.m() != grid.m()) throw std::invalid_argument("em_sdde: initial segment does not match the grid");
    if (xi.dim() != sys.dim()) throw std::invalid_argument("em_sdde: initial segment dimension mismatch");
    check_noise(grid, sc, opts.start_step);
    Trajectory tr{TrajectoryKind::sdde_em, grid, sys.dim(),
                  static_cast<std::ptrdiff_t>(opts.start_step) - static_cast<std::ptrdiff_t>(grid.m()), {}, sc.key};
    tr.states.resize((grid.m() + 1 + grid.steps() - opts.start_step) * sys.dim());
    std::copy(xi.values().begin(), xi.values().end(), tr.states.begin());
    em_loop<true>(sys, grid, sc, opts, tr);
    return tr;
}

Trajectory em_sde(const CoefficientSystem& sys, std::span<const double> y0, const DelayGrid& grid,
                  const NoiseScenario& sc, const IntegratorOptions& opts) {
    if (y0.size() != sys.dim()) throw std::invalid_argument("em_sde: initial value dimension mismatch");
    check_noise(grid, sc, opts.start_step);
    Trajectory tr{TrajectoryKind::sde_em, grid, sys.dim(), static_cast<std::ptrdiff_t>(opts.start_step), {}, sc.key};
    tr.states.resize((grid.steps() - opts.start_step + 1) * sys.dim());
    std::copy(y0.begin(), y0.end(), tr.states.begin());
    em_loop<false>(sys, grid, sc, opts, tr);
    return tr;
}

Trajectory restrict_to_coarse(const Trajectory& fine, const DelayGrid& coarse, std::size_t r) {
    if (!(fine.grid == coarse.refined(r))) throw std::invalid_argument("restrict_to_coarse: grids do not match");
    if (fine.first_index % static_cast<std::ptrdiff_t>(r) != 0)
        throw std::invalid_argument("restrict_to_coarse: trajectory does not start on a coarse point");
    Trajectory out{fine.kind, coarse, fine.dim, fine.first_index / static_cast<std::ptrdiff_t>(r), {}, fine.key};
    for (std::ptrdiff_t n = out.first_index; n * static_cast<std::ptrdiff_t>(r) <= fine.last_index(); ++n) {
        auto s = fine.at(n * static_cast<std::ptrdiff_t>(r));
        out.states.insert(out.states.end(), s.begin(), s.end());
    }
    return out;
}

Trajectory reference_sdde(const CoefficientSystem& sys, const InitialSegment& xi, const DelayGrid& grid,
                          const NoiseScenario& sc, std::size_t r, const IntegratorOptions& opts) {
    if (r == 0) throw std::invalid_argument("reference_sdde: refinement factor must be positive");
    IntegratorOptions fine_opts = opts;
    fine_opts.start_step = opts.start_step * r;
    auto fine = em_sdde(sys, xi.resampled(r), grid.refined(r), refine(sc, r), fine_opts);
    auto out = restrict_to_coarse(fine, grid, r);
    out.kind = TrajectoryKind::sdde_reference;
    return out;
}

Trajectory reference_sde(const CoefficientSystem& sys, std::span<const double> y0, const DelayGrid& grid,
                         const NoiseScenario& sc, std::size_t r, const IntegratorOptions& opts) {
    if (r == 0) throw std::invalid_argument("reference_sde: refinement factor must be positive");
    IntegratorOptions fine_opts = opts;
    fine_opts.start_step = opts.start_step * r;
    auto fine = em_sde(sys, y0, grid.refined(r), refine(sc, r), fine_opts);
    auto out = restrict_to_coarse(fine, grid, r);
    out.kind = TrajectoryKind::sde_reference;
    return out;
}

InitialSegment flow_restart(const Trajectory& traj, double s) {
    if (!traj.is_delay()) throw std::invalid_argument("flow_restart: segment extraction needs a delay trajectory");
    const std::ptrdiff_t n = traj.grid.index_of(s);
    const auto m = static_cast<std::ptrdiff_t>(traj.grid.m());
    if (n - m < traj.first_index) throw std::invalid_argument("flow_restart: s - tau precedes the stored trajectory");
    if (n > traj.last_index()) throw std::invalid_argument("flow_restart: s beyond the stored trajectory");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m + 1) * traj.dim);
    for (std::ptrdiff_t k = n - m; k <= n; ++k) {
        auto x = traj.at(k);
        v.insert(v.end(), x.begin(), x.end());
    }
    return InitialSegment(traj.dim, traj.grid.m(), std::move(v));
}

std::vector<double> flow_restart_point(const Trajectory& traj, double s) {
    auto x = traj.at(traj.grid.index_of(s));
    return {x.begin(), x.end()};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "n,t";
    for (std::size_t i = 0; i < traj.dim; ++i) os << ",x" << i;
    os << '\n';
    for (std::ptrdiff_t n = traj.first_index; n <= traj.last_index(); ++n) {
        os << n << ',' << format_double(traj.time(n));
        for (double v : traj.at(n)) os << ',' << format_double(v);
        os << '\n';
    }
}

}  // namespace gstab
