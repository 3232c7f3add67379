#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "gstab/model.hpp"
#include "gstab/scenario.hpp"

namespace gstab {

enum class TrajectoryKind { sdde_em, sde_em, sdde_reference, sde_reference };

const char* to_string(TrajectoryKind kind);

// States on consecutive grid indices first_index..last_index of `grid`.
// Delay trajectories start at -m (the initial segment), others at 0.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::sdde_em;
    DelayGrid grid = DelayGrid::with_steps(1.0, 1, 1);
    std::size_t dim = 1;
    std::ptrdiff_t first_index = 0;
    std::vector<double> states;
    RngKey key;

    std::ptrdiff_t last_index() const {
        return first_index + static_cast<std::ptrdiff_t>(states.size() / dim) - 1;
    }
    std::span<const double> at(std::ptrdiff_t n) const;
    double time(std::ptrdiff_t n) const { return grid.time(n); }
    bool is_delay() const { return kind == TrajectoryKind::sdde_em || kind == TrajectoryKind::sdde_reference; }
};

struct IntegratorOptions {
    // A path whose state norm exceeds this value aborts with IntegrationError.
    double magnitude_cap = 1e12;
    // Grid index at which integration starts; the scenario is read from here on.
    std::size_t start_step = 0;
};

// X_{n+1} = X_n + f(X_n, X_{n-m}) delta + g(X_n, X_{n-m}) dQV_n + h(X_n, X_{n-m}) dB_n,
// with X_{start-m..start} taken from `xi`.
Trajectory em_sdde(const CoefficientSystem& sys, const InitialSegment& xi, const DelayGrid& grid,
                   const NoiseScenario& scenario, const IntegratorOptions& opts = {});

// Y_{n+1} = Y_n + f(Y_n, Y_n) delta + g(Y_n, Y_n) dQV_n + h(Y_n, Y_n) dB_n.
Trajectory em_sde(const CoefficientSystem& sys, std::span<const double> y0, const DelayGrid& grid,
                  const NoiseScenario& scenario, const IntegratorOptions& opts = {});

// EM on the grid refined r times (noise refined by Brownian bridge, initial
// segment resampled) restricted back to the points of `grid`.
Trajectory reference_sdde(const CoefficientSystem& sys, const InitialSegment& xi, const DelayGrid& grid,
                          const NoiseScenario& scenario, std::size_t r, const IntegratorOptions& opts = {});
Trajectory reference_sde(const CoefficientSystem& sys, std::span<const double> y0, const DelayGrid& grid,
                         const NoiseScenario& scenario, std::size_t r, const IntegratorOptions& opts = {});

// Keeps every r-th state of a trajectory computed on grid.refined(r).
Trajectory restrict_to_coarse(const Trajectory& fine, const DelayGrid& coarse, std::size_t r);

// Segment {traj(s + theta): theta in [-tau, 0]} of a delay trajectory, s >= tau
// on the grid. Restarting em_sdde from it with start_step = index(s)
// reproduces the original states bitwise.
InitialSegment flow_restart(const Trajectory& traj, double s);
// Point value traj(s) for any trajectory.
std::vector<double> flow_restart_point(const Trajectory& traj, double s);

// CSV with columns n, t, x0, x1, ...
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace gstab
