#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gstab/model.hpp"
#include "gstab/sublinear.hpp"

namespace gstab {

// One coupled Monte Carlo experiment: every path drives the delay equation x
// (fine-step reference), its EM scheme X, the auxiliary equation y (reference)
// and its EM scheme Y with the same increments.
struct CoupledSetup {
    const CoefficientSystem* system = nullptr;
    GParams gp{0.0, 1.0};
    DelayGrid grid = DelayGrid::with_steps(1.0, 1, 1);
    InitialSegment xi = InitialSegment(1, 1, {0.0, 0.0});
    double p = 2.0;
    std::size_t scenarios = 8;
    std::size_t paths = 2000;
    std::uint64_t seed = 1;
    std::size_t refine_factor = 4;
    double magnitude_cap = 1e12;
    std::size_t workers = 1;

    void validate() const;
};

struct CoupledCurves {
    MomentCurve x, X, y, Y;        // E|.(t)|^p
    MomentCurve delay_x, delay_X;  // E|.(t) - .(t - tau)|^p
    MomentCurve gap_x_y, gap_y_Y, gap_X_Y, gap_x_X;
};

CoupledCurves simulate_coupled(const CoupledSetup& setup);

// Strong-error study: EM at steps_per_delay m * 2^l, l = 0..levels-1, against a
// reference on the finest level refined `reference_factor` times. All levels
// are driven by aggregated increments of the reference noise.
struct ConvergenceStudy {
    std::vector<double> steps;              // delta per level
    std::vector<double> gap_y_Y, gap_x_X;   // worst-case E|ref(T) - EM(T)|^p
    std::vector<double> stderr_y_Y, stderr_x_X;
    double slope_y_Y = 0.0;                 // least-squares slope of log gap vs log delta
    double slope_x_X = 0.0;
};

ConvergenceStudy convergence_study(const CoupledSetup& setup, std::size_t levels, std::size_t reference_factor);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gstab
