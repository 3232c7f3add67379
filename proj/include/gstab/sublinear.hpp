#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gstab/integrators.hpp"

namespace gstab {

// Paths are summed in blocks of this many, and block sums are combined in
// block order, so results do not depend on how blocks are spread over workers.
inline constexpr std::size_t kSummationBlock = 64;

// Mean of `values` with compensated, order-fixed blocked summation.
double ordered_mean(std::span<const double> values);

// max over scenarios of the sample mean; samples[k] holds scenario k.
double upper_expectation(const std::vector<std::vector<double>>& samples);

// Worst-case moments on a time grid.
struct MomentCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::size_t> argmax;  // scenario attaining the max
    std::vector<double> std_error;       // standard error of the argmax scenario's mean
    std::vector<std::vector<double>> scenario_means;   // [scenario][time]
    std::vector<std::vector<double>> scenario_std_error;  // [scenario][time]
    double p = 2.0;
    std::size_t scenarios = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return values.size(); }
};

// Per-scenario sample means and standard errors of `width` quantities.
struct ScenarioMoments {
    std::size_t scenarios = 0;
    std::size_t paths = 0;
    std::size_t width = 0;
    std::vector<double> mean;    // [scenario * width + column]
    std::vector<double> std_error;  // same layout
};

// Fills `out` (length width) with the quantities of one (scenario, path).
// Called concurrently for distinct arguments.
using PathSampler = std::function<void(std::size_t scenario, std::size_t path, std::span<double> out)>;

// Runs `sampler` over all scenarios and paths on `workers` threads and reduces
// deterministically. If samplers throw, the exception of the first failing
// (scenario, block) in order is rethrown.
ScenarioMoments estimate_moments(std::size_t scenarios, std::size_t paths, std::size_t width,
                                 const PathSampler& sampler, std::size_t workers = 1);

// Worst-case curve from columns [offset, offset + times.size()).
MomentCurve curve_from_moments(const ScenarioMoments& m, std::size_t offset, std::vector<double> times, double p,
                               std::uint64_t seed);

// Simulation bundle: bundle[scenario][path], all on one grid.
using TrajectoryBundle = std::vector<std::vector<Trajectory>>;

// E|state(t_n)|^p for n = max(first, 0)..last.
MomentCurve moment_curve(const TrajectoryBundle& bundle, double p, std::size_t workers = 1);
// E|x(t_n) - x(t_n - tau)|^p for every stored n with n - m also stored, from t = 0 on.
MomentCurve delay_difference_curve(const TrajectoryBundle& bundle, double p, std::size_t workers = 1);
// E|a(t_n) - b(t_n)|^p on the common index range from t = 0 on. Paths must be
// coupled (identical keys) and share the grid.
MomentCurve gap_curve(const TrajectoryBundle& a, const TrajectoryBundle& b, double p, std::size_t workers = 1);

// CSV with columns t, value, argmax_scenario, stderr.
void write_curve_csv(std::ostream& os, const MomentCurve& curve);

}  // namespace gstab
