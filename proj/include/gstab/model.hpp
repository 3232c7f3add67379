#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gstab {

// Euclidean norm, used for every state-space norm in the library.
double euclidean_norm(std::span<const double> v);

// |a - b|^p (b empty stands for 0). At p = 2 no square root is taken, so
// moments of exactly representable states stay exact.
double pow_norm_diff(std::span<const double> a, std::span<const double> b, double p);
double pow_norm(std::span<const double> a, double p);

// Volatility uncertainty interval [sigma_lo, sigma_hi] of the G-Brownian motion.
class GParams {
public:
    GParams(double sigma_lo, double sigma_hi);

    double sigma_lo() const { return lo_; }
    double sigma_hi() const { return hi_; }
    bool degenerate() const { return lo_ == hi_; }

private:
    double lo_;
    double hi_;
};

// G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2.
double g_function(double a, const GParams& gp);

// Evaluates one coefficient at (x, y) = (current state, delayed state) and
// writes the n-vector result to `out`. Must not allocate per call in hot paths.
using CoefficientFn =
    std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> out)>;

// Drift f, quadratic-variation drift g and diffusion h of
//   dx = f(x, x_tau) dt + g(x, x_tau) d<B> + h(x, x_tau) dB
// together with the global Lipschitz constant L (squared form) and the
// linear-growth constant L_hat.
class CoefficientSystem {
public:
    // `growth` < 0 selects the minimal admissible value 2 max(L, |f(0,0)|^2, |g(0,0)|^2, |h(0,0)|^2).
    CoefficientSystem(std::size_t dim, CoefficientFn f, CoefficientFn g, CoefficientFn h,
                      double lipschitz, double growth = -1.0, std::string name = "custom");

    std::size_t dim() const { return dim_; }
    double lipschitz() const { return lipschitz_; }
    double growth() const { return growth_; }
    const std::string& name() const { return name_; }

    void drift(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        f_(x, y, out);
    }
    void qv_drift(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        g_(x, y, out);
    }
    void diffusion(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        h_(x, y, out);
    }

    // max(|f(0,0)|^2, |g(0,0)|^2, |h(0,0)|^2)
    double origin_magnitude_sq() const;

private:
    std::size_t dim_;
    CoefficientFn f_, g_, h_;
    double lipschitz_;
    double growth_;
    std::string name_;
};

// f(x,y) = A_f x + B_f y + c_f and likewise for g, h. Matrices are row-major
// n x n; an empty matrix or vector stands for zero.
struct LinearSystem {
    std::size_t dim = 1;
    std::vector<double> A_f, B_f, A_g, B_g, A_h, B_h;
    std::vector<double> c_f, c_g, c_h;

    // Smallest L satisfying (H1): max over f, g, h of the squared spectral
    // norm of the block matrix [A B].
    double lipschitz() const;

    CoefficientSystem to_system(std::string name = "linear") const;
};

// Zero coefficients in dimension n; L is the declared constant.
CoefficientSystem zero_system(std::size_t dim, double lipschitz = 1.0);

// t_n = n * delta for n >= -m with delta = tau / m; horizon = steps * delta.
class DelayGrid {
public:
    // `horizon` must be an integer multiple of delta (relative tolerance 1e-9).
    DelayGrid(double tau, std::size_t m, double horizon);

    static DelayGrid with_steps(double tau, std::size_t m, std::size_t steps);

    double tau() const { return tau_; }
    std::size_t m() const { return m_; }
    double delta() const { return delta_; }
    std::size_t steps() const { return steps_; }
    double horizon() const { return time(static_cast<std::ptrdiff_t>(steps_)); }

    // Whole delays are counted in units of tau so that t_{km} = k tau exactly.
    double time(std::ptrdiff_t n) const;

    // Index n with time(n) == t up to rounding; throws if t is off-grid.
    std::ptrdiff_t index_of(double t) const;

    // Same tau and horizon with r times as many steps per delay.
    DelayGrid refined(std::size_t r) const;

    bool operator==(const DelayGrid&) const = default;

private:
    DelayGrid(double tau, std::size_t m, std::size_t steps, int);

    double tau_;
    std::size_t m_;
    double delta_;
    std::size_t steps_;
};

// Initial data xi on [-tau, 0], stored at the grid points n = -m..0.
// Off-grid values use piecewise-linear interpolation.
class InitialSegment {
public:
    // `values` holds (m + 1) * dim entries ordered n = -m, ..., 0.
    InitialSegment(std::size_t dim, std::size_t m, std::vector<double> values);

    static InitialSegment constant(std::span<const double> value, std::size_t m);
    static InitialSegment sample(std::size_t dim, const DelayGrid& grid,
                                 const std::function<void(double theta, std::span<double> out)>& fn);

    std::size_t dim() const { return dim_; }
    std::size_t m() const { return m_; }
    std::span<const double> at(std::ptrdiff_t n) const;
    std::span<const double> values() const { return values_; }

    // xi(theta) for theta in [-tau, 0].
    std::vector<double> interpolate(double theta, double tau) const;

    // The same segment on a grid with r times as many points per delay.
    InitialSegment resampled(std::size_t r) const;

private:
    std::size_t dim_;
    std::size_t m_;
    std::vector<double> values_;
};

// Grid approximation of ||xi||^p = sup_theta E|xi(theta)|^p for deterministic xi.
double segment_norm(const InitialSegment& xi, double p);

// Random initial data given as finitely many samples per volatility scenario
// ([scenario][sample]): max over grid points of the worst-case sample mean.
double segment_norm(const std::vector<std::vector<InitialSegment>>& samples, double p);

struct H1Report {
    double declared_lipschitz = 0.0;
    double ratio_f = 0.0;
    double ratio_g = 0.0;
    double ratio_h = 0.0;
    double max_ratio = 0.0;
    std::size_t samples = 0;
    bool passed = false;
    std::string diagnostic;
};

// Samples point pairs uniformly in [-box, box]^n and records the largest
// observed |c(x,y) - c(x',y')|^2 / (|x - x'|^2 + |y - y'|^2) for c = f, g, h.
H1Report validate_h1(const CoefficientSystem& sys, std::size_t samples, std::uint64_t seed,
                     double box = 10.0);

}  // namespace gstab
