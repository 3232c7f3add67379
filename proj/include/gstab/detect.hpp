#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "gstab/certify.hpp"
#include "gstab/sublinear.hpp"

namespace gstab {

struct FitConfig {
    double tail_fraction = 0.2;  // last fraction of the curve used for the offset
    double window_lo = 0.0;      // decay window as fractions of the time range
    double window_hi = 0.6;
    double floor_eps = 1e-12;    // floor inside the log transform
    bool inflate = true;         // enforce envelope dominance afterwards
    // Alternating refinement of the offset from the tail residuals of the
    // current exponential fit; 0 keeps the plain tail mean.
    std::size_t backfit_iterations = 100;

    void validate() const;
};

struct FitResult {
    bool decaying = false;
    std::string verdict;
    double lambda_hat = 0.0;
    double M_hat = 0.0;  // before inflation
    double d_hat = 0.0;  // before inflation
    double r_squared = 0.0;
    double M_inflation = 1.0;  // multiplicative factor applied to M
    double d_inflation = 0.0;  // amount added to d
    std::size_t iterations = 0;
    std::optional<StabilityParams> params;  // set when decaying
};

// Fits M * seg_norm * e^{-lambda t} + d to (t, v) by offset-first log-linear
// regression. Requires at least 10 points and seg_norm > 0.
FitResult fit_practical_stability(std::span<const double> t, std::span<const double> v, double seg_norm,
                                  const FitConfig& cfg = {}, SystemKind kind = SystemKind::sdde);
FitResult fit_practical_stability(const MomentCurve& curve, double seg_norm, const FitConfig& cfg = {},
                                  SystemKind kind = SystemKind::sdde);

struct EnvelopeCheck {
    bool holds = false;
    double max_violation = 0.0;  // max of curve - envelope (<= 0 when the envelope holds)
    std::size_t worst_index = 0;
};

EnvelopeCheck verify_envelope(std::span<const double> t, std::span<const double> v, const StabilityParams& params,
                              double seg_norm);
EnvelopeCheck verify_envelope(const MomentCurve& curve, const StabilityParams& params, double seg_norm);

}  // namespace gstab
