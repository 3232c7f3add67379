#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gstab {

enum class SystemKind { sdde, sde, em_sdde, em_sde };
enum class NormBasis { segment, initial_moment };

const char* to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

// Envelope E|.(t)|^p <= M * norm * e^{-lambda t} + d. M and d are also kept as
// logarithms so that certificates survive values beyond double range.
struct StabilityParams {
    SystemKind kind = SystemKind::sdde;
    NormBasis basis = NormBasis::segment;
    double M = 1.0;
    double lambda = 1.0;
    double d = 0.0;
    double log_M = 0.0;
    double log_d = -std::numeric_limits<double>::infinity();

    static StabilityParams make(SystemKind kind, double M, double lambda, double d);
    static StabilityParams from_log(SystemKind kind, double log_M, double lambda, double log_d);

    // M * norm * e^{-lambda t} + d
    double envelope(double norm, double t) const;
};

// Model constants shared by every formula.
struct ModelConstants {
    double p = 2.0;
    double L = 1.0;
    double L_hat = 2.0;
    double sigma_lo = 0.0;
    double sigma_hi = 1.0;
};

// ---------------------------------------------------------------- constants

// C(p) = (p^{p+1} / (2 (p-1)^{p-1}))^{p/2}, p >= 2.
double bdg_constant(double p);
// (2p-1)!! extended by 2^p Gamma(p + 1/2) / sqrt(pi).
double odd_double_factorial(double p);

// Moment bound for the delay equation and its EM scheme on a window of length `span`.
double lemma_bound_sdde(double p, double L_hat, double sigma_hi, double tau, double seg_norm, double span);
// Moment bound for the auxiliary equation and its EM scheme.
double lemma_bound_sde(double p, double L_hat, double sigma_hi, double init_moment, double span);

struct DelayDiffConstants {
    double K1, N1, K2, N2;
};
DelayDiffConstants delay_diff_constants(double p, double L_hat, double sigma_hi, double tau, double span);

// One-step EM constant D1 of the auxiliary equation.
double em_onestep_constant_sde(double p, double L_hat, double sigma_hi, double tau);
// One-step EM constant d7 of the delay equation. The default omits the step
// factor step^{p/2} (the bound is then d7 * step^{p/2}); `strict` includes it.
double em_onestep_constant_sdde(double p, double L_hat, double sigma_hi, double tau, double step, double span,
                                double seg_norm, bool strict = false);

enum class GapMode { x_y, y_Y, X_Y, x_X };

const char* to_string(GapMode mode);

// Inputs of gap_bound; fields a mode does not use may stay NaN.
struct GapInputs {
    double p = std::numeric_limits<double>::quiet_NaN();
    double L = std::numeric_limits<double>::quiet_NaN();
    double L_hat = std::numeric_limits<double>::quiet_NaN();
    double sigma_hi = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double step = std::numeric_limits<double>::quiet_NaN();
    double span = std::numeric_limits<double>::quiet_NaN();
    double seg_norm = std::numeric_limits<double>::quiet_NaN();
    double init_moment = std::numeric_limits<double>::quiet_NaN();
};

// Bound on sup E|A(t) - B(t)|^p over a window of length `span` for the pair
// selected by `mode`:
//   x_y: delay solution vs auxiliary solution (p, L, L_hat, sigma_hi, tau, span, seg_norm)
//   y_Y: auxiliary solution vs its EM scheme (adds step, uses init_moment)
//   X_Y: EM delay scheme vs EM auxiliary scheme (as x_y)
//   x_X: delay solution vs its EM scheme (as x_y plus step)
double gap_bound(GapMode mode, const GapInputs& in);
double log_gap_bound(GapMode mode, const GapInputs& in);

// ---------------------------------------------------------------- transfers

enum class Direction { sdde_to_sde, sde_to_emsde, emsde_to_emsdde, emsdde_to_sdde };

const char* to_string(Direction d);
Direction direction_from(SystemKind source);
SystemKind target_of(Direction d);

struct CertReport {
    Direction direction = Direction::sdde_to_sde;
    ModelConstants model;
    double tau = 0.0;
    double step = 0.0;
    double delta_conf = 0.5;
    StabilityParams input;
    double norm_ratio = 1.0;

    double T = 0.0;
    std::string threshold_name;  // R, U, V or W
    double threshold = 0.0;
    double log_threshold = 0.0;
    bool applicable = false;
    std::optional<StabilityParams> output;
    // Named constants in a stable order (K1, K2, N1, N2, D1, Cp, d3..d8).
    std::vector<std::pair<std::string, double>> intermediates;
    std::vector<std::pair<std::string, double>> log_intermediates;
    std::string note;

    double intermediate(const std::string& name) const;
};

// Thresholds at a given small parameter (>= 0; the value at 0 is delta_conf).
double threshold_R(const StabilityParams& in, const ModelConstants& mc, double tau, double delta_conf);
double threshold_U(const StabilityParams& in, const ModelConstants& mc, double tau, double step, double delta_conf);
double threshold_V(const StabilityParams& in, const ModelConstants& mc, double tau, double delta_conf);
double threshold_W(const StabilityParams& in, const ModelConstants& mc, double tau, double step, double delta_conf);

// Delay equation -> auxiliary equation. The output prefactor is expressed
// against E|xi(0)|^p and carries norm_ratio = ||xi||^p / E|xi(0)|^p.
CertReport transfer_sdde_to_sde(const StabilityParams& in, const ModelConstants& mc, double tau, double delta_conf,
                                double norm_ratio = 1.0);
// Auxiliary equation -> its EM scheme with step `step`; tau enters through D1.
CertReport transfer_sde_to_emsde(const StabilityParams& in, const ModelConstants& mc, double tau, double step,
                                 double delta_conf);
// EM auxiliary scheme -> EM delay scheme.
CertReport transfer_emsde_to_emsdde(const StabilityParams& in, const ModelConstants& mc, double tau,
                                    double delta_conf);
// EM delay scheme -> delay equation.
CertReport transfer_emsdde_to_sdde(const StabilityParams& in, const ModelConstants& mc, double tau, double step,
                                   double delta_conf);

struct ChainInputs {
    ModelConstants model;
    double tau = 0.0;
    double step = 0.0;
    double delta_conf = 0.5;
    double norm_ratio = 1.0;
};

// Applies the transfers cyclically from params.kind until returning to it,
// stopping after the first inapplicable report.
std::vector<CertReport> transfer_chain(const StabilityParams& start, const ChainInputs& in);

}  // namespace gstab
