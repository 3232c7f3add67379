#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gstab/detect.hpp"
#include "gstab/model.hpp"

namespace gstab {

// Flat "key = value" text. '#' starts a comment; blank lines are ignored.
// Later assignments of a key replace earlier ones.
class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<string>");
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    const std::string* find(const std::string& key) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string to_text() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Typed experiment description. Every key of the text format maps to one
// field; absent keys keep the defaults below.
struct ExperimentConfig {
    std::string pipeline = "simulate";

    // "linear" (matrices below) or a registered system name.
    std::string system = "linear";
    LinearSystem linear;

    double sigma_lo = 1.0;
    double sigma_hi = 1.0;
    double tau_time = 0.25;
    std::size_t steps_per_delay = 8;
    double horizon_time = 2.0;

    std::string initial_segment = "constant";  // constant | ramp
    std::vector<double> initial_value{1.0};
    std::vector<double> initial_slope_per_time{0.0};

    double p = 2.0;
    std::size_t scenarios = 8;
    std::size_t paths_per_scenario = 2000;
    std::uint64_t seed = 1;
    std::size_t refine_factor = 4;
    double magnitude_cap = 1e12;
    std::size_t h1_samples = 1000;

    FitConfig fit;
    std::string fit_target = "x";  // x | X | y | Y

    double delta_conf = 0.5;
    std::string cert_start = "sdde";
    double cert_M = 1.0;
    double cert_lambda_per_time = 1.0;
    double cert_d = 0.0;
    double cert_norm_ratio = 1.0;
    std::optional<double> cert_tau_time;   // defaults to tau_time
    std::optional<double> cert_step_time;  // defaults to tau_time / steps_per_delay

    std::size_t convergence_levels = 5;
    std::size_t convergence_reference_factor = 16;

    // Throws ConfigError listing every unknown key, or naming the first bad value.
    static ExperimentConfig from(const Config& cfg);
    // Every key with its effective value; from(to_config()) reproduces *this.
    Config to_config() const;

    // Checks ranges and cross-field consistency (ConfigError on failure).
    void validate() const;

    GParams gparams() const { return {sigma_lo, sigma_hi}; }
    DelayGrid grid() const { return {tau_time, steps_per_delay, horizon_time}; }
    InitialSegment initial_data() const;
    CoefficientSystem build_system() const;
    double cert_tau() const { return cert_tau_time.value_or(tau_time); }
    double cert_step() const { return cert_step_time.value_or(tau_time / static_cast<double>(steps_per_delay)); }
};

// Names accepted by the "pipeline" key and the CLI subcommands.
const std::vector<std::string>& pipeline_names();

}  // namespace gstab
