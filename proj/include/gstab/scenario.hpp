#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "gstab/model.hpp"
#include "gstab/rng.hpp"

namespace gstab {

enum class ControlKind { constant_lo, constant_hi, bang_bang, constant_mid };

const char* to_string(ControlKind kind);

// Per-step volatilities sigma_n in [sigma_lo, sigma_hi], n = 0..N-1.
struct VolatilityControl {
    ControlKind kind = ControlKind::constant_hi;
    std::vector<double> sigma;

    std::size_t steps() const { return sigma.size(); }
    // The same control on a grid with r sub-steps per step.
    VolatilityControl repeated(std::size_t r) const;
};

// Family approximating the sublinear expectation: constant sigma_lo, constant
// sigma_hi, then K - 2 bang-bang controls drawn from the `control` stream of
// `seed`. A degenerate interval yields a single control.
std::vector<VolatilityControl> make_scenario_family(const GParams& gp, std::size_t count, std::size_t steps,
                                                    std::uint64_t seed);

// Brownian and quadratic-variation increments of one path under one control.
struct NoiseScenario {
    std::shared_ptr<const VolatilityControl> control;
    double delta = 0.0;
    std::vector<double> dB;
    std::vector<double> dQV;
    RngKey key;

    std::size_t steps() const { return dB.size(); }
};

// dB_n = sigma_n sqrt(delta) Z_n with Z_n from the `increments` stream of
// `key`; dQV_n = sigma_n^2 delta.
NoiseScenario sample_increments(std::shared_ptr<const VolatilityControl> control, const DelayGrid& grid,
                                const RngKey& key);

// Splits every step into r sub-steps. Fine dB follows the Brownian bridge
// conditioned on the coarse increment (drawn from the `bridge` stream of
// `key`), so per-step sums reproduce the coarse increments; dQV is split
// equally.
NoiseScenario refine(const NoiseScenario& coarse, std::size_t r, const RngKey& key);
NoiseScenario refine(const NoiseScenario& coarse, std::size_t r);

// Aggregates blocks of `factor` consecutive steps. Requires a control that is
// constant on each block.
NoiseScenario coarsen(const NoiseScenario& fine, std::size_t factor);

// Binary dump for replay: magic "GSTABNS1", seed, scenario, path, steps (all
// little-endian 64-bit), delta, then dB and dQV as little-endian doubles.
void write_increments(std::ostream& os, const NoiseScenario& sc);
NoiseScenario read_increments(std::istream& is);

}  // namespace gstab
