#pragma once

#include <array>
#include <cstdint>

namespace gstab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

// Independent streams derived from one master seed.
enum class StreamPurpose : std::uint32_t {
    increments = 0,  // base Brownian increments
    bridge = 1,      // Brownian-bridge refinement
    control = 2,     // bang-bang volatility choices
};

// Identifies one (scenario, path) stream of a run.
struct RngKey {
    std::uint64_t seed = 0;
    std::uint32_t scenario = 0;
    std::uint32_t path = 0;

    bool operator==(const RngKey&) const = default;
};

// Random access to the stream of one key and purpose. Element i depends only
// on (key, purpose, i), never on the order in which elements are requested.
class CounterStream {
public:
    CounterStream(const RngKey& key, StreamPurpose purpose);

    // Uniform 32-bit word number i.
    std::uint32_t word(std::uint64_t i);
    // Uniform double in the open interval (0, 1), number i.
    double uniform(std::uint64_t i);
    // Standard normal number i (Box-Muller, two normals per Philox block).
    double normal(std::uint64_t i);

private:
    const PhiloxCounter& block(std::uint64_t b);

    PhiloxKey key_;
    std::uint32_t scenario_;
    std::uint32_t path_;
    std::uint32_t purpose_;
    std::uint64_t cached_ = ~std::uint64_t{0};
    PhiloxCounter out_{};
};

}  // namespace gstab
