#include "gstab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gstab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Blocks are addressed by 60 bits: the low 32 go into word 0 and the high 28
// share word 3 with the 4-bit purpose tag.
constexpr std::uint64_t kMaxBlock = (std::uint64_t{1} << 60) - 1;

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

CounterStream::CounterStream(const RngKey& key, StreamPurpose purpose)
    : key_{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)},
      scenario_(key.scenario),
      path_(key.path),
      purpose_(static_cast<std::uint32_t>(purpose)) {}

const PhiloxCounter& CounterStream::block(std::uint64_t b) {
    if (b != cached_) {
        if (b > kMaxBlock) throw std::out_of_range("CounterStream: index exhausted");
        const PhiloxCounter ctr{static_cast<std::uint32_t>(b), path_, scenario_,
                                (purpose_ << 28) | static_cast<std::uint32_t>(b >> 32)};
        out_ = philox4x32_10(ctr, key_);
        cached_ = b;
    }
    return out_;
}

std::uint32_t CounterStream::word(std::uint64_t i) { return block(i >> 2)[i & 3]; }

namespace {

double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

double CounterStream::uniform(std::uint64_t i) {
    const auto& b = block(i >> 1);
    return (i & 1) ? to_open_unit(b[2], b[3]) : to_open_unit(b[0], b[1]);
}

double CounterStream::normal(std::uint64_t i) {
    const auto& b = block(i >> 1);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (i & 1) ? r * std::sin(angle) : r * std::cos(angle);
}

}  // namespace gstab
