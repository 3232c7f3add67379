#include "gstab/scenario.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "gstab/errors.hpp"

namespace gstab {

const char* to_string(ControlKind kind) {
    switch (kind) {
        case ControlKind::constant_lo: return "constant-lo";
        case ControlKind::constant_hi: return "constant-hi";
        case ControlKind::bang_bang: return "bang-bang";
        case ControlKind::constant_mid: return "constant-mid";
    }
    return "unknown";
}

VolatilityControl VolatilityControl::repeated(std::size_t r) const {
    if (r == 0) throw std::invalid_argument("VolatilityControl: repetition factor must be positive");
    VolatilityControl out{kind, {}};
    out.sigma.reserve(sigma.size() * r);
    for (double s : sigma) out.sigma.insert(out.sigma.end(), r, s);
    return out;
}

std::vector<VolatilityControl> make_scenario_family(const GParams& gp, std::size_t count, std::size_t steps,
                                                    std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("make_scenario_family: need at least one scenario");
    if (steps == 0) throw std::invalid_argument("make_scenario_family: need at least one step");
    const double lo = gp.sigma_lo();
    const double hi = gp.sigma_hi();
    if (gp.degenerate()) return {VolatilityControl{ControlKind::constant_hi, std::vector<double>(steps, hi)}};
    if (count == 1)
        throw std::invalid_argument(
            "make_scenario_family: a non-degenerate interval needs at least the two constant extremes");

    std::vector<VolatilityControl> family;
    family.reserve(count);
    family.push_back({ControlKind::constant_lo, std::vector<double>(steps, lo)});
    family.push_back({ControlKind::constant_hi, std::vector<double>(steps, hi)});
    for (std::size_t k = 2; k < count; ++k) {
        CounterStream bits(RngKey{seed, static_cast<std::uint32_t>(k), 0}, StreamPurpose::control);
        VolatilityControl c{ControlKind::bang_bang, std::vector<double>(steps)};
        for (std::size_t n = 0; n < steps; ++n) c.sigma[n] = (bits.word(n) >> 31) ? hi : lo;
        family.push_back(std::move(c));
    }
    return family;
}

NoiseScenario sample_increments(std::shared_ptr<const VolatilityControl> control, const DelayGrid& grid,
                                const RngKey& key) {
    if (!control) throw std::invalid_argument("sample_increments: missing control");
    const std::size_t n = grid.steps();
    if (control->steps() < n) throw std::invalid_argument("sample_increments: control shorter than the grid");
    NoiseScenario sc;
    sc.delta = grid.delta();
    sc.key = key;
    sc.dB.resize(n);
    sc.dQV.resize(n);
    const double sq = std::sqrt(sc.delta);
    CounterStream z(key, StreamPurpose::increments);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = control->sigma[i];
        sc.dB[i] = s == 0.0 ? 0.0 : s * sq * z.normal(i);
        sc.dQV[i] = s * s * sc.delta;
    }
    sc.control = std::move(control);
    return sc;
}

NoiseScenario refine(const NoiseScenario& coarse, std::size_t r, const RngKey& key) {
    if (r == 0) throw std::invalid_argument("refine: factor must be positive");
    if (r == 1) return coarse;
    const std::size_t n = coarse.steps();
    NoiseScenario fine;
    fine.control = std::make_shared<const VolatilityControl>(coarse.control->repeated(r));
    fine.delta = coarse.delta / static_cast<double>(r);
    fine.key = coarse.key;
    fine.dB.resize(n * r);
    fine.dQV.resize(n * r);
    CounterStream z(key, StreamPurpose::bridge);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = coarse.control->sigma[i];
        const double piece_var = s * s * fine.delta;
        const double qv = coarse.dQV[i] / static_cast<double>(r);
        double rest = coarse.dB[i];
        for (std::size_t k = 0; k < r; ++k) {
            const std::size_t left = r - k;
            double piece;
            if (left == 1) {
                piece = rest;
            } else {
                const double w = static_cast<double>(left);
                const double sd = std::sqrt(piece_var * (w - 1.0) / w);
                piece = rest / w + (sd == 0.0 ? 0.0 : sd * z.normal(i * (r - 1) + k));
            }
            fine.dB[i * r + k] = piece;
            fine.dQV[i * r + k] = qv;
            rest -= piece;
        }
    }
    return fine;
}

NoiseScenario refine(const NoiseScenario& coarse, std::size_t r) { return refine(coarse, r, coarse.key); }

NoiseScenario coarsen(const NoiseScenario& fine, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("coarsen: factor must be positive");
    if (factor == 1) return fine;
    if (fine.steps() % factor != 0) throw std::invalid_argument("coarsen: steps not divisible by factor");
    const std::size_t n = fine.steps() / factor;
    auto control = std::make_shared<VolatilityControl>();
    control->kind = fine.control->kind;
    control->sigma.resize(n);
    NoiseScenario out;
    out.delta = fine.delta * static_cast<double>(factor);
    out.key = fine.key;
    out.dB.assign(n, 0.0);
    out.dQV.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = fine.control->sigma[i * factor];
        for (std::size_t k = 0; k < factor; ++k) {
            if (fine.control->sigma[i * factor + k] != s)
                throw std::invalid_argument("coarsen: control is not constant on a coarse step");
            out.dB[i] += fine.dB[i * factor + k];
        }
        control->sigma[i] = s;
        out.dQV[i] = s * s * out.delta;
    }
    out.control = std::move(control);
    return out;
}

namespace {

constexpr char kMagic[8] = {'G', 'S', 'T', 'A', 'B', 'N', 'S', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("read_increments: truncated input");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

void write_increments(std::ostream& os, const NoiseScenario& sc) {
    os.write(kMagic, sizeof kMagic);
    put_u64(os, sc.key.seed);
    put_u64(os, sc.key.scenario);
    put_u64(os, sc.key.path);
    put_u64(os, sc.steps());
    put_f64(os, sc.delta);
    for (double v : sc.dB) put_f64(os, v);
    for (double v : sc.dQV) put_f64(os, v);
    if (!os) throw IoError("write_increments: write failed");
}

NoiseScenario read_increments(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("read_increments: not an increment dump");
    NoiseScenario sc;
    sc.key.seed = get_u64(is);
    sc.key.scenario = static_cast<std::uint32_t>(get_u64(is));
    sc.key.path = static_cast<std::uint32_t>(get_u64(is));
    const std::uint64_t n = get_u64(is);
    sc.delta = get_f64(is);
    if (!(sc.delta > 0.0) || n > (std::uint64_t{1} << 32)) throw IoError("read_increments: corrupt header");
    sc.dB.resize(n);
    sc.dQV.resize(n);
    for (auto& v : sc.dB) v = get_f64(is);
    for (auto& v : sc.dQV) v = get_f64(is);
    auto control = std::make_shared<VolatilityControl>();
    control->kind = ControlKind::bang_bang;
    control->sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) control->sigma[i] = std::sqrt(sc.dQV[i] / sc.delta);
    sc.control = std::move(control);
    return sc;
}

}  // namespace gstab
