#include "gstab/sublinear.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "gstab/format.hpp"

namespace gstab {

namespace {

// Neumaier compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

double ordered_mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("ordered_mean: no samples");
    Accumulator total;
    for (std::size_t b = 0; b < values.size(); b += kSummationBlock) {
        Accumulator block;
        const std::size_t e = std::min(values.size(), b + kSummationBlock);
        for (std::size_t i = b; i < e; ++i) block.add(values[i]);
        total.add(block.value());
    }
    return total.value() / static_cast<double>(values.size());
}

double upper_expectation(const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) throw std::invalid_argument("upper_expectation: empty scenario set");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (s.empty()) throw std::invalid_argument("upper_expectation: scenario without samples");
        best = std::max(best, ordered_mean(s));
    }
    return best;
}

ScenarioMoments estimate_moments(std::size_t scenarios, std::size_t paths, std::size_t width,
                                 const PathSampler& sampler, std::size_t workers) {
    if (scenarios == 0 || paths == 0) throw std::invalid_argument("estimate_moments: need scenarios and paths");
    if (width == 0) throw std::invalid_argument("estimate_moments: nothing to estimate");
    const std::size_t blocks = (paths + kSummationBlock - 1) / kSummationBlock;
    const std::size_t items = scenarios * blocks;

    // Per item and column: block sum of values and of squares.
    std::vector<double> sums(items * width), squares(items * width);
    std::vector<std::exception_ptr> errors(items);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        std::vector<Accumulator> s(width), q(width);
        std::vector<double> row(width);
        for (std::size_t item = next++; item < items; item = next++) {
            const std::size_t k = item / blocks;
            const std::size_t b = item % blocks;
            std::fill(s.begin(), s.end(), Accumulator{});
            std::fill(q.begin(), q.end(), Accumulator{});
            try {
                const std::size_t end = std::min(paths, (b + 1) * kSummationBlock);
                for (std::size_t path = b * kSummationBlock; path < end; ++path) {
                    sampler(k, path, row);
                    for (std::size_t c = 0; c < width; ++c) {
                        s[c].add(row[c]);
                        q[c].add(row[c] * row[c]);
                    }
                }
                for (std::size_t c = 0; c < width; ++c) {
                    sums[item * width + c] = s[c].value();
                    squares[item * width + c] = q[c].value();
                }
            } catch (...) {
                errors[item] = std::current_exception();
            }
        }
    };

    const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, items);
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ScenarioMoments out{scenarios, paths, width, std::vector<double>(scenarios * width),
                        std::vector<double>(scenarios * width)};
    const double n = static_cast<double>(paths);
    for (std::size_t k = 0; k < scenarios; ++k) {
        for (std::size_t c = 0; c < width; ++c) {
            Accumulator s, q;
            for (std::size_t b = 0; b < blocks; ++b) {
                s.add(sums[(k * blocks + b) * width + c]);
                q.add(squares[(k * blocks + b) * width + c]);
            }
            const double mean = s.value() / n;
            double se = 0.0;
            if (paths > 1) {
                const double var = std::max(0.0, (q.value() - n * mean * mean) / (n - 1.0));
                se = std::sqrt(var / n);
            }
            out.mean[k * width + c] = mean;
            out.std_error[k * width + c] = se;
        }
    }
    return out;
}

MomentCurve curve_from_moments(const ScenarioMoments& m, std::size_t offset, std::vector<double> times, double p,
                               std::uint64_t seed) {
    const std::size_t len = times.size();
    if (offset + len > m.width) throw std::invalid_argument("curve_from_moments: columns out of range");
    MomentCurve c;
    c.times = std::move(times);
    c.p = p;
    c.scenarios = m.scenarios;
    c.paths = m.paths;
    c.seed = seed;
    c.values.assign(len, 0.0);
    c.argmax.assign(len, 0);
    c.std_error.assign(len, 0.0);
    c.scenario_means.assign(m.scenarios, std::vector<double>(len));
    c.scenario_std_error.assign(m.scenarios, std::vector<double>(len));
    for (std::size_t k = 0; k < m.scenarios; ++k) {
        for (std::size_t i = 0; i < len; ++i) {
            c.scenario_means[k][i] = m.mean[k * m.width + offset + i];
            c.scenario_std_error[k][i] = m.std_error[k * m.width + offset + i];
        }
    }
    for (std::size_t i = 0; i < len; ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < m.scenarios; ++k)
            if (c.scenario_means[k][i] > c.scenario_means[best][i]) best = k;
        c.values[i] = c.scenario_means[best][i];
        c.argmax[i] = best;
        c.std_error[i] = c.scenario_std_error[best][i];
    }
    return c;
}

namespace {

struct BundleShape {
    std::size_t scenarios;
    std::size_t paths;
    const Trajectory* first;
};

BundleShape shape_of(const TrajectoryBundle& bundle, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("moment curves need p >= 2");
    if (bundle.empty() || bundle.front().empty()) throw std::invalid_argument("moment curves need trajectories");
    const std::size_t paths = bundle.front().size();
    const Trajectory& t0 = bundle.front().front();
    for (const auto& sc : bundle) {
        if (sc.size() != paths) throw std::invalid_argument("every scenario needs the same number of paths");
        for (const auto& tr : sc) {
            if (!(tr.grid == t0.grid) || tr.first_index != t0.first_index || tr.last_index() != t0.last_index() ||
                tr.dim != t0.dim)
                throw std::invalid_argument("trajectories live on mismatched grids");
        }
    }
    return {bundle.size(), paths, &t0};
}

std::vector<double> times_of(const Trajectory& t, std::ptrdiff_t from, std::ptrdiff_t to) {
    std::vector<double> out;
    for (std::ptrdiff_t n = from; n <= to; ++n) out.push_back(t.time(n));
    return out;
}

}  // namespace

MomentCurve moment_curve(const TrajectoryBundle& bundle, double p, std::size_t workers) {
    const auto sh = shape_of(bundle, p);
    const std::ptrdiff_t from = std::max<std::ptrdiff_t>(sh.first->first_index, 0);
    const std::ptrdiff_t to = sh.first->last_index();
    if (to < from) throw std::invalid_argument("moment_curve: no non-negative times stored");
    const auto width = static_cast<std::size_t>(to - from + 1);
    auto m = estimate_moments(
        sh.scenarios, sh.paths, width,
        [&](std::size_t k, std::size_t j, std::span<double> out) {
            const auto& tr = bundle[k][j];
            for (std::size_t i = 0; i < width; ++i) out[i] = pow_norm(tr.at(from + static_cast<std::ptrdiff_t>(i)), p);
        },
        workers);
    return curve_from_moments(m, 0, times_of(*sh.first, from, to), p, sh.first->key.seed);
}

MomentCurve delay_difference_curve(const TrajectoryBundle& bundle, double p, std::size_t workers) {
    const auto sh = shape_of(bundle, p);
    const auto lag = static_cast<std::ptrdiff_t>(sh.first->grid.m());
    const std::ptrdiff_t from = std::max<std::ptrdiff_t>(sh.first->first_index + lag, 0);
    const std::ptrdiff_t to = sh.first->last_index();
    if (to < from) throw std::invalid_argument("delay_difference_curve: t - tau precedes the stored trajectory");
    const auto width = static_cast<std::size_t>(to - from + 1);
    auto m = estimate_moments(
        sh.scenarios, sh.paths, width,
        [&](std::size_t k, std::size_t j, std::span<double> out) {
            const auto& tr = bundle[k][j];
            for (std::size_t i = 0; i < width; ++i) {
                const std::ptrdiff_t n = from + static_cast<std::ptrdiff_t>(i);
                out[i] = pow_norm_diff(tr.at(n), tr.at(n - lag), p);
            }
        },
        workers);
    return curve_from_moments(m, 0, times_of(*sh.first, from, to), p, sh.first->key.seed);
}

MomentCurve gap_curve(const TrajectoryBundle& a, const TrajectoryBundle& b, double p, std::size_t workers) {
    const auto sa = shape_of(a, p);
    const auto sb = shape_of(b, p);
    if (sa.scenarios != sb.scenarios || sa.paths != sb.paths)
        throw std::invalid_argument("gap_curve: bundles differ in shape");
    if (!(sa.first->grid == sb.first->grid) || sa.first->dim != sb.first->dim)
        throw std::invalid_argument("gap_curve: bundles live on different grids");
    for (std::size_t k = 0; k < sa.scenarios; ++k)
        for (std::size_t j = 0; j < sa.paths; ++j)
            if (!(a[k][j].key == b[k][j].key))
                throw std::invalid_argument("gap_curve: trajectories are not coupled (different noise keys)");
    const std::ptrdiff_t from =
        std::max<std::ptrdiff_t>({sa.first->first_index, sb.first->first_index, std::ptrdiff_t{0}});
    const std::ptrdiff_t to = std::min(sa.first->last_index(), sb.first->last_index());
    if (to < from) throw std::invalid_argument("gap_curve: no common times");
    const auto width = static_cast<std::size_t>(to - from + 1);
    auto m = estimate_moments(
        sa.scenarios, sa.paths, width,
        [&](std::size_t k, std::size_t j, std::span<double> out) {
            for (std::size_t i = 0; i < width; ++i) {
                const std::ptrdiff_t n = from + static_cast<std::ptrdiff_t>(i);
                out[i] = pow_norm_diff(a[k][j].at(n), b[k][j].at(n), p);
            }
        },
        workers);
    return curve_from_moments(m, 0, times_of(*sa.first, from, to), p, sa.first->key.seed);
}

void write_curve_csv(std::ostream& os, const MomentCurve& c) {
    os << "t,value,argmax_scenario,stderr\n";
    for (std::size_t i = 0; i < c.size(); ++i)
        os << format_double(c.times[i]) << ',' << format_double(c.values[i]) << ',' << c.argmax[i] << ','
           << format_double(c.std_error[i]) << '\n';
}

}  // namespace gstab
