#include "gstab/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gstab/sublinear.hpp"

namespace gstab {

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double pow_norm_diff(std::span<const double> a, std::span<const double> b, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - (b.empty() ? 0.0 : b[i]);
        s += d * d;
    }
    return p == 2.0 ? s : std::pow(std::sqrt(s), p);
}

double pow_norm(std::span<const double> a, double p) { return pow_norm_diff(a, {}, p); }

GParams::GParams(double sigma_lo, double sigma_hi) : lo_(sigma_lo), hi_(sigma_hi) {
    if (!(std::isfinite(sigma_lo) && std::isfinite(sigma_hi)) || sigma_lo < 0.0 || sigma_hi < sigma_lo)
        throw std::invalid_argument("GParams: need 0 <= sigma_lo <= sigma_hi < inf");
}

double g_function(double a, const GParams& gp) {
    const double pos = std::max(a, 0.0);
    const double neg = std::max(-a, 0.0);
    return 0.5 * (gp.sigma_hi() * gp.sigma_hi() * pos - gp.sigma_lo() * gp.sigma_lo() * neg);
}

CoefficientSystem::CoefficientSystem(std::size_t dim, CoefficientFn f, CoefficientFn g, CoefficientFn h,
                                     double lipschitz, double growth, std::string name)
    : dim_(dim), f_(std::move(f)), g_(std::move(g)), h_(std::move(h)), lipschitz_(lipschitz),
      growth_(growth), name_(std::move(name)) {
    if (dim_ == 0) throw std::invalid_argument("CoefficientSystem: dimension must be positive");
    if (!f_ || !g_ || !h_) throw std::invalid_argument("CoefficientSystem: f, g and h must be set");
    if (!(lipschitz_ >= 0.0) || !std::isfinite(lipschitz_))
        throw std::invalid_argument("CoefficientSystem: Lipschitz constant must be finite and >= 0");
    const double required = 2.0 * std::max(lipschitz_, origin_magnitude_sq());
    if (!std::isfinite(required))
        throw std::invalid_argument("CoefficientSystem: coefficients are not finite at the origin");
    if (growth_ < 0.0) {
        growth_ = required;
    } else if (growth_ < required * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "CoefficientSystem: growth constant " << growth_ << " is below 2 max(L, |c(0,0)|^2) = "
            << required;
        throw std::invalid_argument(msg.str());
    }
}

double CoefficientSystem::origin_magnitude_sq() const {
    std::vector<double> zero(dim_, 0.0), out(dim_);
    double m = 0.0;
    for (const auto* fn : {&f_, &g_, &h_}) {
        (*fn)(zero, zero, out);
        const double n = euclidean_norm(out);
        m = std::max(m, n * n);
    }
    return m;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix as_matrix(const std::vector<double>& data, std::size_t n, const char* what) {
    if (data.empty()) return RowMatrix::Zero(n, n);
    if (data.size() != n * n)
        throw std::invalid_argument(std::string("LinearSystem: matrix ") + what + " must have n*n entries");
    return Eigen::Map<const RowMatrix>(data.data(), n, n);
}

std::vector<double> dense_or_zero(const std::vector<double>& data, std::size_t count, const char* what) {
    if (data.empty()) return std::vector<double>(count, 0.0);
    if (data.size() != count)
        throw std::invalid_argument(std::string("LinearSystem: ") + what + " has the wrong size");
    return data;
}

// out = A x + B y + c with row-major A, B.
CoefficientFn affine(std::size_t n, std::vector<double> A, std::vector<double> B, std::vector<double> c) {
    return [n, A = std::move(A), B = std::move(B), c = std::move(c)](std::span<const double> x,
                                                                     std::span<const double> y,
                                                                     std::span<double> out) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = c[i];
            const double* a = A.data() + i * n;
            const double* b = B.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) acc += a[j] * x[j] + b[j] * y[j];
            out[i] = acc;
        }
    };
}

}  // namespace

double LinearSystem::lipschitz() const {
    double best = 0.0;
    const std::pair<const std::vector<double>*, const std::vector<double>*> pairs[] = {
        {&A_f, &B_f}, {&A_g, &B_g}, {&A_h, &B_h}};
    for (const auto& [a, b] : pairs) {
        const RowMatrix A = as_matrix(*a, dim, "A");
        const RowMatrix B = as_matrix(*b, dim, "B");
        const Eigen::MatrixXd gram = A * A.transpose() + B * B.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
        best = std::max(best, es.eigenvalues().maxCoeff());
    }
    return std::max(best, 0.0);
}

CoefficientSystem LinearSystem::to_system(std::string name) const {
    const std::size_t n = dim;
    if (n == 0) throw std::invalid_argument("LinearSystem: dimension must be positive");
    const std::size_t nn = n * n;
    auto f = affine(n, dense_or_zero(A_f, nn, "A_f"), dense_or_zero(B_f, nn, "B_f"), dense_or_zero(c_f, n, "c_f"));
    auto g = affine(n, dense_or_zero(A_g, nn, "A_g"), dense_or_zero(B_g, nn, "B_g"), dense_or_zero(c_g, n, "c_g"));
    auto h = affine(n, dense_or_zero(A_h, nn, "A_h"), dense_or_zero(B_h, nn, "B_h"), dense_or_zero(c_h, n, "c_h"));
    return CoefficientSystem(n, std::move(f), std::move(g), std::move(h), lipschitz(), -1.0, std::move(name));
}

CoefficientSystem zero_system(std::size_t dim, double lipschitz) {
    auto zero = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    return CoefficientSystem(dim, zero, zero, zero, lipschitz, -1.0, "zero");
}

// ---------------------------------------------------------------- DelayGrid

DelayGrid::DelayGrid(double tau, std::size_t m, std::size_t steps, int)
    : tau_(tau), m_(m), delta_(tau / static_cast<double>(m)), steps_(steps) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("DelayGrid: tau must be positive");
    if (m == 0) throw std::invalid_argument("DelayGrid: steps per delay m must be positive");
    if (steps == 0) throw std::invalid_argument("DelayGrid: horizon must contain at least one step");
}

DelayGrid::DelayGrid(double tau, std::size_t m, double horizon) : DelayGrid(tau, m, std::size_t{1}, 0) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("DelayGrid: horizon must be positive");
    const double ratio = horizon / delta_;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(n - ratio) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("DelayGrid: horizon must be an integer multiple of tau/m");
    steps_ = static_cast<std::size_t>(n);
}

DelayGrid DelayGrid::with_steps(double tau, std::size_t m, std::size_t steps) {
    return DelayGrid(tau, m, steps, 0);
}

double DelayGrid::time(std::ptrdiff_t n) const {
    const auto mm = static_cast<std::ptrdiff_t>(m_);
    std::ptrdiff_t q = n / mm;
    std::ptrdiff_t r = n % mm;
    if (r < 0) {
        r += mm;
        --q;
    }
    return static_cast<double>(q) * tau_ + static_cast<double>(r) * delta_;
}

std::ptrdiff_t DelayGrid::index_of(double t) const {
    const double k = std::round(t / delta_);
    const auto n = static_cast<std::ptrdiff_t>(k);
    if (std::abs(time(n) - t) > 1e-9 * std::max(delta_, std::abs(t)))
        throw std::invalid_argument("DelayGrid: time is not a grid point");
    return n;
}

DelayGrid DelayGrid::refined(std::size_t r) const {
    if (r == 0) throw std::invalid_argument("DelayGrid: refinement factor must be positive");
    return DelayGrid(tau_, m_ * r, steps_ * r, 0);
}

// ---------------------------------------------------------------- InitialSegment

InitialSegment::InitialSegment(std::size_t dim, std::size_t m, std::vector<double> values)
    : dim_(dim), m_(m), values_(std::move(values)) {
    if (dim_ == 0 || m_ == 0) throw std::invalid_argument("InitialSegment: dim and m must be positive");
    if (values_.size() != (m_ + 1) * dim_)
        throw std::invalid_argument("InitialSegment: expected (m + 1) * dim values");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("InitialSegment: values must be finite");
}

InitialSegment InitialSegment::constant(std::span<const double> value, std::size_t m) {
    std::vector<double> v;
    v.reserve((m + 1) * value.size());
    for (std::size_t k = 0; k <= m; ++k) v.insert(v.end(), value.begin(), value.end());
    return InitialSegment(value.size(), m, std::move(v));
}

InitialSegment InitialSegment::sample(std::size_t dim, const DelayGrid& grid,
                                      const std::function<void(double, std::span<double>)>& fn) {
    const std::size_t m = grid.m();
    std::vector<double> v((m + 1) * dim);
    for (std::size_t k = 0; k <= m; ++k) {
        const auto n = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(m);
        fn(grid.time(n), std::span<double>(v.data() + k * dim, dim));
    }
    return InitialSegment(dim, m, std::move(v));
}

std::span<const double> InitialSegment::at(std::ptrdiff_t n) const {
    if (n > 0 || n < -static_cast<std::ptrdiff_t>(m_))
        throw std::out_of_range("InitialSegment: index outside [-m, 0]");
    const auto k = static_cast<std::size_t>(n + static_cast<std::ptrdiff_t>(m_));
    return {values_.data() + k * dim_, dim_};
}

std::vector<double> InitialSegment::interpolate(double theta, double tau) const {
    if (theta < -tau * (1.0 + 1e-12) || theta > tau * 1e-12)
        throw std::out_of_range("InitialSegment: theta outside [-tau, 0]");
    const double pos = std::clamp((theta + tau) / tau * static_cast<double>(m_), 0.0, static_cast<double>(m_));
    const auto k = std::min(static_cast<std::size_t>(pos), m_ - 1);
    const double w = pos - static_cast<double>(k);
    std::vector<double> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        out[i] = (1.0 - w) * values_[k * dim_ + i] + w * values_[(k + 1) * dim_ + i];
    return out;
}

InitialSegment InitialSegment::resampled(std::size_t r) const {
    if (r == 0) throw std::invalid_argument("InitialSegment: refinement factor must be positive");
    if (r == 1) return *this;
    const std::size_t mf = m_ * r;
    std::vector<double> v((mf + 1) * dim_);
    for (std::size_t k = 0; k <= mf; ++k) {
        const std::size_t lo = std::min(k / r, m_ - 1);
        const double w = static_cast<double>(k - lo * r) / static_cast<double>(r);
        for (std::size_t i = 0; i < dim_; ++i)
            v[k * dim_ + i] = (1.0 - w) * values_[lo * dim_ + i] + w * values_[(lo + 1) * dim_ + i];
    }
    return InitialSegment(dim_, mf, std::move(v));
}

double segment_norm(const InitialSegment& xi, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("segment_norm: p must be >= 2");
    double best = 0.0;
    for (std::ptrdiff_t n = -static_cast<std::ptrdiff_t>(xi.m()); n <= 0; ++n)
        best = std::max(best, pow_norm(xi.at(n), p));
    return best;
}

double segment_norm(const std::vector<std::vector<InitialSegment>>& samples, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("segment_norm: p must be >= 2");
    if (samples.empty() || samples.front().empty())
        throw std::invalid_argument("segment_norm: need at least one scenario with one sample");
    const std::size_t m = samples.front().front().m();
    double best = 0.0;
    std::vector<std::vector<double>> values(samples.size());
    for (std::ptrdiff_t n = -static_cast<std::ptrdiff_t>(m); n <= 0; ++n) {
        for (std::size_t k = 0; k < samples.size(); ++k) {
            values[k].clear();
            for (const auto& xi : samples[k]) {
                if (xi.m() != m) throw std::invalid_argument("segment_norm: samples use different grids");
                values[k].push_back(pow_norm(xi.at(n), p));
            }
        }
        best = std::max(best, upper_expectation(values));
    }
    return best;
}

// ---------------------------------------------------------------- (H1)

namespace {

std::string format_point(std::span<const double> x, std::span<const double> y) {
    std::ostringstream os;
    os.precision(17);
    os << "x=(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << "), y=(";
    for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << ")";
    return os.str();
}

}  // namespace

H1Report validate_h1(const CoefficientSystem& sys, std::size_t samples, std::uint64_t seed, double box) {
    if (samples == 0) throw std::invalid_argument("validate_h1: need at least one sample");
    if (!(box > 0.0)) throw std::invalid_argument("validate_h1: box must be positive");
    const std::size_t n = sys.dim();
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(-box, box);

    H1Report report;
    report.declared_lipschitz = sys.lipschitz();
    report.samples = samples;

    std::vector<double> x(n), y(n), x2(n), y2(n), a(n), b(n);
    const char* names[] = {"f", "g", "h"};
    double* ratios[] = {&report.ratio_f, &report.ratio_g, &report.ratio_h};

    for (std::size_t s = 0; s < samples; ++s) {
        for (auto* v : {&x, &y, &x2, &y2})
            for (double& c : *v) c = unif(gen);
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            denom += (x[i] - x2[i]) * (x[i] - x2[i]) + (y[i] - y2[i]) * (y[i] - y2[i]);
        if (denom == 0.0) continue;
        for (int c = 0; c < 3; ++c) {
            switch (c) {
                case 0: sys.drift(x, y, a); sys.drift(x2, y2, b); break;
                case 1: sys.qv_drift(x, y, a); sys.qv_drift(x2, y2, b); break;
                default: sys.diffusion(x, y, a); sys.diffusion(x2, y2, b); break;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
                    const bool first = !std::isfinite(a[i]);
                    report.passed = false;
                    report.diagnostic = std::string(names[c]) + " returned a non-finite value at " +
                                        (first ? format_point(x, y) : format_point(x2, y2));
                    return report;
                }
            }
            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
            *ratios[c] = std::max(*ratios[c], num / denom);
        }
    }
    report.max_ratio = std::max({report.ratio_f, report.ratio_g, report.ratio_h});
    const double allowed = report.declared_lipschitz * (1.0 + 1e-9) + 1e-12;
    report.passed = report.max_ratio <= allowed;
    if (!report.passed) {
        std::ostringstream os;
        os.precision(6);
        os << "empirical Lipschitz ratio " << report.max_ratio << " exceeds declared L = "
           << report.declared_lipschitz;
        report.diagnostic = os.str();
    }
    return report;
}

}  // namespace gstab
