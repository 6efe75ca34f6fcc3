#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/fourier.hpp"
#include "tsl/grid.hpp"

namespace tsl {

inline constexpr int kMomentCap = 10;
inline constexpr double kMomentAgreement = 1e-6;
inline constexpr double kSupportTolerance = 1e-12;
inline constexpr int kStrongOrderCap = 12;

struct MultiIndex {
    int a = 0;
    int b = 0;
    int order() const { return a + b; }
    bool operator==(const MultiIndex&) const = default;
};

struct Moment {
    MultiIndex index;
    cplx value;
};

// Multi-indices of total order <= q in the given dimension, ordered by total order.
inline std::vector<MultiIndex> multi_indices(int dim, int q) {
    std::vector<MultiIndex> out;
    for (int s = 0; s <= q; ++s) {
        if (dim == 1) {
            out.push_back({s, 0});
        } else {
            for (int a = s; a >= 0; --a) out.push_back({a, s - a});
        }
    }
    return out;
}

inline double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

inline double multi_factorial(const MultiIndex& m) { return factorial(m.a) * factorial(m.b); }

inline cplx ipow(int k) {
    static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[((k % 4) + 4) % 4];
}

// Probabilists' Hermite polynomial He_n.
inline double hermite_he(int n, double x) {
    double h0 = 1.0, h1 = x;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = x * h1 - k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

// Finite-difference weights for derivatives 0..m at z from nodes x (Fornberg's recursion).
inline std::vector<std::vector<double>> fd_weights(double z, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(x.size(), std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    return c;
}

using SpectrumFn = std::function<cplx(const Point&)>;
// Holomorphic extension of the spectrum (per-axis complex arguments); enables contour derivatives.
using AnalyticSpectrumFn = std::function<cplx(cplx, cplx)>;
using DerivativeFn = std::function<cplx(const Point&, const MultiIndex&)>;

struct KernelTruth {
    bool nondegenerate = true;
    std::optional<double> tau;
    std::optional<int> strong_order;
};

struct KernelSource {
    std::string name;
    UniformGrid grid;
    SpectrumFn spectrum;             // closed-form spectrum (optional when samples are given)
    AnalyticSpectrumFn analytic{};   // optional
    DerivativeFn derivative{};       // optional closed-form spatial derivatives
    int moment_order = 4;
    double fd_step = 0.01;           // real-axis stencil step for spectral derivatives
    double contour_radius = 1.0;
    std::optional<KernelTruth> truth{};
};

class Kernel;
inline std::vector<Moment> compute_moments(const Kernel& k, int max_order);

class Kernel {
public:
    Kernel() = default;

    // Kernel defined by closed forms; samples are generated on the grid.
    static Kernel from_source(KernelSource src) {
        if (!src.spectrum) throw InvalidArgument("kernel source needs a spectrum");
        Kernel k;
        k.src_ = std::move(src);
        const UniformGrid& g = k.src_.grid;
        k.spectral_.resize(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) k.spectral_[j] = k.src_.spectrum(g.freq_point(j));
        if (k.src_.derivative) {
            k.spatial_.resize(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) k.spatial_[i] = k.src_.derivative(g.point(i), {});
        } else {
            k.spatial_ = inverse_spectrum(k.spectral_, g);
        }
        k.finish();
        return k;
    }

    // Kernel given only by spatial samples (edge-checked).
    static Kernel from_samples(std::string name, const UniformGrid& grid, CVec samples, int moment_order = 4,
                               double fd_step = 0.01) {
        Kernel k;
        k.src_.name = std::move(name);
        k.src_.grid = grid;
        k.src_.moment_order = moment_order;
        k.src_.fd_step = fd_step;
        k.spectral_ = forward_spectrum(samples, grid);
        k.spatial_ = std::move(samples);
        k.finish();
        return k;
    }

    const std::string& name() const { return src_.name; }
    const UniformGrid& grid() const { return src_.grid; }
    int dimension() const { return src_.grid.dimension(); }
    const CVec& spatial() const { return spatial_; }
    const CVec& spectral() const { return spectral_; }
    const std::vector<Moment>& moments() const { return moments_; }
    int moment_order() const { return src_.moment_order; }
    const std::optional<KernelTruth>& truth() const { return src_.truth; }
    const KernelSource& source() const { return src_; }
    bool has_closed_spectrum() const { return static_cast<bool>(src_.spectrum); }
    bool has_closed_derivatives() const { return static_cast<bool>(src_.derivative); }
    bool has_analytic_spectrum() const { return static_cast<bool>(src_.analytic); }
    double spectral_peak() const { return spectral_peak_; }

    cplx moment(const MultiIndex& m) const {
        for (const auto& mo : moments_)
            if (mo.index == m) return mo.value;
        throw InvalidArgument("moment of order " + std::to_string(m.order()) + " not cached for " + name());
    }

    // Spectrum at an arbitrary frequency: closed form, else the transform of the samples.
    cplx spectrum_at(const Point& u) const {
        if (src_.spectrum) return src_.spectrum(u);
        const UniformGrid& g = src_.grid;
        cplx acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point t = g.point(i);
            acc += spatial_[i] * std::polar(1.0, -(u[0] * t[0] + u[1] * t[1]));
        }
        return acc * g.cell_volume();
    }

    // Spatial derivative d^m phi(t): closed form, else a spectral sum over the dual grid.
    cplx derivative_at(const Point& t, const MultiIndex& m = {}) const {
        if (src_.derivative) return src_.derivative(t, m);
        const UniformGrid& g = src_.grid;
        const double cut = 1e-18 * spectral_peak_;
        cplx acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (std::abs(spectral_[j]) <= cut) continue;
            const Point u = g.freq_point(j);
            cplx factor = std::pow(cplx(0.0, u[0]), m.a);
            if (m.b) factor *= std::pow(cplx(0.0, u[1]), m.b);
            acc += factor * spectral_[j] * std::polar(1.0, u[0] * t[0] + u[1] * t[1]);
        }
        return acc * g.freq_cell_volume() / std::pow(kTwoPi, g.dimension());
    }

    // t -> conj(phi(-t)); spectrum becomes conj(phi^).
    Kernel flipped_conjugate() const {
        KernelSource s = src_;
        s.name = src_.name + "~";
        if (src_.spectrum) {
            auto f = src_.spectrum;
            s.spectrum = [f](const Point& u) { return std::conj(f(u)); };
        }
        if (src_.analytic) {
            auto f = src_.analytic;
            s.analytic = [f](cplx z1, cplx z2) { return std::conj(f(std::conj(z1), std::conj(z2))); };
        }
        if (src_.derivative) {
            auto f = src_.derivative;
            s.derivative = [f](const Point& t, const MultiIndex& m) {
                const double sign = (m.order() % 2) ? -1.0 : 1.0;
                return sign * std::conj(f({-t[0], -t[1]}, m));
            };
        }
        if (s.spectrum) return from_source(std::move(s));
        // Reverse the samples on the mirrored grid.
        std::vector<Axis> axes = src_.grid.axes();
        for (auto& ax : axes) ax.origin = -(ax.origin + ax.spacing * static_cast<double>(ax.count - 1));
        UniformGrid mg(axes);
        CVec flipped(spatial_.size());
        for (std::size_t i = 0; i < spatial_.size(); ++i) flipped[spatial_.size() - 1 - i] = std::conj(spatial_[i]);
        return from_samples(s.name, mg, std::move(flipped), s.moment_order, s.fd_step);
    }

    // Samples of phi on another grid (closed form when available, else periodised spectral synthesis).
    CVec sample_on(const UniformGrid& g) const {
        CVec out(g.size());
        if (src_.derivative) {
            for (std::size_t i = 0; i < g.size(); ++i) out[i] = src_.derivative(g.point(i), {});
            return out;
        }
        CVec spec(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) spec[j] = spectrum_at(g.freq_point(j));
        return inverse_spectrum(spec, g);
    }

    void recompute_moments(int order) {
        src_.moment_order = order;
        moments_ = compute_moments(*this, order);
    }

private:
    void finish() {
        if (src_.moment_order < 0 || src_.moment_order > kMomentCap)
            throw InvalidArgument("moment order must lie in [0, " + std::to_string(kMomentCap) + "]");
        spectral_peak_ = 0.0;
        for (const auto& v : spectral_) spectral_peak_ = std::max(spectral_peak_, std::abs(v));
        moments_ = compute_moments(*this, src_.moment_order);
    }

    KernelSource src_;
    CVec spatial_, spectral_;
    std::vector<Moment> moments_;
    double spectral_peak_ = 0.0;
};

namespace detail {

inline cplx quadrature_moment(const Kernel& k, const MultiIndex& m) {
    const UniformGrid& g = k.grid();
    CVec integrand(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point t = g.point(i);
        integrand[i] = std::pow(t[0], m.a) * std::pow(t[1], m.b) * k.spatial()[i];
    }
    return quadrature(integrand, g, {.waive = true});
}

// d^m phi^(0) via a contour integral of the holomorphic extension.
inline cplx contour_derivative(const Kernel& k, const MultiIndex& m) {
    constexpr int nodes = 64;
    const double r = k.source().contour_radius;
    const auto& f = k.source().analytic;
    cplx acc = 0.0;
    if (k.dimension() == 1) {
        for (int p = 0; p < nodes; ++p) {
            const double th = kTwoPi * p / nodes;
            acc += f(std::polar(r, th), 0.0) * std::polar(1.0, -m.a * th);
        }
        return acc / static_cast<double>(nodes) * factorial(m.a) / std::pow(r, m.a);
    }
    for (int p = 0; p < nodes; ++p) {
        const double th = kTwoPi * p / nodes;
        for (int q = 0; q < nodes; ++q) {
            const double ph = kTwoPi * q / nodes;
            acc += f(std::polar(r, th), std::polar(r, ph)) * std::polar(1.0, -m.a * th - m.b * ph);
        }
    }
    return acc / static_cast<double>(nodes * nodes) * multi_factorial(m) / std::pow(r, m.order());
}

// d^m phi^(0) by a centred real-axis stencil (tensor product in 2D).
inline cplx stencil_derivative(const Kernel& k, const MultiIndex& m) {
    constexpr int half = 12;
    const double h = k.source().fd_step;
    std::vector<double> nodes;
    for (int p = -half; p <= half; ++p) nodes.push_back(p * h);
    const auto w = fd_weights(0.0, nodes, std::max(m.a, m.b));
    cplx acc = 0.0;
    if (k.dimension() == 1) {
        for (std::size_t p = 0; p < nodes.size(); ++p)
            acc += w[p][static_cast<std::size_t>(m.a)] * k.spectrum_at({nodes[p], 0.0});
        return acc;
    }
    for (std::size_t p = 0; p < nodes.size(); ++p) {
        const double wa = w[p][static_cast<std::size_t>(m.a)];
        if (wa == 0.0) continue;
        for (std::size_t q = 0; q < nodes.size(); ++q)
            acc += wa * w[q][static_cast<std::size_t>(m.b)] * k.spectrum_at({nodes[p], nodes[q]});
    }
    return acc;
}

}  // namespace detail

// Moments by quadrature of t^m phi, cross-checked against i^{|m|} d^m phi^(0).
inline std::vector<Moment> compute_moments(const Kernel& k, int max_order) {
    if (max_order < 0 || max_order > kMomentCap)
        throw InvalidArgument("moment order exceeds cap " + std::to_string(kMomentCap));
    std::vector<Moment> out;
    for (const auto& m : multi_indices(k.dimension(), max_order)) {
        const cplx quad = detail::quadrature_moment(k, m);
        const cplx deriv = k.has_analytic_spectrum() ? detail::contour_derivative(k, m)
                                                     : detail::stencil_derivative(k, m);
        const cplx spectral = ipow(m.order()) * deriv;
        if (std::abs(quad - spectral) > kMomentAgreement)
            throw MomentDisagreement(k.name() + ": moment (" + std::to_string(m.a) + "," + std::to_string(m.b) +
                                     ") quadrature " + std::to_string(quad.real()) + " vs spectral " +
                                     std::to_string(spectral.real()));
        out.push_back({m, quad});
    }
    return out;
}

// int |t|^n |phi(t)| dt: the scale against which a moment of order n counts as zero.
inline double absolute_moment(const Kernel& k, int n) {
    const UniformGrid& g = k.grid();
    CVec integrand(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point t = g.point(i);
        integrand[i] = std::pow(std::hypot(t[0], t[1]), n) * std::abs(k.spatial()[i]);
    }
    return quadrature(integrand, g, {.waive = true}).real();
}

inline std::vector<Moment> moments(const Kernel& k, int max_order) {
    if (max_order <= k.moment_order()) {
        std::vector<Moment> out;
        for (const auto& mo : k.moments())
            if (mo.index.order() <= max_order) out.push_back(mo);
        return out;
    }
    return compute_moments(k, max_order);
}

// Coefficients of the homogeneous Taylor terms of phi^ at 0:  P_q(u) = sum_{|m|=q} c_m u^m.
struct TaylorTerm {
    int degree = 0;
    std::vector<std::pair<MultiIndex, cplx>> coefficients;

    cplx operator()(const Point& u) const {
        cplx s = 0.0;
        for (const auto& [m, c] : coefficients) s += c * std::pow(u[0], m.a) * std::pow(u[1], m.b);
        return s;
    }
};

inline std::vector<TaylorTerm> taylor_terms(const Kernel& k, int q_max) {
    const auto mo = moments(k, q_max);
    std::vector<TaylorTerm> out(static_cast<std::size_t>(q_max) + 1);
    for (int q = 0; q <= q_max; ++q) out[static_cast<std::size_t>(q)].degree = q;
    for (const auto& m : mo) {
        const cplx c = ipow(-m.index.order()) * m.value / multi_factorial(m.index);
        out[static_cast<std::size_t>(m.index.order())].coefficients.push_back({m.index, c});
    }
    return out;
}

// Unit directions of the ray fan: +-1 in 1D, ray_count equally spaced angles in 2D.
inline std::vector<Point> ray_fan(int dim, int ray_count) {
    if (dim == 1) return {{1.0, 0.0}, {-1.0, 0.0}};
    if (ray_count < 64) throw InvalidArgument("2D ray fan needs at least 64 rays");
    std::vector<Point> out;
    for (int k = 0; k < ray_count; ++k) {
        const double th = kTwoPi * k / ray_count;
        out.push_back({std::cos(th), std::sin(th)});
    }
    return out;
}

inline double ray_extent(const UniformGrid& g) {
    double e = g.axis(0).max_freq();
    for (const auto& ax : g.axes()) e = std::min(e, ax.max_freq() - ax.freq_spacing());
    return e;
}

inline bool is_nondegenerate(const Kernel& k, int ray_count = 256, double tol = kSupportTolerance) {
    const double thr = tol * k.spectral_peak();
    if (k.spectral_peak() == 0.0) return false;
    for (const auto& w : ray_fan(k.dimension(), ray_count)) {
        const auto prof = ray_samples(k.spectral(), k.grid(), w, ray_extent(k.grid()));
        if (*std::max_element(prof.magnitude.begin(), prof.magnitude.end()) <= thr) return false;
    }
    return true;
}

struct IndexEstimate {
    double tau = 0.0;
    double uncertainty = 0.0;  // one spectral bin
};

inline IndexEstimate nondegeneracy_index(const Kernel& k, double tol = kSupportTolerance, int ray_count = 256) {
    if (!is_nondegenerate(k, ray_count, tol))
        throw DegenerateKernel(k.name() + ": spectrum vanishes along a sampled ray");
    // closed-form spectra carry no noise floor, so their support starts at the first nonzero value
    const double thr = k.has_closed_spectrum() ? 0.0 : tol * k.spectral_peak();
    double tau = 0.0;
    for (const auto& w : ray_fan(k.dimension(), ray_count)) {
        const auto prof = ray_samples(k.spectral(), k.grid(), w, ray_extent(k.grid()));
        double first = 0.0;
        for (std::size_t i = 0; i < prof.radius.size(); ++i) {
            if (prof.magnitude[i] > thr) {
                if (i > 0) {
                    // exact infimum for the piecewise-linear profile
                    const double v0 = prof.magnitude[i - 1], v1 = prof.magnitude[i];
                    first = prof.radius[i - 1] + (thr - v0) / (v1 - v0) * (prof.radius[i] - prof.radius[i - 1]);
                }
                break;
            }
        }
        tau = std::max(tau, first);
    }
    return {tau, k.grid().min_freq_spacing()};
}

struct StrongBound {
    int order = 0;    // N
    double constant;  // C
    double radius;    // r
};

// Minimal N with |phi^(u)| >= C |u|^N on 0 < |u| <= r, then the r maximizing C.
inline std::optional<StrongBound> strong_nondegeneracy(const Kernel& k, int n_max = kStrongOrderCap,
                                                       std::vector<double> r_grid = {1.0, 2.0, 4.0},
                                                       int ray_count = 64) {
    if (n_max < 0 || n_max > kStrongOrderCap) throw InvalidArgument("N_max must lie in [0, 12]");
    constexpr double floor = 1e-13;
    constexpr int geo = 161, lin = 200;
    const auto fan = ray_fan(k.dimension(), ray_count);
    for (int n = 0; n <= n_max; ++n) {
        std::optional<StrongBound> best;
        for (double r : r_grid) {
            double c = std::numeric_limits<double>::infinity();
            bool trend_ok = true;
            for (const auto& w : fan) {
                auto ratio = [&](double s) {
                    return std::abs(k.spectrum_at({s * w[0], s * w[1]})) / std::pow(s, n);
                };
                // geometric samples from 1e-4 r to r, then uniform ones
                for (int i = 0; i < geo; ++i) c = std::min(c, ratio(r * std::pow(10.0, -4.0 + 4.0 * i / (geo - 1))));
                for (int i = 1; i <= lin; ++i) c = std::min(c, ratio(r * i / lin));
                const double near = ratio(1e-4 * r), far = ratio(1e-2 * r);
                if (!(near >= 0.1 * far)) trend_ok = false;
            }
            if (trend_ok && c > floor && (!best || c > best->constant)) best = StrongBound{n, c, r};
        }
        if (best) return best;
    }
    return std::nullopt;
}

inline bool is_in_moment_ideal_Pd(const Kernel& k, int d, double tol = 1e-8) {
    if (d <= 0) return true;
    if (d - 1 > kMomentCap) throw InvalidArgument("d exceeds moment cap");
    for (const auto& m : moments(k, d - 1))
        if (std::abs(m.value) > tol) return false;
    return true;
}

struct KernelReport {
    bool nondegenerate = false;
    std::optional<double> tau;
    double tau_uncertainty = 0.0;
    std::optional<StrongBound> strong;
    std::vector<Moment> moments;
    std::optional<int> first_nonvanishing_moment_order;
};

inline KernelReport analyze_kernel(const Kernel& k, double moment_tol = 1e-8) {
    KernelReport rep;
    rep.moments = k.moments();
    for (const auto& m : rep.moments) {
        if (std::abs(m.value) > moment_tol) {
            rep.first_nonvanishing_moment_order = m.index.order();
            break;
        }
    }
    rep.nondegenerate = is_nondegenerate(k);
    if (rep.nondegenerate) {
        const auto idx = nondegeneracy_index(k);
        rep.tau = idx.tau;
        rep.tau_uncertainty = idx.uncertainty;
        rep.strong = strong_nondegeneracy(k);
    }
    return rep;
}

}  // namespace tsl
