#pragma once
// Calibration constants, reconstruction wavelets and the synthesis operator.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "tsl/catalog.hpp"
#include "tsl/errors.hpp"
#include "tsl/fourier.hpp"
#include "tsl/kernels.hpp"
#include "tsl/parallel.hpp"
#include "tsl/signals.hpp"
#include "tsl/transform.hpp"

namespace tsl {

inline constexpr double kCalibrationFloor = 1e-13;
inline constexpr double kLadderTruncation = 1e-6;

// Nodes and weights for int_0^inf g(r) dr/r on [a, b] after r = e^s (trapezoid in s).
struct LogNodes {
    std::vector<double> r, w;
    LogNodes(double a, double b, std::size_t count) {
        const double h = std::log(b / a) / static_cast<double>(count - 1);
        r.resize(count);
        w.assign(count, h);
        for (std::size_t i = 0; i < count; ++i) r[i] = a * std::exp(h * static_cast<double>(i));
        w.front() = w.back() = 0.5 * h;
    }
};

inline const LogNodes& calibration_nodes() {
    static const LogNodes nodes(1e-6, 1e6, 4096);
    return nodes;
}

struct Calibration {
    cplx value = 0.0;
    std::vector<Point> directions;
    std::vector<cplx> per_direction;
    double anisotropy = 0.0;
};

// c(w) = int_0^inf conj(psi^(r w)) eta^(r w) dr/r along a fan of rays; value is the mean.
inline Calibration calibration_constant(const Kernel& psi, const Kernel& eta, int ray_count = 64,
                                        double tol_aniso = 1e-6) {
    if (psi.dimension() != eta.dimension()) throw InvalidArgument("calibration across dimensions");
    const auto ph = spectrum_sampler(psi), eh = spectrum_sampler(eta);
    const auto& nodes = calibration_nodes();
    Calibration cal;
    cal.directions = ray_fan(psi.dimension(), ray_count);
    for (const auto& w : cal.directions) {
        cplx acc = 0.0;
        double peak = 0.0, ends = 0.0;
        for (std::size_t i = 0; i < nodes.r.size(); ++i) {
            const Point u{nodes.r[i] * w[0], nodes.r[i] * w[1]};
            const cplx g = std::conj(ph(u)) * eh(u);
            acc += nodes.w[i] * g;
            peak = std::max(peak, std::abs(g));
            if (i == 0 || i + 1 == nodes.r.size()) ends = std::max(ends, std::abs(g));
        }
        // the integrand has to vanish at both ends of the ray for the dr/r integral to exist
        if (ends > 1e-8 * peak)
            throw InvalidArgument("calibration integrand of " + psi.name() + " and " + eta.name() +
                                  " does not vanish as r -> 0 or r -> inf");
        cal.per_direction.push_back(acc);
    }
    cal.value = std::accumulate(cal.per_direction.begin(), cal.per_direction.end(), cplx(0.0)) /
                static_cast<double>(cal.per_direction.size());
    if (std::abs(cal.value) < kCalibrationFloor) throw ZeroCalibration("|c| = " + std::to_string(std::abs(cal.value)));
    for (const auto& c : cal.per_direction) cal.anisotropy = std::max(cal.anisotropy, std::abs(c - cal.value) / std::abs(cal.value));
    if (cal.anisotropy > tol_aniso)
        throw AnisotropicCalibration("relative spread across directions " + std::to_string(cal.anisotropy));
    return cal;
}

// Radial cutoff: smooth, supported in [inner, outer], equal to 1 on the middle half.
struct Annulus {
    double inner = 0.5;
    double outer = 1.5;

    double operator()(double r) const {
        const double ramp = 0.25 * (outer - inner);
        return smooth_step((r - inner) / ramp) * smooth_step((outer - r) / ramp);
    }
    // Annulus whose flat part contains the sphere of radius rho.
    static Annulus around(double rho) { return {0.5 * rho, 2.0 * rho}; }
};

// Default annulus radius: the index tau, or 4 spectral bins when tau = 0.
inline double annulus_radius(const Kernel& phi) {
    const double tau = nondegeneracy_index(phi).tau;
    return std::max(tau, 4.0 * phi.grid().min_freq_spacing());
}

// eta^(u) = kappa(|u|) conj(phi^(u)) / int_0^inf kappa(r)|phi^(r w)|^2 dr/r with w = u/|u|;
// then c_{phi,eta} = 1 on every ray and supp eta^ lies in the annulus.
inline Kernel reconstruction_wavelet(const Kernel& phi, const Annulus& kappa) {
    if (!is_nondegenerate(phi)) throw DegenerateKernel(phi.name() + " is degenerate");
    if (!(kappa.inner > 0.0) || !(kappa.outer > kappa.inner)) throw InvalidArgument("annulus needs 0 < inner < outer");
    if (kappa.outer >= phi.grid().max_freq()) throw InvalidArgument("annulus exceeds the kernel's spectral grid");
    const int dim = phi.dimension();
    const auto ph = spectrum_sampler(phi);
    const LogNodes nodes(kappa.inner, kappa.outer, 4096);

    auto denom = [&](const Point& w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.r.size(); ++i)
            acc += nodes.w[i] * kappa(nodes.r[i]) * std::norm(ph({nodes.r[i] * w[0], nodes.r[i] * w[1]}));
        return acc;
    };
    // denominators per direction: the two half-lines in 1D, an angular table in 2D
    const std::size_t angles = dim == 1 ? 2 : 1024;
    std::vector<double> table(angles);
    parallel_for(angles, [&](std::size_t a) {
        if (dim == 1) {
            table[a] = denom({a == 0 ? 1.0 : -1.0, 0.0});
        } else {
            const double th = kTwoPi * static_cast<double>(a) / static_cast<double>(angles);
            table[a] = denom({std::cos(th), std::sin(th)});
        }
    });
    const double dmin = *std::min_element(table.begin(), table.end());
    if (dmin < kCalibrationFloor)
        throw DivisionUnderflow("denominator " + std::to_string(dmin) + " on the annulus [" +
                                std::to_string(kappa.inner) + ", " + std::to_string(kappa.outer) + "]");

    auto lookup = [table, dim, angles](const Point& u) {
        if (dim == 1) return u[0] >= 0.0 ? table[0] : table[1];
        double th = std::atan2(u[1], u[0]);
        if (th < 0.0) th += kTwoPi;
        const double pos = th / kTwoPi * static_cast<double>(angles);
        const auto i0 = static_cast<std::size_t>(std::floor(pos)) % angles;
        const double fr = pos - std::floor(pos);
        return (1.0 - fr) * table[i0] + fr * table[(i0 + 1) % angles];
    };

    KernelSource s;
    s.name = phi.name() + "-recon";
    // eta^ has ramps of width (outer - inner)/4, so eta itself needs a long window to decay
    if (dim == 1) {
        const double span = std::max(phi.grid().axis(0).length(), 2048.0);
        std::size_t n = 4096;
        while (kPi * static_cast<double>(n) / span < 2.0 * kappa.outer) n *= 2;
        s.grid = UniformGrid::line(-0.5 * span, 0.5 * span, n);
    } else {
        const double span = std::max(phi.grid().axis(0).length(), 512.0);
        std::size_t n = 256;
        while (kPi * static_cast<double>(n) / span < 2.0 * kappa.outer) n *= 2;
        s.grid = UniformGrid::square(-0.5 * span, 0.5 * span, n);
    }
    s.moment_order = 0;
    s.spectrum = [ph, kappa, lookup, dim](const Point& u) -> cplx {
        const double r = dim == 1 ? std::abs(u[0]) : std::hypot(u[0], u[1]);
        const double k = kappa(r);
        if (k == 0.0) return 0.0;
        return k * std::conj(ph(u)) / lookup(u);
    };
    return Kernel::from_source(std::move(s));
}

// t -> phi(-t)
inline Kernel reflected(const Kernel& phi) {
    KernelSource s = phi.source();
    s.name = phi.name() + "-reflected";
    const auto ph = spectrum_sampler(phi);
    s.spectrum = [ph](const Point& u) { return ph({-u[0], -u[1]}); };
    s.analytic = nullptr;
    if (phi.has_analytic_spectrum()) {
        auto f = phi.source().analytic;
        s.analytic = [f](cplx z1, cplx z2) { return f(-z1, -z2); };
    }
    if (phi.has_closed_derivatives()) {
        auto f = phi.source().derivative;
        s.derivative = [f](const Point& t, const MultiIndex& m) {
            return ((m.order() % 2) ? -1.0 : 1.0) * f({-t[0], -t[1]}, m);
        };
    }
    return Kernel::from_source(std::move(s));
}

// Norms of the scale slices relative to the largest one: {bottom, top}.
inline std::pair<double, double> end_slice_ratios(const ScaleField& field) {
    std::vector<double> n(field.ladder.size());
    for (std::size_t s = 0; s < n.size(); ++s) {
        double acc = 0.0;
        for (const auto& comp : field.values[s]) acc += std::pow(grid_l2_norm(comp, field.grid), 2);
        n[s] = std::sqrt(acc);
    }
    const double peak = *std::max_element(n.begin(), n.end());
    if (peak == 0.0) return {0.0, 0.0};
    return {n.front() / peak, n.back() / peak};
}

// M_psi Phi(t) = sum_j w_j (Phi(., y_j) * psi_{y_j})(t), summed in ascending scale order.
inline std::vector<CVec> synthesize(const ScaleField& field, const Kernel& psi,
                                    double truncation_tolerance = kLadderTruncation) {
    if (psi.dimension() != field.grid.dimension()) throw InvalidArgument("kernel and field dimensions differ");
    const auto [bottom, top] = end_slice_ratios(field);
    if (bottom > truncation_tolerance || top > truncation_tolerance)
        throw LadderTruncationError("end slices reach " + std::to_string(bottom) + " (bottom) and " +
                                    std::to_string(top) + " (top) of the largest slice, tolerance " +
                                    std::to_string(truncation_tolerance));
    const auto& g = field.grid;
    const auto ph = spectrum_sampler(psi);
    const std::size_t S = field.ladder.size(), m = field.components;
    std::vector<std::vector<CVec>> terms(S);
    parallel_for(S, [&](std::size_t s) {
        const double y = field.ladder[s], w = field.ladder.weights()[s];
        terms[s].resize(m);
        for (std::size_t c = 0; c < m; ++c) {
            CVec spec = forward_spectrum(field.values[s][c], g, {.waive = true});
            for (std::size_t j = 0; j < g.size(); ++j) {
                const Point u = g.freq_point(j);
                spec[j] *= w * ph({y * u[0], y * u[1]});
            }
            terms[s][c] = inverse_spectrum(spec, g);
        }
    });
    std::vector<CVec> out(m, CVec(g.size(), 0.0));
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t i = 0; i < g.size(); ++i) out[c][i] += terms[s][c][i];
    return out;
}

struct ReconstructionReport {
    std::vector<CVec> f_rec;
    double relative_error = 0.0;  // L2 on the grid against the smooth + exponential parts
    cplx calibration = 0.0;
    bool poly_excluded = false;
    double bottom_ratio = 0.0, top_ratio = 0.0;
};

inline Signal without_poly(const Signal& f) {
    Signal r(f.dimension(), f.components());
    if (f.smooth()) r.add_smooth(f.smooth()->grid, f.smooth()->components, true);
    for (const auto& d : f.diracs()) r.add_dirac(d);
    for (const auto& w : f.waves()) r.add_wave(w);
    return r;
}

// f_rec = c^{-1} synthesize(W_psi f, eta).
inline ReconstructionReport reconstruct(const Signal& f, const Kernel& psi, const Kernel& eta, const UniformGrid& grid,
                                        const ScaleLadder& ladder, double truncation_tolerance = kLadderTruncation) {
    if (!is_nondegenerate(psi)) throw DegenerateKernel(psi.name() + " is degenerate");
    ReconstructionReport rep;
    const Calibration cal = calibration_constant(psi, eta);
    rep.calibration = cal.value;
    rep.poly_excluded = f.has_poly();
    const Signal g = rep.poly_excluded ? without_poly(f) : f;
    const ScaleField w = wavelet_transform(g, psi, grid, ladder);
    std::tie(rep.bottom_ratio, rep.top_ratio) = end_slice_ratios(w);
    rep.f_rec = synthesize(w, eta, truncation_tolerance);
    for (auto& comp : rep.f_rec)
        for (auto& v : comp) v /= cal.value;
    const auto ref = g.evaluate_on(grid, false);
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < ref.size(); ++c) {
        CVec diff(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) diff[i] = rep.f_rec[c][i] - ref[c][i];
        num += std::pow(grid_l2_norm(diff, grid), 2);
        den += std::pow(grid_l2_norm(ref[c], grid), 2);
    }
    rep.relative_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return rep;
}

// <f, rho> = c^{-1} int int W_psi f(x,y) W_{conj eta} rho(x,y) dx dy/y, truncated to the ladder.
inline CVec desingularize_pairing(const Signal& f, const Kernel& rho, const Kernel& psi, const Kernel& eta,
                                  const UniformGrid& grid, const ScaleLadder& ladder,
                                  double moment_tol = kMomentAgreement) {
    for (const auto& mo : rho.moments())
        if (std::abs(mo.value) > moment_tol)
            throw InvalidArgument(rho.name() + " is not in S0: moment of order " + std::to_string(mo.index.order()) +
                                  " is " + std::to_string(std::abs(mo.value)));
    const cplx c = calibration_constant(psi, eta).value;
    const Signal fg = f.has_poly() ? without_poly(f) : f;
    const ScaleField wf = wavelet_transform(fg, psi, grid, ladder);
    // W_{conj eta} rho(x,y) = int rho(x + y t) eta(t) dt = (rho * eta(-.)_y)(x)
    const ScaleField wr = regularize(kernel_signal(rho, grid), reflected(eta), grid, ladder);
    CVec out(f.components(), 0.0);
    for (std::size_t s = 0; s < ladder.size(); ++s) {
        for (std::size_t comp = 0; comp < f.components(); ++comp) {
            CVec prod(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) prod[i] = wf.values[s][comp][i] * wr.values[s][0][i];
            out[comp] += ladder.weights()[s] * quadrature(prod, grid, {.waive = true});
        }
    }
    for (auto& v : out) v /= c;
    return out;
}

}  // namespace tsl
