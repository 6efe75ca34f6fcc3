#pragma once
// Heat-type semigroups and cone-supported Laplace transforms seen as regularizing transforms.

#include <cmath>
#include <map>
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

// Homogeneous polynomial P(u) = sum c_m u^m of degree d; the evolution is dU/dt = P(d/dx) U.
struct HeatSymbol {
    int dim = 1;
    int degree = 2;
    std::vector<std::pair<MultiIndex, cplx>> coefficients;

    static HeatSymbol laplacian(int dim) {
        HeatSymbol p{dim, 2, {{{2, 0}, 1.0}}};
        if (dim == 2) p.coefficients.push_back({{0, 2}, 1.0});
        return p;
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw InvalidArgument("dimension must be 1 or 2");
        if (degree < 1 || coefficients.empty()) throw InvalidArgument("symbol needs a positive degree");
        for (const auto& [m, c] : coefficients) {
            if (m.order() != degree) throw InvalidArgument("symbol is not homogeneous of degree " + std::to_string(degree));
            if (dim == 1 && m.b != 0) throw InvalidArgument("bad multi-index for a 1D symbol");
        }
    }

    // P(i z) for complex z.
    cplx at_i(cplx z1, cplx z2 = 0.0) const {
        cplx s = 0.0;
        const cplx iz1 = cplx(0.0, 1.0) * z1, iz2 = cplx(0.0, 1.0) * z2;
        for (const auto& [m, c] : coefficients) s += c * std::pow(iz1, m.a) * std::pow(iz2, m.b);
        return s;
    }
    cplx at_i(const Point& u) const { return at_i(u[0], u[1]); }
};

// Re P(i w) < 0 on the sampled unit directions (enough by homogeneity).
inline void check_dissipative(const HeatSymbol& P, int ray_count = 256) {
    P.validate();
    for (const auto& w : ray_fan(P.dim, ray_count)) {
        const double re = P.at_i(w).real();
        if (!(re < 0.0))
            throw ConeViolation("Re P(iu) = " + std::to_string(re) + " >= 0 along direction (" + std::to_string(w[0]) +
                                ", " + std::to_string(w[1]) + ")");
    }
}

namespace detail {

// P(d/dx) applied to a polynomial stored as power -> coefficients.
using PolyMap = std::map<std::pair<int, int>, CVec>;

inline PolyMap apply_symbol(const HeatSymbol& P, const PolyMap& p, std::size_t m) {
    PolyMap out;
    for (const auto& [pw, coeff] : p)
        for (const auto& [k, c] : P.coefficients) {
            if (k.a > pw.first || k.b > pw.second) continue;
            const double f = falling(pw.first, k.a) * falling(pw.second, k.b);
            auto& slot = out.try_emplace({pw.first - k.a, pw.second - k.b}, CVec(m, 0.0)).first->second;
            for (std::size_t j = 0; j < m; ++j) slot[j] += c * f * coeff[j];
        }
    return out;
}

}  // namespace detail

// U(., t) on the grid with U^(u, t) = f^(u) e^{t P(iu)}, part by part.
inline std::vector<CVec> heat_evolve(const Signal& f, double t, const HeatSymbol& P, const UniformGrid& grid) {
    if (!(t > 0.0)) throw InvalidArgument("evolution time must be positive");
    if (P.dim != f.dimension() || grid.dimension() != f.dimension())
        throw InvalidArgument("symbol, signal and grid dimensions differ");
    check_dissipative(P);
    if (f.smooth() && !(f.smooth()->grid == grid)) throw InvalidArgument("grid must coincide with the smooth-part grid");
    const std::size_t m = f.components();
    std::vector<CVec> out(m, CVec(grid.size(), 0.0));

    CVec gain(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) gain[j] = std::exp(t * P.at_i(grid.freq_point(j)));

    if (f.smooth()) {
        for (std::size_t c = 0; c < m; ++c) {
            CVec spec = forward_spectrum(f.smooth()->components[c], grid, {.waive = f.smooth_edge_waived()});
            for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= gain[j];
            const CVec v = inverse_spectrum(spec, grid);
            for (std::size_t i = 0; i < v.size(); ++i) out[c][i] += v[i];
        }
    }
    for (const auto& d : f.diracs()) {
        CVec spec(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Point u = grid.freq_point(j);
            spec[j] = std::pow(cplx(0.0, u[0]), d.order.a) * std::pow(cplx(0.0, u[1]), d.order.b) *
                      std::polar(1.0, -(u[0] * d.location[0] + u[1] * d.location[1])) * gain[j];
        }
        const CVec v = inverse_spectrum(spec, grid);
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t i = 0; i < v.size(); ++i) out[c][i] += d.weight[c] * v[i];
    }
    for (const auto& w : f.waves()) {
        const cplx g = std::exp(t * P.at_i(w.frequency));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point x = grid.point(i);
            const cplx e = g * std::polar(1.0, w.frequency[0] * x[0] + w.frequency[1] * x[1]);
            for (std::size_t c = 0; c < m; ++c) out[c][i] += w.amplitude[c] * e;
        }
    }
    if (f.has_poly()) {
        // e^{t P(d)} p = sum_k t^k P(d)^k p / k!, finite because P(d) lowers the degree
        detail::PolyMap term;
        for (const auto& p : f.poly()) term[{p.power.a, p.power.b}] = p.coeff;
        double scale = 1.0;
        for (int k = 0; !term.empty(); ++k) {
            for (const auto& [pw, coeff] : term)
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const double v = scale * monomial(grid.point(i), {pw.first, pw.second});
                    for (std::size_t c = 0; c < m; ++c) out[c][i] += coeff[c] * v;
                }
            term = detail::apply_symbol(P, term, m);
            scale *= t / (k + 1);
        }
    }
    return out;
}

// phi^(u) = e^{P(iu)}; the Laplacian reuses the catalogued Gaussian with its closed-form profile.
inline Kernel induced_kernel(const HeatSymbol& P) {
    check_dissipative(P);
    const auto lap = HeatSymbol::laplacian(P.dim);
    bool is_lap = P.degree == 2 && P.coefficients.size() == lap.coefficients.size();
    for (std::size_t k = 0; is_lap && k < lap.coefficients.size(); ++k)
        is_lap = P.coefficients[k].first == lap.coefficients[k].first && P.coefficients[k].second == cplx(1.0);
    if (is_lap) return catalog("gaussian-heat", {.dim = P.dim});
    KernelSource s;
    s.name = "heat-induced";
    s.grid = P.dim == 1 ? UniformGrid::line(-40.0, 40.0, 2048) : UniformGrid::square(-20.0, 20.0, 128);
    s.spectrum = [P](const Point& u) { return std::exp(P.at_i(u)); };
    s.analytic = [P](cplx z1, cplx z2) { return std::exp(P.at_i(z1, z2)); };
    s.contour_radius = 0.5;
    s.moment_order = 2;
    return Kernel::from_source(std::move(s));
}

struct HeatComparison {
    double t = 0.0, y = 0.0;
    double discrepancy = 0.0;  // max over grid and components
    std::vector<CVec> evolved, regularized;
};

// U(x, t) against M(x, y) with the induced kernel at y = t^{1/d}.
inline HeatComparison heat_as_regularization(const Signal& f, double t, const HeatSymbol& P, const UniformGrid& grid) {
    const Kernel phi = induced_kernel(P);
    if (!is_nondegenerate(phi)) throw DegenerateKernel("induced kernel is degenerate");
    HeatComparison r;
    r.t = t;
    r.y = std::pow(t, 1.0 / P.degree);
    r.evolved = heat_evolve(f, t, P, grid);
    const ScaleField field = regularize(f, phi, grid, ScaleLadder(r.y, 2.0 * r.y, 2));
    r.regularized = field.values[0];
    for (std::size_t c = 0; c < r.evolved.size(); ++c)
        for (std::size_t i = 0; i < grid.size(); ++i)
            r.discrepancy = std::max(r.discrepancy, std::abs(r.evolved[c][i] - r.regularized[c][i]));
    return r;
}

// ---- Laplace transforms over the cone [0, inf) ----

inline constexpr double kLaplaceAgreement = 1e-6;

// Heaviside samples on a centred grid, with the mean value 1/2 at the jump.
inline Signal heaviside_signal(const UniformGrid& grid) {
    return sampled_signal(
        grid, [](const Point& u) { return cplx(u[0] > 0.0 ? 1.0 : u[0] == 0.0 ? 0.5 : 0.0); }, true);
}

inline void check_cone_support(const Signal& h) {
    if (h.dimension() != 1) throw InvalidArgument("Laplace transforms are implemented on the 1D cone");
    if (!h.poly().empty() || !h.waves().empty())
        throw SupportViolation("polynomial and exponential parts are not supported in [0, inf)");
    for (const auto& d : h.diracs())
        if (d.location[0] < 0.0)
            throw SupportViolation("Dirac term at " + std::to_string(d.location[0]) + " lies outside [0, inf)");
    if (h.smooth()) {
        const auto& sp = *h.smooth();
        double peak = 0.0, outside = 0.0;
        for (const auto& comp : sp.components)
            for (std::size_t i = 0; i < comp.size(); ++i) {
                peak = std::max(peak, std::abs(comp[i]));
                if (sp.grid.point(i)[0] < 0.0) outside = std::max(outside, std::abs(comp[i]));
            }
        if (outside > 1e-12 * peak)
            throw SupportViolation("smooth part has mass " + std::to_string(outside) + " on u < 0");
    }
}

// <h(u), e^{izu}> for z = x + i sigma; trapezoid rule for the smooth part.
inline CVec laplace_direct(const Signal& h, cplx z) {
    check_cone_support(h);
    if (!(z.imag() > 0.0)) throw InvalidArgument("sigma must be positive");
    const cplx iz = cplx(0.0, 1.0) * z;
    CVec out(h.components(), 0.0);
    for (const auto& d : h.diracs()) {
        // <delta^(m)_{u0}, g> = (-1)^m g^(m)(u0)
        const cplx v = std::pow(-iz, d.order.a) * std::exp(iz * d.location[0]);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += d.weight[c] * v;
    }
    if (h.smooth()) {
        const auto& sp = *h.smooth();
        for (std::size_t c = 0; c < out.size(); ++c) {
            CVec prod(sp.grid.size());
            for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = sp.components[c][i] * std::exp(iz * sp.grid.point(i)[0]);
            out[c] += quadrature(prod, sp.grid, {.waive = true});
        }
    }
    return out;
}

// M_phi^f(x, sigma) with the exp-cone kernel and f^ = 2 pi h.
inline CVec laplace_via_regularization(const Signal& h, double x, double sigma) {
    check_cone_support(h);
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    const std::size_t m = h.components();
    Signal f(1, m);
    for (const auto& d : h.diracs()) {
        // inverse transform of 2 pi delta^(m)_{u0} is (-ix)^m e^{i u0 x}
        if (d.location[0] == 0.0) {
            CVec coeff(m);
            const cplx s = std::pow(cplx(0.0, -1.0), d.order.a);
            for (std::size_t c = 0; c < m; ++c) coeff[c] = s * d.weight[c];
            f.add_poly({{d.order.a, 0}, coeff});
        } else if (d.order.a == 0) {
            f.add_wave({{d.location[0], 0.0}, d.weight});
        } else {
            throw InvalidArgument("derivatives of shifted Dirac terms have no symbolic inverse transform here");
        }
    }
    UniformGrid g;
    if (h.smooth()) {
        const Axis& ua = h.smooth()->grid.axis(0);
        const std::size_t n = ua.count;
        if (std::abs(ua.origin + static_cast<double>(n / 2) * ua.spacing) > 1e-9 * ua.spacing)
            throw InvalidArgument("smooth part must be sampled on a centred frequency grid");
        const double dx = kTwoPi / (static_cast<double>(n) * ua.spacing);
        g = UniformGrid({Axis{x - static_cast<double>(n / 2) * dx, dx, n}});
        std::vector<CVec> comps;
        for (const auto& hc : h.smooth()->components) {
            CVec spec(hc.size());
            for (std::size_t j = 0; j < hc.size(); ++j) spec[j] = kTwoPi * hc[j];
            comps.push_back(inverse_spectrum(spec, g));
        }
        f.add_smooth(g, std::move(comps), true);
    } else {
        const double dx = 0.5 * std::min(1.0, sigma);
        g = UniformGrid({Axis{x - 32.0 * dx, dx, 64}});
    }
    const ScaleField field = regularize(f, catalog("exp-cone"), g, ScaleLadder(sigma, 2.0 * sigma, 2));
    const std::size_t centre = g.axis(0).count / 2;
    CVec out(m);
    for (std::size_t c = 0; c < m; ++c) out[c] = field.values[0][c][centre];
    return out;
}

struct LaplaceReport {
    cplx z;
    CVec direct, regularized;
    double discrepancy = 0.0;
    bool agree = false;
};

inline LaplaceReport laplace_transform_cone(const Signal& h, double x, double sigma) {
    LaplaceReport r;
    r.z = {x, sigma};
    r.direct = laplace_direct(h, r.z);
    r.regularized = laplace_via_regularization(h, x, sigma);
    double scale = 1.0;
    for (std::size_t c = 0; c < r.direct.size(); ++c) {
        r.discrepancy = std::max(r.discrepancy, std::abs(r.direct[c] - r.regularized[c]));
        scale = std::max(scale, std::abs(r.direct[c]));
    }
    r.agree = r.discrepancy <= kLaplaceAgreement * scale;
    return r;
}

// Largest |dF/dsigma - i dF/dx| over a rectangle of z = x + i sigma, central differences.
inline double cauchy_riemann_residual(const Signal& h, double x_lo, double x_hi, double s_lo, double s_hi,
                                      int n = 5, double step = 1e-4) {
    std::vector<double> res(static_cast<std::size_t>(n * n));
    parallel_for(res.size(), [&](std::size_t k) {
        const double x = x_lo + (x_hi - x_lo) * static_cast<double>(k % n) / (n - 1);
        const double s = s_lo + (s_hi - s_lo) * static_cast<double>(k / n) / (n - 1);
        auto F = [&](double a, double b) { return laplace_direct(h, {a, b}); };
        const CVec fxp = F(x + step, s), fxm = F(x - step, s), fsp = F(x, s + step), fsm = F(x, s - step);
        double r = 0.0;
        for (std::size_t c = 0; c < fxp.size(); ++c) {
            const cplx dx = (fxp[c] - fxm[c]) / (2.0 * step), ds = (fsp[c] - fsm[c]) / (2.0 * step);
            r = std::max(r, std::abs(ds - cplx(0.0, 1.0) * dx));
        }
        res[k] = r;
    });
    return *std::max_element(res.begin(), res.end());
}

}  // namespace tsl
