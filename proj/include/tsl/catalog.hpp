#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

struct CatalogParams {
    int dim = 1;
    double tau0 = 0.5;    // annular-exp inner radius
    double center = 2.0;  // s0-bump
    double width = 1.0;   // s0-bump
};

inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {"gaussian-heat", "psi1",     "annular-exp",
                                                   "mexican-hat",   "s0-bump", "exp-cone"};
    return names;
}

// C-infinity step: 0 for s <= 0, 1 for s >= 1.
inline double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

// Bump of unit height supported in (-1, 1).
inline double unit_bump(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

namespace detail {

inline double radius(const Point& u, int dim) { return dim == 1 ? std::abs(u[0]) : std::hypot(u[0], u[1]); }

inline Kernel gaussian_heat(int dim) {
    KernelSource s;
    s.name = "gaussian-heat";
    s.grid = dim == 1 ? UniformGrid::line(-40.0, 40.0, 2048) : UniformGrid::square(-20.0, 20.0, 128);
    s.spectrum = [dim](const Point& u) { return cplx(std::exp(-(u[0] * u[0] + (dim == 2 ? u[1] * u[1] : 0.0)))); };
    s.analytic = [dim](cplx z1, cplx z2) { return std::exp(-z1 * z1 - (dim == 2 ? z2 * z2 : cplx(0.0))); };
    // phi(t) = (2 sqrt(pi))^{-n} e^{-|t|^2/4}
    s.derivative = [dim](const Point& t, const MultiIndex& m) {
        auto axis = [](double x, int k) {
            return std::pow(-1.0 / std::sqrt(2.0), k) * hermite_he(k, x / std::sqrt(2.0)) * std::exp(-x * x / 4.0) /
                   (2.0 * std::sqrt(kPi));
        };
        double v = axis(t[0], m.a);
        if (dim == 2) v *= axis(t[1], m.b);
        return cplx(v);
    };
    s.moment_order = kMomentCap;
    s.truth = KernelTruth{true, 0.0, 0};
    return Kernel::from_source(std::move(s));
}

inline Kernel mexican_hat() {
    KernelSource s;
    s.name = "mexican-hat";
    s.grid = UniformGrid::line(-40.0, 40.0, 2048);
    const double c = std::sqrt(kTwoPi);
    s.spectrum = [c](const Point& u) { return cplx(c * u[0] * u[0] * std::exp(-u[0] * u[0] / 2.0)); };
    s.analytic = [c](cplx z, cplx) { return c * z * z * std::exp(-z * z / 2.0); };
    // psi = -g'' with g = e^{-t^2/2}, g^{(k)} = (-1)^k He_k g
    s.derivative = [](const Point& t, const MultiIndex& m) {
        const double sign = (m.a % 2) ? 1.0 : -1.0;
        return cplx(sign * hermite_he(m.a + 2, t[0]) * std::exp(-t[0] * t[0] / 2.0));
    };
    s.moment_order = kMomentCap;
    s.truth = KernelTruth{true, 0.0, 2};
    return Kernel::from_source(std::move(s));
}

inline Kernel psi1() {
    KernelSource s;
    s.name = "psi1";
    s.grid = UniformGrid::line(-512.0, 512.0, 8192);
    s.spectrum = [](const Point& u) {
        const double r = std::abs(u[0]);
        return cplx(r == 0.0 ? 0.0 : std::exp(-r - 1.0 / r));
    };
    s.moment_order = 3;
    s.fd_step = 0.001;
    s.truth = KernelTruth{true, 0.0, std::nullopt};
    return Kernel::from_source(std::move(s));
}

inline Kernel annular_exp(double tau0) {
    if (!(tau0 > 0.0) || tau0 > 4.0) throw InvalidArgument("annular-exp needs 0 < tau0 <= 4");
    KernelSource s;
    s.name = "annular-exp";
    // The flat edge at tau0 makes phi decay only like exp(-c sqrt|t|), hence the long window.
    // tau is then resolved to du ~ 0.006: see README, section on the support threshold.
    s.grid = UniformGrid::line(-512.0, 512.0, 8192);
    s.spectrum = [tau0](const Point& u) {
        const double r = std::abs(u[0]);
        return cplx(r <= tau0 ? 0.0 : std::exp(-r - 1.0 / (r - tau0)));
    };
    s.moment_order = 1;
    s.fd_step = std::min(0.001, tau0 / 16.0);
    s.truth = KernelTruth{true, tau0, std::nullopt};
    return Kernel::from_source(std::move(s));
}

inline Kernel s0_bump(double center, double width, int dim) {
    if (!(width > 0.0) || !(center - width > 0.0) || center + width > 20.0)
        throw InvalidArgument("s0-bump needs 0 < width < center and center + width <= 20");
    KernelSource s;
    s.name = "s0-bump";
    s.grid = dim == 1 ? UniformGrid::line(-512.0, 512.0, 8192) : UniformGrid::square(-256.0, 256.0, 1024);
    s.spectrum = [center, width, dim](const Point& u) {
        return cplx(unit_bump((radius(u, dim) - center) / width));
    };
    // narrow bands decay slowly in space, which limits how many moments the window resolves
    s.moment_order = dim == 2 ? 0 : width >= 1.0 ? 2 : width >= 0.5 ? 1 : 0;
    s.fd_step = std::min(0.001, (center - width) / 16.0);
    s.truth = KernelTruth{true, center - width, std::nullopt};
    return Kernel::from_source(std::move(s));
}

// e^{-u} on the cone u >= 0, continued smoothly to zero below u = -5/2.
inline Kernel exp_cone() {
    KernelSource s;
    s.name = "exp-cone";
    s.grid = UniformGrid::line(-256.0, 256.0, 8192);
    s.spectrum = [](const Point& u) {
        const double step = smooth_step((u[0] + 2.5) / 2.0);
        return cplx(step == 0.0 ? 0.0 : std::exp(-u[0]) * step);
    };
    s.analytic = [](cplx z, cplx) { return std::exp(-z); };  // valid on |z| < 1/2
    s.contour_radius = 0.25;
    s.moment_order = 3;
    s.truth = KernelTruth{true, 0.0, 0};
    return Kernel::from_source(std::move(s));
}

}  // namespace detail

inline Kernel catalog(const std::string& name, const CatalogParams& p = {}) {
    if (p.dim != 1 && p.dim != 2) throw InvalidArgument("dimension must be 1 or 2");
    const bool one_d_only = name != "gaussian-heat" && name != "s0-bump";
    if (p.dim == 2 && one_d_only) throw InvalidArgument(name + " is only catalogued in 1D");
    if (name == "gaussian-heat") return detail::gaussian_heat(p.dim);
    if (name == "mexican-hat") return detail::mexican_hat();
    if (name == "psi1") return detail::psi1();
    if (name == "annular-exp") return detail::annular_exp(p.tau0);
    if (name == "s0-bump") return detail::s0_bump(p.center, p.width, p.dim);
    if (name == "exp-cone") return detail::exp_cone();
    throw UnknownKernel("no catalog entry named '" + name + "'");
}

}  // namespace tsl
