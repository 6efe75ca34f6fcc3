#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tsl/catalog.hpp"
#include "tsl/synthesis.hpp"

using namespace tsl;

namespace {

Kernel scaled(const Kernel& k, cplx a) {
    KernelSource s = k.source();
    s.name = k.name() + "-scaled";
    const auto f = spectrum_sampler(k);
    s.spectrum = [f, a](const Point& u) { return a * f(u); };
    s.analytic = nullptr;
    s.derivative = nullptr;
    s.moment_order = 2;
    return Kernel::from_source(std::move(s));
}

Kernel band(double lo, double hi) {
    KernelSource s;
    s.name = "band";
    s.grid = UniformGrid::line(-512.0, 512.0, 8192);
    s.spectrum = [lo, hi](const Point& u) {
        const double t = (std::abs(u[0]) - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
        return cplx(std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0);
    };
    s.moment_order = 0;
    return Kernel::from_source(std::move(s));
}

double max_outside(const Kernel& eta, const Annulus& a) {
    double m = 0.0;
    for (std::size_t j = 0; j < eta.grid().size(); ++j) {
        const Point u = eta.grid().freq_point(j);
        const double r = std::hypot(u[0], u[1]);
        if (r < a.inner || r > a.outer) m = std::max(m, std::abs(eta.spectral()[j]));
    }
    return m;
}

}  // namespace

TEST(Calibration, MexicanHatIsPi) {
    const Kernel m = catalog("mexican-hat");
    const Calibration c = calibration_constant(m, m);
    EXPECT_NEAR(c.value.real(), kPi, 1e-8);
    EXPECT_NEAR(c.value.imag(), 0.0, 1e-12);
    EXPECT_LE(c.anisotropy, 1e-12);
}

TEST(Calibration, Psi1AgainstBesselAndQuadrature) {
    const Kernel p = catalog("psi1");
    const double bessel = 2.0 * std::cyl_bessel_k(0.0, 4.0);
    const double quad = oracle::log_integral([](double r) { return std::exp(-2.0 * r - 2.0 / r); });
    EXPECT_NEAR(quad, bessel, 1e-10);
    EXPECT_NEAR(calibration_constant(p, p).value.real(), bessel, 1e-6);
}

TEST(Calibration, DisjointBandsAreZero) { EXPECT_THROW(calibration_constant(band(0.5, 1.0), band(2.0, 3.0)), ZeroCalibration); }

TEST(Calibration, ConjugateLinearInFirstLinearInSecond) {
    const Kernel m = catalog("mexican-hat"), p = catalog("psi1");
    const cplx base = calibration_constant(m, p).value;
    for (const auto& [a, b] : {std::pair<cplx, cplx>{cplx(2.0, 1.0), cplx(0.5, -3.0)}, {cplx(-1.0, 0.25), cplx(0.0, 1.0)}}) {
        const cplx c = calibration_constant(scaled(m, a), scaled(p, b)).value;
        EXPECT_LE(std::abs(c - std::conj(a) * b * base), 1e-10 * std::abs(base));
    }
}

TEST(Calibration, IsotropicIn2D) {
    const Kernel s = catalog("s0-bump", {.dim = 2});
    const Calibration c = calibration_constant(s, s);
    const double oracle = oracle::simpson(
        [](double r) {
            const double t = r - 2.0;
            // the bump is normalized to 1 at its centre
            return std::abs(t) < 1.0 ? std::exp(2.0 - 2.0 / (1.0 - t * t)) / r : 0.0;
        },
        1.0, 3.0);
    EXPECT_LE(c.anisotropy, 1e-3);
    EXPECT_NEAR(c.value.real(), oracle, 1e-3 * oracle);
}

TEST(ReconstructionWavelet, CalibratesToOneInsideTheAnnulus) {
    struct Case {
        Kernel phi;
        Annulus a;
    };
    const std::vector<Case> cases{{catalog("gaussian-heat"), {0.5, 1.5}},
                                  {catalog("annular-exp", {.tau0 = 0.5}), {0.6, 1.2}},
                                  {catalog("mexican-hat"), {0.5, 2.0}},
                                  {catalog("psi1"), {0.5, 2.0}},
                                  {catalog("s0-bump"), {1.5, 2.5}},
                                  {catalog("exp-cone"), {0.5, 1.5}}};
    for (const auto& c : cases) {
        const Kernel eta = reconstruction_wavelet(c.phi, c.a);
        const Calibration cal = calibration_constant(c.phi, eta);
        EXPECT_NEAR(cal.value.real(), 1.0, 1e-6) << c.phi.name();
        EXPECT_NEAR(cal.value.imag(), 0.0, 1e-6) << c.phi.name();
        EXPECT_LE(max_outside(eta, c.a), 1e-10) << c.phi.name();
    }
}

TEST(ReconstructionWavelet, TwoDimensional) {
    const Kernel g = catalog("gaussian-heat", {.dim = 2});
    const Kernel eta = reconstruction_wavelet(g, Annulus{0.5, 1.5});
    const Calibration cal = calibration_constant(g, eta);
    EXPECT_NEAR(cal.value.real(), 1.0, 1e-6);
    EXPECT_LE(cal.anisotropy, 1e-6);
}

TEST(ReconstructionWavelet, Failures) {
    EXPECT_THROW(reconstruction_wavelet(catalog("s0-bump"), Annulus{4.0, 5.0}), DivisionUnderflow);
    EXPECT_THROW(reconstruction_wavelet(catalog("gaussian-heat"), Annulus{1.0, 0.5}), InvalidArgument);
    const Kernel vanishing_ray = Kernel::from_source({.name = "u1",
                                                      .grid = UniformGrid::square(-16, 16, 64),
                                                      .spectrum = [](const Point& u) {
                                                          return cplx(u[0] * std::exp(-(u[0] * u[0] + u[1] * u[1])));
                                                      },
                                                      .moment_order = 0});
    EXPECT_THROW(reconstruction_wavelet(vanishing_ray, Annulus{0.5, 1.5}), DegenerateKernel);
}

TEST(Synthesize, ZeroFieldGivesZero) {
    const UniformGrid g = UniformGrid::line(-40, 40, 2048);
    ScaleField f;
    f.grid = g;
    f.ladder = ScaleLadder(0.1, 10.0, 9);
    f.values.assign(9, {CVec(g.size(), 0.0)});
    const auto out = synthesize(f, catalog("mexican-hat"));
    for (const auto& v : out[0]) EXPECT_EQ(v, cplx(0.0));
}

TEST(Synthesize, SingleSliceIsOneConvolution) {
    const UniformGrid g = UniformGrid::line(-40, 40, 2048);
    ScaleField f;
    f.grid = g;
    f.ladder = ScaleLadder(0.1, 10.0, 9);
    f.values.assign(9, {CVec(g.size(), 0.0)});
    const std::size_t j = 4;
    for (std::size_t i = 0; i < g.size(); ++i) f.values[j][0][i] = std::exp(-std::pow(g.point(i)[0], 2));
    const auto out = synthesize(f, catalog("gaussian-heat"))[0];
    const double y = f.ladder[j], w = f.ladder.weights()[j];
    for (std::size_t i = 0; i < g.size(); i += 17) {
        const double x = g.point(i)[0];
        // e^{-t^2} against the heat kernel of variance 2 y^2, by quadrature
        const double direct = oracle::simpson(
            [&](double t) { return std::exp(-t * t) * std::exp(-std::pow((x - t) / y, 2) / 4.0) / (2.0 * std::sqrt(kPi) * y); },
            x - 40.0, x + 40.0);
        EXPECT_NEAR(out[i].real(), w * direct, 1e-10);
    }
}

TEST(Synthesize, RefusesTruncatedLadder) {
    const UniformGrid g = UniformGrid::line(-512, 512, 8192);
    const ScaleField w = wavelet_transform(kernel_signal(catalog("s0-bump"), g), catalog("mexican-hat"), g,
                                           ScaleLadder::per_decade(0.2, 2.0, 16));
    EXPECT_THROW(synthesize(w, catalog("mexican-hat")), LadderTruncationError);
}

TEST(Reconstruct, S0BumpWithMexicanHat) {
    const UniformGrid g = UniformGrid::line(-512, 512, 8192);
    const Kernel m = catalog("mexican-hat");
    const Signal f = kernel_signal(catalog("s0-bump"), g);
    // f^ lives on [1, 3]; the grid's resolution floor (~0.08) clips the bottom slice at about 5e-2
    const auto rep = reconstruct(f, m, m, g, ScaleLadder::per_decade(min_resolved_scale(g), 60.0, 32), 5e-2);
    EXPECT_NEAR(rep.calibration.real(), kPi, 1e-8);
    EXPECT_LE(rep.relative_error, 1e-3);
}

TEST(Reconstruct, PureWaveOverWideLadder) {
    // two periods of e^{ix}, sampled finely enough that the bottom slice is below 1e-6 of the peak
    const UniformGrid g = UniformGrid::line(-2.0 * kPi, 2.0 * kPi, 16384);
    const Kernel m = catalog("mexican-hat");
    const auto rep = reconstruct(wave_signal(1.0), m, m, g, ScaleLadder::per_decade(min_resolved_scale(g), 1e3, 16));
    EXPECT_LE(rep.bottom_ratio, 1e-6);
    EXPECT_LE(rep.relative_error, 1e-3);
}

TEST(Reconstruct, PolynomialPartIsExcludedAndReported) {
    const UniformGrid g = UniformGrid::line(-2.0 * kPi, 2.0 * kPi, 16384);
    const Kernel m = catalog("mexican-hat");
    const auto rep = reconstruct(wave_signal(1.0) + poly_signal({1.0, 2.0}), m, m, g,
                                 ScaleLadder::per_decade(min_resolved_scale(g), 1e3, 16));
    EXPECT_TRUE(rep.poly_excluded);
    EXPECT_LE(rep.relative_error, 1e-3);
}

TEST(Reconstruct, ErrorShrinksWithLadderDensity) {
    const UniformGrid g = UniformGrid::line(-512, 512, 8192);
    const Kernel m = catalog("mexican-hat");
    const Signal f = kernel_signal(catalog("s0-bump", {.center = 1.2, .width = 1.0}), g);
    double prev = INFINITY;
    for (double density : {4.0, 8.0, 16.0}) {
        const double e = reconstruct(f, m, m, g, ScaleLadder::per_decade(0.08, 60.0, density), 5e-2).relative_error;
        EXPECT_LE(e, 1.1 * prev) << density;
        prev = e;
    }
}

TEST(Desingularize, Examples) {
    const UniformGrid g = UniformGrid::line(-512, 512, 8192);
    const Kernel psi = catalog("mexican-hat");
    const Kernel eta = reconstruction_wavelet(psi, Annulus{0.25, 4.0});
    const Kernel rho = catalog("s0-bump");  // spectrum on [1, 3]
    const ScaleLadder ladder = ScaleLadder::per_decade(0.99 * 0.25 / 3.0, 1.01 * 4.0, 32);

    const cplx at0 = desingularize_pairing(dirac_signal(0.0), rho, psi, eta, g, ladder)[0];
    EXPECT_LE(std::abs(at0 - rho.derivative_at({0.0, 0.0})), 1e-4 * std::abs(rho.derivative_at({0.0, 0.0})));

    const CVec r = rho.sample_on(g);
    CVec sq(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) sq[i] = r[i] * r[i];
    const cplx l2 = quadrature(sq, g, {.waive = true});
    const cplx self = desingularize_pairing(kernel_signal(rho, g), rho, psi, eta, g, ladder)[0];
    EXPECT_LE(std::abs(self - l2), 1e-4 * std::abs(l2));

    EXPECT_LE(std::abs(desingularize_pairing(poly_signal({1.0, -2.0, 0.5}), rho, psi, eta, g, ladder)[0]), 1e-6);
    EXPECT_THROW(desingularize_pairing(dirac_signal(0.0), catalog("gaussian-heat"), psi, eta, g, ladder), InvalidArgument);
}
