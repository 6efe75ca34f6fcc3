#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsl/catalog.hpp"
#include "tsl/signals.hpp"

using namespace tsl;

namespace {

const UniformGrid kLine = UniformGrid::line(-40.0, 40.0, 2048);

double gauss(double t) { return std::exp(-t * t / 4.0) / (2.0 * std::sqrt(kPi)); }

TestFunction combine(cplx a, const TestFunction& r, cplx b, const TestFunction& s) {
    TestFunction t;
    t.dim = r.dim;
    t.derivative = [=](const Point& x, const MultiIndex& m) { return a * r.derivative(x, m) + b * s.derivative(x, m); };
    t.spectrum = [=](const Point& u) { return a * r.spectrum(u) + b * s.spectrum(u); };
    t.moment = [=](const MultiIndex& m) { return a * r.moment(m) + b * s.moment(m); };
    t.samples = [=](const UniformGrid& g) {
        CVec x = r.samples(g), y = s.samples(g);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * x[i] + b * y[i];
        return x;
    };
    return t;
}

Signal mixed_signal(double shift) {
    Signal f = gaussian_bump_signal(kLine, shift, 1.5) + cosine_signal(0.8, 0.5) + wave_signal(-1.3, cplx(0.2, 0.1));
    return f;
}

}  // namespace

TEST(Pair, DiracSifts) {
    EXPECT_NEAR(pair(dirac_signal(0.0), catalog("gaussian-heat"))[0].real(), gauss(0.0), 1e-14);
    // <delta', rho> = -rho'(x0)
    const double x0 = 0.8, d = -x0 / 2.0 * gauss(x0);
    EXPECT_NEAR(pair(dirac_signal(x0, 1), catalog("gaussian-heat"))[0].real(), -d, 1e-13);
}

TEST(Pair, PolynomialMoments) {
    const Kernel g = catalog("gaussian-heat");
    EXPECT_NEAR(pair(poly_signal({0, 0, 1}), g)[0].real(), 2.0, 1e-10);
    // t^4 moment of the heat Gaussian is 12; oracle is direct quadrature
    const double mu4 = 2.0 * oracle::simpson([](double t) { return std::pow(t, 4) * gauss(t); }, 0, 80);
    EXPECT_NEAR(pair(poly_signal({1, 0, 0, 0, 1}), g)[0].real(), 1.0 + mu4, 1e-8);
}

TEST(Pair, WaveAgainstQuadrature) {
    const cplx v = pair(wave_signal(1.0), catalog("gaussian-heat"))[0];
    const double re = 2.0 * oracle::simpson([](double t) { return std::cos(t) * gauss(t); }, 0, 80);
    EXPECT_NEAR(v.real(), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(v.real(), re, 1e-10);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
}

TEST(Pair, SmoothPartQuadrature) {
    const Signal f = gaussian_bump_signal(kLine, 0.5, 1.0);
    // int e^{-(t-1/2)^2} e^{-t^2/4}/(2 sqrt pi) dt, closed form
    const double a = 1.25, b = 1.0, c = 0.25;
    const double exact = std::sqrt(kPi / a) * std::exp(b * b / (4 * a) - c) / (2.0 * std::sqrt(kPi));
    EXPECT_NEAR(pair(f, catalog("gaussian-heat"))[0].real(), exact, 1e-12);
}

TEST(Pair, VectorValuedComponents) {
    Signal f(1, 2);
    f.add_dirac({{0.0, 0.0}, {0, 0}, {1.0, -2.0}});
    f.add_poly({{2, 0}, {0.0, 1.0}});
    const CVec v = pair(f, catalog("gaussian-heat"));
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NEAR(v[0].real(), gauss(0.0), 1e-14);
    EXPECT_NEAR(v[1].real(), -2.0 * gauss(0.0) + 2.0, 1e-10);
    EXPECT_THROW(f.add_dirac({{0.0, 0.0}, {0, 0}, {1.0}}), InvalidArgument);
}

TEST(Pair, RejectsDimensionMismatchAndBadTerms) {
    EXPECT_THROW(pair(dirac_signal(0.0), catalog("gaussian-heat", {.dim = 2})), InvalidArgument);
    EXPECT_THROW(dirac_signal(0.0, 7), InvalidArgument);
    Signal f(1, 1);
    EXPECT_THROW(f.add_poly({{9, 0}, {1.0}}), InvalidArgument);
    EXPECT_THROW(f.add_smooth(kLine, {CVec(kLine.size(), 1.0)}), EdgeMassError);
}

TEST(Pair, BilinearInBothArguments) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01;
    const TestFunction r = as_test_function(catalog("gaussian-heat"));
    const TestFunction s = as_test_function(catalog("mexican-hat"));
    const Signal f = mixed_signal(0.0) + dirac_signal(0.4, 2) + poly_signal({1, -1, 0.5});
    const Signal g = gaussian_bump_signal(kLine, -1.0, 0.7) + dirac_signal(-0.2) + wave_signal(0.3);
    for (int trial = 0; trial < 20; ++trial) {
        const cplx a(n01(rng), n01(rng)), b(n01(rng), n01(rng));
        const cplx lhs1 = pair(f.scaled(a) + g.scaled(b), r)[0];
        const cplx rhs1 = a * pair(f, r)[0] + b * pair(g, r)[0];
        EXPECT_LE(std::abs(lhs1 - rhs1), 1e-12 * (1 + std::abs(rhs1)));
        const cplx lhs2 = pair(f, combine(a, r, b, s))[0];
        const cplx rhs2 = a * pair(f, r)[0] + b * pair(f, s)[0];
        EXPECT_LE(std::abs(lhs2 - rhs2), 1e-12 * (1 + std::abs(rhs2)));
    }
}

TEST(Pair, IntertwinesTranslations) {
    const Signal f = mixed_signal(0.3);
    for (const auto* name : {"gaussian-heat", "mexican-hat"}) {
        const TestFunction rho = as_test_function(catalog(name));
        for (double h : {-1.7, 0.25, 2.0}) {
            const cplx lhs = pair(f.translated({h, 0.0}), rho)[0];
            const cplx rhs = pair(f, translated(rho, {-h, 0.0}))[0];
            EXPECT_LE(std::abs(lhs - rhs), 1e-8) << name << " h=" << h;
        }
    }
}

TEST(Norm, Examples) {
    const Signal c = sampled_signal(kLine, [](const Point& x) { return cplx(std::cos(x[0])); }, true);
    EXPECT_NEAR(norm(c.smooth()->components, kLine, NormSpec::lp(INFINITY)), 1.0, 1e-15);
    EXPECT_NEAR(norm(c.smooth()->components, kLine, NormSpec::cb()), 1.0, 1e-15);

    const Signal g = kernel_signal(catalog("gaussian-heat"), kLine);
    EXPECT_NEAR(norm(g.smooth()->components, kLine, NormSpec::lp(1)), 1.0, 1e-12);
    // ||g||_2^2 = int e^{-x^2/2} / (4 pi) = 1 / (2 sqrt(2 pi))
    EXPECT_NEAR(norm(g.smooth()->components, kLine, NormSpec::lp(2)), std::sqrt(1.0 / (2.0 * std::sqrt(2.0 * kPi))), 1e-12);

    CVec x(kLine.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = kLine.point(i)[0];
    EXPECT_NEAR(norm(x, kLine, NormSpec::weighted_sup(1)), 40.0 / 41.0, 1e-15);
    EXPECT_THROW(norm(x, kLine, NormSpec::lp(0.5)), InvalidArgument);
    EXPECT_THROW(norm(x, kLine, NormSpec::weighted_sup(-1)), InvalidArgument);
}

TEST(Norm, ComponentNorms) {
    const std::vector<CVec> v{{cplx(3.0)}, {cplx(0.0, -4.0)}};
    EXPECT_DOUBLE_EQ(component_norm(v, 0, ComponentNorm::L1), 7.0);
    EXPECT_DOUBLE_EQ(component_norm(v, 0, ComponentNorm::L2), 5.0);
    EXPECT_DOUBLE_EQ(component_norm(v, 0, ComponentNorm::Linf), 4.0);
}

TEST(Signal, TranslationOfSymbolicParts) {
    // (x - h)^2 at x = 1.5 with h = 0.5
    const Signal p = poly_signal({0, 0, 1}).translated({0.5, 0.0});
    EXPECT_NEAR(p.symbolic_value({1.5, 0.0})[0].real(), 1.0, 1e-14);
    const Signal d = dirac_signal(0.2).translated({0.3, 0.0});
    EXPECT_NEAR(d.diracs()[0].location[0], 0.5, 1e-15);
    const Signal w = wave_signal(2.0).translated({0.25, 0.0});
    EXPECT_NEAR(std::arg(w.symbolic_value({0.25, 0.0})[0]), 0.0, 1e-14);
}
