#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsl/catalog.hpp"
#include "tsl/kernels.hpp"

using namespace tsl;

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * kPi);

Kernel from_spectrum(const std::string& name, std::function<cplx(const Point&)> spec, int moment_order = 0,
                     UniformGrid g = UniformGrid::line(-40.0, 40.0, 2048)) {
    KernelSource s;
    s.name = name;
    s.grid = g;
    s.spectrum = std::move(spec);
    s.moment_order = moment_order;
    return Kernel::from_source(std::move(s));
}

}  // namespace

TEST(Moments, GaussianAgainstQuadratureOracle) {
    const Kernel k = catalog("gaussian-heat");
    const double mu2 = 2.0 * oracle::simpson([](double t) { return t * t * std::exp(-t * t / 4.0) / (2.0 * std::sqrt(kPi)); }, 0, 60);
    EXPECT_NEAR(k.moment({0, 0}).real(), 1.0, 1e-10);
    EXPECT_NEAR(k.moment({2, 0}).real(), mu2, 1e-8);
    EXPECT_NEAR(mu2, 2.0, 1e-10);
}

TEST(Moments, MexicanHat) {
    const Kernel k = catalog("mexican-hat");
    const double mu2 = 2.0 * oracle::simpson([](double t) { return t * t * (1 - t * t) * std::exp(-t * t / 2.0); }, 0, 60);
    EXPECT_NEAR(std::abs(k.moment({0, 0})), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(k.moment({1, 0})), 0.0, 1e-10);
    EXPECT_NEAR(k.moment({2, 0}).real(), mu2, 1e-8);
    EXPECT_NEAR(mu2, -2.0 * kSqrt2Pi, 1e-9);
}

TEST(Moments, CapIsEnforced) { EXPECT_THROW(moments(catalog("gaussian-heat"), 11), InvalidArgument); }

TEST(Moments, CatalogRoutesAgree) {
    // construction caches moments only when quadrature and spectral differentiation agree to 1e-6
    for (const auto* name : {"gaussian-heat", "mexican-hat", "psi1", "annular-exp", "s0-bump", "exp-cone"})
        EXPECT_NO_THROW(catalog(name)) << name;
    EXPECT_NO_THROW(catalog("gaussian-heat", {.dim = 2}));
}

TEST(Taylor, GaussianAndMexicanHat) {
    const auto g = taylor_terms(catalog("gaussian-heat"), 2);
    EXPECT_NEAR(g[0]({0.3, 0}).real(), 1.0, 1e-10);
    EXPECT_NEAR(std::abs(g[1]({0.7, 0})), 0.0, 1e-9);
    EXPECT_NEAR(g[2]({0.5, 0}).real(), -0.25, 1e-8);
    const auto m = taylor_terms(catalog("mexican-hat"), 2);
    EXPECT_NEAR(std::abs(m[0]({1, 0})), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(m[1]({1, 0})), 0.0, 1e-9);
    EXPECT_NEAR(m[2]({2.0, 0}).real(), 4.0 * kSqrt2Pi, 1e-7);
    const Kernel psi1 = catalog("psi1");
    EXPECT_NEAR(std::abs(taylor_terms(psi1, 0)[0]({1, 0}) - psi1.moment({0, 0})), 0.0, 1e-14);
}

TEST(Nondegeneracy, Catalog) {
    EXPECT_TRUE(is_nondegenerate(catalog("gaussian-heat")));
    EXPECT_TRUE(is_nondegenerate(catalog("annular-exp")));
    const Kernel vanishing_ray = from_spectrum(
        "u1-gauss", [](const Point& u) { return cplx(u[0] * std::exp(-(u[0] * u[0] + u[1] * u[1]))); }, 0,
        UniformGrid::square(-16, 16, 64));
    EXPECT_FALSE(is_nondegenerate(vanishing_ray));
    EXPECT_THROW(nondegeneracy_index(vanishing_ray), DegenerateKernel);
}

TEST(Nondegeneracy, IndexValues) {
    EXPECT_EQ(nondegeneracy_index(catalog("gaussian-heat")).tau, 0.0);
    const Kernel a = catalog("annular-exp", {.tau0 = 0.5});
    const auto idx = nondegeneracy_index(a);
    EXPECT_NEAR(idx.tau, 0.5, a.grid().min_freq_spacing());
    const Kernel one_sided = from_spectrum(
        "one-sided",
        [](const Point& u) {
            const double t = (u[0] - 1.5) / 0.5;
            return cplx(std::abs(t) < 1 ? std::exp(-1.0 / (1 - t * t)) : 0.0);
        },
        0, UniformGrid::line(-512.0, 512.0, 16384));
    EXPECT_THROW(nondegeneracy_index(one_sided), DegenerateKernel);
}

TEST(StrongNondegeneracy, CatalogValues) {
    const auto g = strong_nondegeneracy(catalog("gaussian-heat"));
    ASSERT_TRUE(g);
    EXPECT_EQ(g->order, 0);
    EXPECT_NEAR(g->radius, 1.0, 1e-12);
    EXPECT_NEAR(g->constant, std::exp(-1.0), 1e-3);
    const auto m = strong_nondegeneracy(catalog("mexican-hat"));
    ASSERT_TRUE(m);
    EXPECT_EQ(m->order, 2);
    EXPECT_NEAR(m->radius, 1.0, 1e-12);
    EXPECT_NEAR(m->constant, kSqrt2Pi * std::exp(-0.5), 1e-3);
    EXPECT_FALSE(strong_nondegeneracy(catalog("psi1")));
}

TEST(StrongNondegeneracy, BoundHoldsOnBall) {
    for (const auto* name : {"gaussian-heat", "mexican-hat"}) {
        const Kernel k = catalog(name);
        const auto b = strong_nondegeneracy(k);
        ASSERT_TRUE(b);
        for (int i = 1; i <= 400; ++i) {
            const double r = b->radius * i / 400.0;
            for (double s : {-1.0, 1.0})
                EXPECT_LE(b->constant * std::pow(r, b->order), std::abs(k.spectrum_at({s * r, 0})) * (1 + 1e-9)) << name << " r=" << r;
        }
    }
}

TEST(StrongNondegeneracy, ImpliesNondegenerateOnRandomSpectra) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 0.5 + u(rng), b = 2.0 * u(rng), c = u(rng);
        const int n = static_cast<int>(std::floor(3 * u(rng)));
        const Kernel k = from_spectrum("random", [=](const Point& v) {
            const double x = v[0];
            return cplx(std::pow(x, 2 * n) * (std::exp(-a * x * x) + c * std::exp(-(x - b) * (x - b))));
        });
        if (strong_nondegeneracy(k, 12, {1.0, 2.0}, 64)) { EXPECT_TRUE(is_nondegenerate(k)) << trial; }
    }
}

TEST(Nondegeneracy, IndexMonotoneUnderTruncation) {
    const Kernel base = catalog("gaussian-heat");
    const double tau = nondegeneracy_index(base).tau;
    for (double cut : {0.3, 0.8, 1.5}) {
        // smooth cut: e^{-u^2} times a C-infinity step that is zero on |u| <= cut
        const Kernel k = from_spectrum(
            "truncated",
            [cut](const Point& v) {
                const double r = std::abs(v[0]);
                if (r <= cut) return cplx(0.0);
                const double s = r - cut;
                const double step = s >= 0.5 ? 1.0 : std::exp(-1.0 / s) / (std::exp(-1.0 / s) + std::exp(-1.0 / (0.5 - s)));
                return cplx(step * std::exp(-v[0] * v[0]));
            },
            0, UniformGrid::line(-512.0, 512.0, 16384));
        EXPECT_GE(nondegeneracy_index(k).tau, std::max(tau, cut) - k.grid().min_freq_spacing());
        EXPECT_LE(nondegeneracy_index(k).tau, cut + 0.5);
    }
}

TEST(MomentIdeal, ExamplesAndMonotonicity) {
    const Kernel m = catalog("mexican-hat"), g = catalog("gaussian-heat");
    EXPECT_TRUE(is_in_moment_ideal_Pd(m, 2));
    EXPECT_FALSE(is_in_moment_ideal_Pd(m, 3));
    EXPECT_FALSE(is_in_moment_ideal_Pd(g, 1));
    const Kernel s = catalog("s0-bump");
    // this bump's spectrum vanishes near 0, so all its moments vanish; quadrature leaves ~1e-7
    for (int d = 3; d >= 0; --d) EXPECT_TRUE(is_in_moment_ideal_Pd(s, d, 1e-6)) << d;
}

TEST(Catalog, GroundTruthFlags) {
    for (const auto* name : {"gaussian-heat", "mexican-hat", "psi1", "annular-exp", "s0-bump", "exp-cone"}) {
        const Kernel k = catalog(name);
        ASSERT_TRUE(k.truth()) << name;
        const auto rep = analyze_kernel(k);
        EXPECT_EQ(rep.nondegenerate, k.truth()->nondegenerate) << name;
        // closed-form spectra: the support edge is found to one spectral bin
        if (k.truth()->tau) { EXPECT_NEAR(*rep.tau, *k.truth()->tau, rep.tau_uncertainty) << name; }
        if (k.truth()->strong_order) {
            ASSERT_TRUE(rep.strong) << name;
            EXPECT_EQ(rep.strong->order, *k.truth()->strong_order) << name;
        }
    }
    EXPECT_THROW(catalog("no-such-kernel"), UnknownKernel);
    EXPECT_THROW(catalog("psi1", {.dim = 2}), InvalidArgument);
}

TEST(Catalog, SpatialSpectralConsistency) {
    for (const auto* name : {"gaussian-heat", "mexican-hat", "s0-bump"}) {
        const Kernel k = catalog(name);
        const CVec back = forward_spectrum(k.spatial(), k.grid());
        double err = 0.0;
        for (std::size_t j = 0; j < back.size(); ++j) err = std::max(err, std::abs(back[j] - k.spectral()[j]));
        EXPECT_LE(err, 1e-10) << name;
    }
}

TEST(Catalog, GaussianClosedForm) {
    const Kernel k = catalog("gaussian-heat");
    for (double u : {-2.0, -0.5, 0.0, 1.0, 3.0}) EXPECT_NEAR(k.spectrum_at({u, 0}).real(), std::exp(-u * u), 1e-15);
}
