#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tsl/catalog.hpp"
#include "tsl/fourier.hpp"
#include "tsl/io.hpp"

using namespace tsl;

namespace {

double gauss(double t) { return std::exp(-t * t / 4.0) / (2.0 * std::sqrt(kPi)); }

CVec sample(const UniformGrid& g, const std::function<double(double)>& f) {
    CVec v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.point(i)[0]);
    return v;
}

}  // namespace

TEST(Grid, DualSpacingClosesToTwoPi) {
    for (auto g : {UniformGrid::line(-40, 40, 2048), UniformGrid::line(-3, 7, 64)}) {
        const auto& a = g.axis(0);
        EXPECT_NEAR(a.freq_spacing() * a.spacing * static_cast<double>(a.count), kTwoPi, 1e-12);
        EXPECT_DOUBLE_EQ(g.freq_point(a.count / 2)[0], 0.0);
    }
}

TEST(Grid, RejectsBadShapes) {
    EXPECT_THROW(UniformGrid({Axis{0, 1, 12}}), GridError);
    EXPECT_THROW(UniformGrid({Axis{0, 1, 4}}), GridError);
    EXPECT_THROW(UniformGrid({Axis{0, 0.0, 16}}), GridError);
    EXPECT_THROW(UniformGrid({Axis{0, 1, 1024}, Axis{0, 1, 1024}}, 1000), GridError);
}

TEST(Ladder, GeometricWithLogWeights) {
    const ScaleLadder l(1e-3, 1e3, 61);
    double sum = 0.0;
    for (double w : l.weights()) sum += w;
    EXPECT_NEAR(sum, std::log(1e6), 1e-12);
    for (std::size_t j = 1; j + 1 < l.size(); ++j) EXPECT_NEAR(l[j + 1] / l[j], l[j] / l[j - 1], 1e-12);
    EXPECT_NEAR(std::log(l[1] / l[0]), l.log_step(), 1e-14);
    EXPECT_THROW(ScaleLadder(1.0, 0.5, 10), InvalidArgument);
}

TEST(ForwardSpectrum, GaussianMatchesClosedFormAndDirectSum) {
    const auto g = UniformGrid::line(-40, 40, 2048);
    const CVec spec = forward_spectrum(sample(g, gauss), g);
    const auto& a = g.axis(0);
    for (int k = 0; k < 16; ++k) {
        const std::size_t j = a.count / 2 + static_cast<std::size_t>(k * 7) - 40;
        const double u = g.freq_point(j)[0];
        const auto direct = oracle::direct_transform(gauss, a.origin, a.spacing, static_cast<int>(a.count), u);
        EXPECT_LE(std::abs(spec[j] - direct), 1e-10) << "u = " << u;
        EXPECT_LE(std::abs(spec[j] - std::exp(-u * u)), 1e-10) << "u = " << u;
    }
}

TEST(ForwardSpectrum, ZeroAndShift) {
    const auto g = UniformGrid::line(-40, 40, 2048);
    for (const auto& v : forward_spectrum(CVec(g.size(), 0.0), g)) EXPECT_EQ(v, cplx(0.0));
    const CVec spec = forward_spectrum(sample(g, [](double t) { return gauss(t - 5.0); }), g);
    for (std::size_t j = 900; j < 1150; j += 10) {
        const double u = g.freq_point(j)[0];
        EXPECT_LE(std::abs(spec[j] - std::polar(std::exp(-u * u), -5.0 * u)), 1e-10);
    }
}

TEST(ForwardSpectrum, EdgeCheckAndWaiver) {
    const auto g = UniformGrid::line(-10, 10, 256);
    const CVec ramp = sample(g, [](double t) { return 1.0 + 0.0 * t; });
    EXPECT_THROW(forward_spectrum(ramp, g), EdgeMassError);
    EXPECT_NO_THROW(forward_spectrum(ramp, g, {.waive = true}));
}

TEST(Quadrature, Moments) {
    const auto g = UniformGrid::line(-40, 40, 2048);
    EXPECT_NEAR(quadrature(sample(g, gauss), g).real(), 1.0, 1e-10);
    EXPECT_NEAR(quadrature(sample(g, [](double t) { return t * std::exp(-t * t); }), g).real(), 0.0, 1e-12);
    const double want = 2.0 * oracle::simpson([](double t) { return t * t * gauss(t); }, 0.0, 60.0, 1e-13);
    EXPECT_NEAR(want, 2.0, 1e-9);
    EXPECT_NEAR(quadrature(sample(g, [](double t) { return t * t * gauss(t); }), g).real(), want, 1e-8);
}

TEST(RoundTrip, RandomBandLimited) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = UniformGrid::line(-32, 32, 1024);
        const double c1 = n(rng), c2 = n(rng), w = 1.0 + std::abs(n(rng));
        const CVec v = sample(g, [&](double t) { return (c1 * std::cos(w * t) + c2 * std::sin(0.5 * t)) * std::exp(-t * t / 20.0); });
        const CVec spec = forward_spectrum(v, g);
        const CVec back = inverse_spectrum(spec, g);
        double err = 0.0, mx = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            err = std::max(err, std::abs(back[i] - v[i]));
            mx = std::max(mx, std::abs(v[i]));
        }
        EXPECT_LE(err, 1e-12 * mx);
        const double lhs = grid_l2_norm(v, g), rhs = std::pow(kTwoPi, -0.5) * spectral_l2_norm(spec, g);
        EXPECT_NEAR(lhs, rhs, 1e-10 * lhs);
    }
}

TEST(RaySamples, RadialAndVanishingRays) {
    const auto g1 = UniformGrid::line(-40, 40, 2048);
    const CVec spec = forward_spectrum(sample(g1, gauss), g1);
    for (Point w : {Point{1.0, 0.0}, Point{-1.0, 0.0}}) {
        const auto prof = ray_samples(spec, g1, w, 3.0);
        for (std::size_t k = 0; k < prof.radius.size(); k += 17)
            EXPECT_NEAR(prof.magnitude[k], std::exp(-prof.radius[k] * prof.radius[k]), 2e-3);
    }
    const auto g2 = UniformGrid::square(-16, 16, 64);
    CVec s2(g2.size());
    for (std::size_t j = 0; j < g2.size(); ++j) {
        const Point u = g2.freq_point(j);
        s2[j] = u[0] * std::exp(-(u[0] * u[0] + u[1] * u[1]));
    }
    for (double m : ray_samples(s2, g2, {0.0, 1.0}, 4.0).magnitude) EXPECT_EQ(m, 0.0);
    EXPECT_THROW(ray_samples(s2, g2, {1.0, 1.0}, 4.0), InvalidArgument);
}

TEST(RaySamples, AnnularKernelGap) {
    const Kernel k = catalog("annular-exp", {.tau0 = 0.5});
    const double du = k.grid().min_freq_spacing();
    const auto prof = ray_samples(k.spectral(), k.grid(), {1.0, 0.0}, 2.0);
    for (std::size_t i = 0; i < prof.radius.size(); ++i) {
        if (prof.radius[i] <= 0.5 - du) { EXPECT_EQ(prof.magnitude[i], 0.0) << prof.radius[i]; }
        if (prof.radius[i] >= 0.5 + 2.0 * du) { EXPECT_GT(prof.magnitude[i], 0.0) << prof.radius[i]; }
    }
}

TEST(Tbrg, RoundTripAndCsv) {
    const auto g = UniformGrid::square(-1, 1, 8);
    GridData d{g, 2, {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
        d.values.push_back(static_cast<double>(i));
        d.values.push_back(-0.5 * static_cast<double>(i));
    }
    std::stringstream ss;
    write_tbrg(ss, d);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 6), std::string("TBRG1\0", 6));
    const GridData r = read_tbrg(ss);
    EXPECT_TRUE(r.grid == g);
    EXPECT_EQ(r.components, 2u);
    EXPECT_EQ(r.values, d.values);
    std::stringstream csv;
    write_csv(csv, d, {"a", "b"});
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "x1,x2,a,b");
    std::stringstream bad("NOPE!!");
    EXPECT_THROW(read_tbrg(bad), FormatError);
}
