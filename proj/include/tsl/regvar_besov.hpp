#pragma once
// Regularly varying functionals J^{q,c}, LP-pairs and Besov-type norms.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"
#include "tsl/signals.hpp"
#include "tsl/transform.hpp"

namespace tsl {

enum class SlowKind { Const, LogPower, Table };

// c(y) = y^alpha L(y) on (0, 1].
struct RegVarWeight {
    double alpha = 0.0;
    SlowKind kind = SlowKind::Const;
    double beta = 0.0;                                // L(y) = log(e/y)^beta
    std::vector<std::pair<double, double>> table;     // (y, L(y)), ascending y, log-log interpolated

    static RegVarWeight power(double a) { return {a, SlowKind::Const, 0.0, {}}; }
    static RegVarWeight log_power(double a, double b) { return {a, SlowKind::LogPower, b, {}}; }
    // User table; must pass the Karamata ratio test c(ay)/c(y) ~ a^alpha at y = 1e-4.
    static RegVarWeight from_table(double a, std::vector<std::pair<double, double>> t) {
        RegVarWeight w{a, SlowKind::Table, 0.0, std::move(t)};
        if (w.table.size() < 2) throw InvalidArgument("weight table needs at least two rows");
        for (const auto& [y, v] : w.table)
            if (!(y > 0.0) || !(v > 0.0)) throw InvalidArgument("weight table entries must be positive");
        for (double a2 : {0.5, 2.0}) {
            const double r = w(a2 * 1e-4) / w(1e-4) / std::pow(a2, a);
            if (std::abs(r - 1.0) > 0.02)
                throw InvalidArgument("weight table is not regularly varying of index " + std::to_string(a));
        }
        return w;
    }

    double slow(double y) const {
        switch (kind) {
            case SlowKind::Const: return 1.0;
            case SlowKind::LogPower: return std::pow(std::log(std::exp(1.0) / y), beta);
            case SlowKind::Table: {
                if (y <= table.front().first) return table.front().second;
                if (y >= table.back().first) return table.back().second;
                auto it = std::lower_bound(table.begin(), table.end(), y,
                                           [](const auto& row, double v) { return row.first < v; });
                const auto& [y1, v1] = *it;
                const auto& [y0, v0] = *(it - 1);
                const double t = std::log(y / y0) / std::log(y1 / y0);
                return std::exp((1.0 - t) * std::log(v0) + t * std::log(v1));
            }
        }
        return 1.0;
    }
    double operator()(double y) const { return std::pow(y, alpha) * slow(y); }
};

struct RVFunctional {
    double q = 2.0;
    RegVarWeight c;
};

struct RVValue {
    double value = 0.0;
    bool divergent = false;
};

// Geometric scales 2^{-(j+1/2)/n}, j = 0..octaves*n-1: dyadic dilations shift samples exactly
// and no node falls on a dyadic point.
inline std::vector<double> rv_scales(int octaves = 30, int per_octave = 16) {
    std::vector<double> y(static_cast<std::size_t>(octaves * per_octave));
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::pow(2.0, -(static_cast<double>(j) + 0.5) / per_octave);
    std::reverse(y.begin(), y.end());
    return y;
}

// J^{q,c}(g) as sum w_j (g/c)^q over ascending geometric scales y (all <= 1) with log-measure weights w,
// plus the y -> 0 dyadic block test for divergence.
inline RVValue rv_apply(const RVFunctional& J, const std::vector<double>& y, const std::vector<double>& g,
                        const std::vector<double>& w) {
    if (y.size() != g.size() || y.size() < 2 || w.size() != y.size())
        throw InvalidArgument("rv_apply needs matching samples");
    if (!(J.q >= 1.0)) throw InvalidArgument("q must lie in [1, inf]");
    const double h = std::log(y[1] / y[0]);
    std::vector<double> v(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (g[j] < 0.0) throw InvalidArgument("J acts on non-negative functions");
        v[j] = g[j] / J.c(y[j]);
    }
    RVValue out;
    const auto per = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::log(2.0) / h)));
    auto block = [&](std::size_t b, bool sup) {
        double acc = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per && i < v.size(); ++i)
            acc = sup ? std::max(acc, v[i]) : acc + w[i] * std::pow(v[i], J.q);
        return acc;
    };
    const bool sup = std::isinf(J.q);
    double total = 0.0;
    for (std::size_t b = 0; b * per < v.size(); ++b) total = sup ? std::max(total, block(b, true)) : total + block(b, false);
    if (v.size() >= 3 * per) {
        for (std::size_t b = 0; b < 2; ++b) {
            const double lo = block(b, sup), hi = block(b + 1, sup);
            if (lo <= 1e-12 * total) continue;  // round-off tail
            if (hi == 0.0 || lo / hi > (sup ? 1.05 : 0.8)) out.divergent = true;
        }
    }
    if (sup) {
        for (const auto x : v) out.value = std::max(out.value, x);
    } else {
        double acc = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) acc += w[j] * std::pow(v[j], J.q);
        out.value = std::pow(acc, 1.0 / J.q);
    }
    if (!std::isfinite(out.value)) out.divergent = true;
    return out;
}

// Midpoint cells: each scale of rv_scales() owns one log-width step, so the cells tile (2^-octaves, 1].
inline RVValue rv_apply(const RVFunctional& J, const std::vector<double>& y, const std::vector<double>& g) {
    if (y.size() < 2) throw InvalidArgument("rv_apply needs matching samples");
    return rv_apply(J, y, g, std::vector<double>(y.size(), std::log(y[1] / y[0])));
}

inline RVValue rv_apply(const RVFunctional& J, const std::vector<double>& y, const std::function<double(double)>& g) {
    std::vector<double> v(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) v[j] = g(y[j]);
    return rv_apply(J, y, v);
}

// ---- properties (I)-(V) ----

using ScaleFunctional = std::function<RVValue(const std::function<double(double)>&)>;

inline ScaleFunctional as_functional(const RVFunctional& J, std::vector<double> y = rv_scales()) {
    return [J, y](const std::function<double(double)>& g) { return rv_apply(J, y, g); };
}

struct PropertyResult {
    std::string name;
    int trials = 0;
    int violations = 0;
    std::string witness;
};

struct PropertiesReport {
    std::vector<PropertyResult> properties;  // (I) .. (V)
    std::vector<std::pair<double, double>> potter;  // (epsilon, fitted C_epsilon)
    bool all_pass() const {
        for (const auto& p : properties)
            if (p.violations) return false;
        return true;
    }
};

namespace detail {

// Random non-negative g on (0,1]: a few log-space bumps inside [2^-12, 1], sometimes vanishing at 1/2.
inline std::function<double(double)> random_scale_function(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 1 + static_cast<int>(u(rng) * 3.0);
    std::vector<std::array<double, 3>> bumps;
    for (int i = 0; i < n; ++i) {
        const double w = 0.5 + 2.0 * u(rng);               // half-width in octaves
        const double c = -12.0 + w + (12.0 - 2.0 * w) * u(rng);  // centre, log2 y
        bumps.push_back({c, w, 0.1 + 10.0 * u(rng)});
    }
    return [bumps](double y) {
        if (y > 1.0 || y <= 0.0) return 0.0;
        const double s = std::log2(y);
        double acc = 0.0;
        for (const auto& [c, w, a] : bumps) {
            const double t = (s - c) / w;
            if (std::abs(t) < 1.0) acc += a * std::exp(1.0 - 1.0 / (1.0 - t * t));
        }
        return acc;
    };
}

inline double value_or_inf(const RVValue& v) { return v.divergent ? std::numeric_limits<double>::infinity() : v.value; }

}  // namespace detail

// Randomized checks of (I)-(V) for a functional of index alpha.
inline PropertiesReport rv_properties_check(const ScaleFunctional& J, double alpha, int trials = 100,
                                            std::uint64_t seed = 11) {
    if (trials < 100) throw InvalidArgument("at least 100 trials per property");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PropertiesReport rep;
    auto F = [&](const std::function<double(double)>& g) { return detail::value_or_inf(J(g)); };
    constexpr double rel = 1e-12;

    PropertyResult p1{"(I) sub-integral inequality", trials, 0, ""};
    PropertyResult p2{"(II) monotonicity", trials, 0, ""};
    PropertyResult p3{"(III) homogeneity", trials, 0, ""};
    PropertyResult p4{"(IV) monotone convergence", trials, 0, ""};
    PropertyResult p5{"(V) Potter bounds", trials, 0, ""};

    for (int t = 0; t < trials; ++t) {
        // (I): g(y, xi) on 8 quadrature nodes in xi
        {
            std::vector<std::function<double(double)>> gs;
            std::vector<double> w;
            for (int k = 0; k < 8; ++k) {
                gs.push_back(detail::random_scale_function(rng));
                w.push_back(u(rng) / 8.0);
            }
            auto sum = [gs, w](double y) {
                double a = 0.0;
                for (std::size_t k = 0; k < gs.size(); ++k) a += w[k] * gs[k](y);
                return a;
            };
            double rhs = 0.0;
            for (std::size_t k = 0; k < gs.size(); ++k) rhs += w[k] * F(gs[k]);
            const double lhs = F(sum);
            if (lhs > rhs * (1.0 + rel) + 1e-300) {
                ++p1.violations;
                p1.witness = "J(int g) = " + std::to_string(lhs) + " > int J(g) = " + std::to_string(rhs);
            }
        }
        // (II)
        {
            auto g1 = detail::random_scale_function(rng), extra = detail::random_scale_function(rng);
            auto g2 = [g1, extra](double y) { return g1(y) + extra(y); };
            const double a = F(g1), b = F(g2);
            if (a > b * (1.0 + rel)) {
                ++p2.violations;
                p2.witness = "J(g1) = " + std::to_string(a) + " > J(g2) = " + std::to_string(b);
            }
        }
        // (III)
        {
            auto g = detail::random_scale_function(rng);
            const double base = F(g);
            for (double lam : {1e-3, 1.0, 1e3, std::pow(10.0, -3.0 + 6.0 * u(rng))}) {
                const double v = F([g, lam](double y) { return lam * g(y); });
                const bool ok = (std::isinf(base) && std::isinf(v)) || std::abs(v - lam * base) <= 1e-10 * lam * base;
                if (!ok) {
                    ++p3.violations;
                    p3.witness = "J(lambda g) != lambda J(g) at lambda = " + std::to_string(lam);
                    break;
                }
            }
        }
        // (IV): g_k = g (1 - 2^-k) min(1, 2^k |y - y0|) increases to g off the single point y0
        {
            auto g = detail::random_scale_function(rng);
            const double candidates[] = {0.5, 0.25, 1.0 / 3.0, u(rng)};
            const double y0 = candidates[t % 4];
            const double target = F(g);
            double prev = 0.0, last = 0.0;
            bool mono = true;
            for (int k = 1; k <= 48; ++k) {
                const double s = std::ldexp(1.0, k);
                last = F([g, y0, s](double y) { return g(y) * (1.0 - 1.0 / s) * std::min(1.0, s * std::abs(y - y0)); });
                if (last < prev * (1.0 - rel)) mono = false;
                prev = last;
            }
            const bool conv = std::isinf(target) ? std::isinf(last) : std::abs(last - target) <= 1e-9 * std::max(target, 1e-300);
            if (!mono || !conv) {
                ++p4.violations;
                p4.witness = "J(g_k) -> " + std::to_string(last) + " but J(g) = " + std::to_string(target) +
                             " (exceptional point " + std::to_string(y0) + ")";
            }
        }
    }
    // (V): fitted C_eps over a = 2^-6 .. 2^6 and trials random g
    for (double eps : {0.1, 0.5}) {
        double C = 0.0;
        bool bad = false;
        std::mt19937_64 r2(seed + 1000);
        for (int t = 0; t < trials; ++t) {
            auto g = detail::random_scale_function(r2);
            const double base = F(g);
            for (int e = -6; e <= 6; ++e) {
                const double a = std::ldexp(1.0, e);
                const double v = F([g, a](double y) { return g(a * y); });
                const double bound = std::pow(a, e >= 0 ? alpha + eps : alpha - eps) * base;
                if (v == 0.0) continue;
                const double ratio = bound > 0.0 ? v / bound : std::numeric_limits<double>::infinity();
                if (!std::isfinite(ratio)) {
                    bad = true;
                    p5.witness = "J(g(a.)) > 0 while J(g) = 0 at a = " + std::to_string(a);
                }
                C = std::max(C, ratio);
            }
        }
        if (bad) ++p5.violations;
        rep.potter.emplace_back(eps, C);
    }
    rep.properties = {p1, p2, p3, p4, p5};
    return rep;
}

struct EmbeddingReport {
    double C_beta = 0.0;
    int violations = 0;  // g with J(g) finite but J^{1,beta}(g) divergent
    std::vector<double> ratios;
};

// Least C with J^{1,beta}(g) <= C J(g) over the set.
inline EmbeddingReport rv_embedding_check(const RVFunctional& J, double beta,
                                          const std::vector<std::function<double(double)>>& gs,
                                          const std::vector<double>& y = rv_scales()) {
    if (!(beta < J.c.alpha - 0.05)) throw InvalidArgument("embedding needs beta < alpha - 0.05");
    const RVFunctional J1{1.0, RegVarWeight::power(beta)};
    EmbeddingReport rep;
    for (const auto& g : gs) {
        const auto lhs = rv_apply(J1, y, g), rhs = rv_apply(J, y, g);
        if (rhs.divergent) continue;
        if (lhs.divergent) {
            ++rep.violations;
            continue;
        }
        if (lhs.value == 0.0) continue;
        const double r = rhs.value > 0.0 ? lhs.value / rhs.value : std::numeric_limits<double>::infinity();
        if (!std::isfinite(r)) ++rep.violations;
        rep.ratios.push_back(r);
        rep.C_beta = std::max(rep.C_beta, r);
    }
    return rep;
}

// ---- LP-pairs and Besov norms ----

struct LPPair {
    Kernel phi0, phi;
    double alpha = 0.0;
    double tau = 0.0;

    LPPair(Kernel p0, Kernel p, double a) : phi0(std::move(p0)), phi(std::move(p)), alpha(a) {
        if (phi0.dimension() != phi.dimension()) throw InvalidArgument("LP-pair kernels differ in dimension");
        if (!is_nondegenerate(phi)) throw InvalidArgument(phi.name() + " is degenerate");
        tau = nondegeneracy_index(phi).tau;
        const double peak = phi0.spectral_peak();
        for (const auto& w : ray_fan(phi0.dimension(), 64))
            for (int i = 0; i <= 64; ++i) {
                const double r = tau * i / 64.0;
                if (std::abs(phi0.spectrum_at({r * w[0], r * w[1]})) <= 1e-10 * peak)
                    throw InvalidArgument(phi0.name() + "^ vanishes at radius " + std::to_string(r) + " <= tau");
            }
        const int order = static_cast<int>(std::floor(alpha));
        if (order >= 0) {
            const auto mus = moments(phi, order);
            // relative test: quadrature of t^2 phi over a long window leaves ~1e-8 of oscillating tail
            for (const auto& mo : mus)
                if (mo.index.order() <= order && std::abs(mo.value) > 1e-6 * absolute_moment(phi, mo.index.order()))
                    throw InvalidArgument(phi.name() + ": moment of order " + std::to_string(mo.index.order()) +
                                          " is " + std::to_string(std::abs(mo.value)) + ", LP-pair of order " +
                                          std::to_string(alpha) + " needs it to vanish");
        }
    }
};

struct BesovRow {
    double y = 0.0, scale_norm = 0.0, weighted = 0.0;  // ||M(.,y)||_p and ||M||_p / c(y)
};

struct BesovResult {
    double norm = 0.0, low = 0.0, j_part = 0.0;
    bool divergent = false;
    std::vector<BesovRow> table;
    double uc_probe = 0.0;  // p = inf: largest increment over one grid step, relative to the sup
};

// ||f * phi0||_p + J^{q,c}(||M_phi^f(., y)||_p) over the ladder scales y <= 1.
inline BesovResult besov_norm(const Signal& f, const LPPair& pair, double p, double q, const RegVarWeight& c,
                              const UniformGrid& grid, const ScaleLadder& ladder) {
    const NormSpec E = std::isinf(p) ? NormSpec::uc() : NormSpec::lp(p);
    BesovResult out;
    const ScaleField low = regularize(f, pair.phi0, grid, ScaleLadder(1.0, 2.0, 2));
    out.low = norm(low.values[0], grid, E);
    if (std::isinf(p)) {
        // modulus-of-continuity probe standing in for uniform continuity
        const auto mag = low.magnitudes(0);
        double sup = 0.0, inc = 0.0;
        for (std::size_t i = 0; i < mag.size(); ++i) {
            sup = std::max(sup, mag[i]);
            if (i + 1 < mag.size() && !grid.is_boundary(i))
                inc = std::max(inc, std::abs(low.values[0][0][i + 1] - low.values[0][0][i]));
        }
        out.uc_probe = sup > 0.0 ? inc / sup : 0.0;
    }
    const ScaleField field = regularize(f, pair.phi, grid, ladder);
    std::vector<double> ys, gs;
    for (std::size_t s = 0; s < ladder.size(); ++s) {
        if (ladder[s] > 1.0 + 1e-12) continue;
        const double v = field.scale_norm(s, E);
        ys.push_back(ladder[s]);
        gs.push_back(v);
        out.table.push_back({ladder[s], v, v / c(ladder[s])});
    }
    if (ys.size() < 2) throw InvalidArgument("Besov norm needs at least two scales in (0, 1]");
    // a ladder includes both ends, so the trapezoid rule in log y
    std::vector<double> ws(ys.size(), 0.0);
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        const double h = std::log(ys[j + 1] / ys[j]);
        ws[j] += 0.5 * h;
        ws[j + 1] += 0.5 * h;
    }
    const auto J = rv_apply({q, c}, ys, gs, ws);
    out.j_part = J.value;
    out.divergent = J.divergent;
    out.norm = out.low + out.j_part;
    return out;
}

struct EquivalenceReport {
    std::vector<double> ratios;
    double min = 0.0, max = 0.0, spread = 1.0;
    bool bounded = true;  // spread <= threshold
};

inline EquivalenceReport besov_equivalence(const std::vector<Signal>& fs, const LPPair& A, const LPPair& B, double p,
                                           double q, const RegVarWeight& c, const UniformGrid& grid,
                                           const ScaleLadder& ladder, double threshold = 10.0) {
    if (std::abs(A.alpha - B.alpha) > 1e-12) throw InvalidArgument("pairs must have the same order");
    EquivalenceReport rep;
    for (const auto& f : fs) {
        const double a = besov_norm(f, A, p, q, c, grid, ladder).norm;
        const double b = besov_norm(f, B, p, q, c, grid, ladder).norm;
        if (a == 0.0 && b == 0.0) continue;
        rep.ratios.push_back(a / b);
    }
    if (rep.ratios.empty()) return rep;
    rep.min = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    rep.max = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.spread = rep.max / rep.min;
    rep.bounded = rep.spread <= threshold;
    return rep;
}

}  // namespace tsl
