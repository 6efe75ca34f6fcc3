#pragma once
// Regularizing transform M(x,y) = (f * phi_y)(x) over a scale ladder, plus growth diagnostics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/fourier.hpp"
#include "tsl/grid.hpp"
#include "tsl/kernels.hpp"
#include "tsl/parallel.hpp"
#include "tsl/signals.hpp"

namespace tsl {

struct ScaleField {
    UniformGrid grid;
    ScaleLadder ladder;
    std::size_t components = 1;
    std::vector<std::vector<CVec>> values;  // [scale][component][grid point]
    std::string signal_id = "signal";
    std::string kernel_id;

    const std::vector<CVec>& slice(std::size_t s) const { return values[s]; }
    std::vector<double> magnitudes(std::size_t s, ComponentNorm kind = ComponentNorm::L2) const {
        return pointwise_norm(values[s], kind);
    }
    double scale_norm(std::size_t s, const NormSpec& spec) const { return norm(values[s], grid, spec); }

    // Nearest grid sample of component c at point x for scale index s.
    cplx at(std::size_t s, const Point& x, std::size_t c = 0) const {
        std::array<std::size_t, 2> ij{0, 0};
        for (int a = 0; a < grid.dimension(); ++a) {
            const Axis& ax = grid.axis(a);
            const double pos = std::round((x[static_cast<std::size_t>(a)] - ax.origin) / ax.spacing);
            ij[static_cast<std::size_t>(a)] =
                static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(ax.count - 1)));
        }
        return values[s][c][ij[0] * grid.cols() + ij[1]];
    }

    bool finite() const {
        for (const auto& sl : values)
            for (const auto& comp : sl)
                for (const auto& v : comp)
                    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }
};

// phi^ at arbitrary frequencies: closed form, else six-point Lagrange interpolation of the exact
// transform of the kernel's samples, tabulated on a zero-padded (finer) dual grid.
inline std::function<cplx(const Point&)> spectrum_sampler(const Kernel& k) {
    if (k.has_closed_spectrum()) return k.source().spectrum;
    const UniformGrid& g = k.grid();
    const int dim = g.dimension();
    const std::size_t pad = dim == 1 ? 8 : 4;
    std::vector<Axis> axes = g.axes();
    for (auto& ax : axes) ax.count *= pad;
    const UniformGrid fine(axes);
    CVec padded(fine.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t r = dim == 1 ? 0 : i / g.cols(), c = dim == 1 ? i : i % g.cols();
        padded[dim == 1 ? c : r * fine.cols() + c] = k.spatial()[i];
    }
    auto spec = std::make_shared<CVec>(forward_spectrum(padded, fine, {.waive = true}));
    return [fine, spec, dim](const Point& u) -> cplx {
        constexpr int taps = 6;
        std::array<long, 2> base{0, 0};
        std::array<std::array<double, taps>, 2> w{};
        for (int a = 0; a < dim; ++a) {
            const Axis& ax = fine.axis(a);
            const double pos = u[static_cast<std::size_t>(a)] / ax.freq_spacing() + static_cast<double>(ax.count / 2);
            if (pos < 0.0 || pos > static_cast<double>(ax.count - 1)) return 0.0;
            const double fl = std::floor(pos);
            base[static_cast<std::size_t>(a)] = static_cast<long>(fl) - (taps / 2 - 1);
            // Lagrange weights on nodes fl - 2 .. fl + 3
            const double x = pos - fl + (taps / 2 - 1);
            for (int j = 0; j < taps; ++j) {
                double l = 1.0;
                for (int m = 0; m < taps; ++m)
                    if (m != j) l *= (x - m) / static_cast<double>(j - m);
                w[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] = l;
            }
        }
        const auto n0 = static_cast<long>(fine.axis(0).count);
        if (dim == 1) {
            cplx acc = 0.0;
            for (int d = 0; d < taps; ++d) {
                const long j = base[0] + d;
                if (j >= 0 && j < n0) acc += w[0][static_cast<std::size_t>(d)] * (*spec)[static_cast<std::size_t>(j)];
            }
            return acc;
        }
        const auto n1 = static_cast<long>(fine.axis(1).count);
        cplx acc = 0.0;
        for (int di = 0; di < taps; ++di)
            for (int dj = 0; dj < taps; ++dj) {
                const long i = base[0] + di, j = base[1] + dj;
                if (i < 0 || i >= n0 || j < 0 || j >= n1) continue;
                acc += w[0][static_cast<std::size_t>(di)] * w[1][static_cast<std::size_t>(dj)] *
                       (*spec)[static_cast<std::size_t>(i * n1 + j)];
            }
        return acc;
    };
}

// Smallest admissible scale for a grid: below it phi_y is narrower than the sample spacing allows.
inline double min_resolved_scale(const UniformGrid& grid) { return 2.0 * grid.max_spacing() / kPi; }

namespace detail {

inline cplx kernel_moment(const Kernel& k, const MultiIndex& m, std::vector<Moment>& extra) {
    if (m.order() <= k.moment_order()) return k.moment(m);
    if (extra.empty() || extra.back().index.order() < m.order()) extra = moments(k, m.order());
    for (const auto& mo : extra)
        if (mo.index == m) return mo.value;
    throw InvalidArgument("moment unavailable");
}

}  // namespace detail

// M(x,y) on the grid for every ladder scale.
inline ScaleField regularize(const Signal& f, const Kernel& phi, const UniformGrid& grid, const ScaleLadder& ladder,
                             std::string signal_id = "signal") {
    if (f.dimension() != phi.dimension() || grid.dimension() != f.dimension())
        throw InvalidArgument("signal, kernel and grid dimensions differ");
    const double y_floor = min_resolved_scale(grid);
    if (ladder.y_min() < y_floor * (1.0 - 1e-12))
        throw ScaleResolutionError("y_min = " + std::to_string(ladder.y_min()) + " is below 2*dx/pi = " +
                                   std::to_string(y_floor));
    check_edges(phi.spatial(), phi.grid(), {});
    if (f.smooth() && !(f.smooth()->grid == grid))
        throw InvalidArgument("field grid must coincide with the smooth-part grid");

    const int n = grid.dimension();
    const std::size_t m = f.components();
    const auto phi_hat = spectrum_sampler(phi);

    // Smooth part spectra, computed once.
    std::vector<CVec> smooth_hat;
    if (f.smooth()) {
        for (const auto& comp : f.smooth()->components)
            smooth_hat.push_back(forward_spectrum(comp, grid, {.waive = f.smooth_edge_waived()}));
    }
    // Poly part needs moments up to its degree.
    std::vector<Moment> extra;
    const int pdeg = f.poly_degree();
    if (pdeg > phi.moment_order()) extra = moments(phi, pdeg);
    std::vector<std::pair<MultiIndex, cplx>> mu;
    if (pdeg >= 0)
        for (const auto& k : multi_indices(n, pdeg)) mu.emplace_back(k, detail::kernel_moment(phi, k, extra));

    ScaleField field;
    field.grid = grid;
    field.ladder = ladder;
    field.components = m;
    field.signal_id = std::move(signal_id);
    field.kernel_id = phi.name();
    field.values.assign(ladder.size(), std::vector<CVec>(m, CVec(grid.size(), 0.0)));

    parallel_for(ladder.size(), [&](std::size_t s) {
        const double y = ladder[s];
        auto& out = field.values[s];
        CVec dil(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const Point u = grid.freq_point(j);
            dil[j] = phi_hat({y * u[0], y * u[1]});
        }
        for (std::size_t c = 0; c < smooth_hat.size(); ++c) {
            CVec prod(grid.size());
            for (std::size_t j = 0; j < grid.size(); ++j) prod[j] = smooth_hat[c][j] * dil[j];
            const CVec conv = inverse_spectrum(prod, grid);
            for (std::size_t i = 0; i < grid.size(); ++i) out[c][i] += conv[i];
        }
        for (const auto& d : f.diracs()) {
            if (phi.has_closed_derivatives()) {
                const double scale = std::pow(y, -n - d.order.order());
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const Point x = grid.point(i);
                    const cplx v = scale * phi.derivative_at({(x[0] - d.location[0]) / y, (x[1] - d.location[1]) / y},
                                                             d.order);
                    for (std::size_t c = 0; c < m; ++c) out[c][i] += d.weight[c] * v;
                }
            } else {
                CVec spec(grid.size());
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const Point u = grid.freq_point(j);
                    cplx mult = std::pow(cplx(0.0, u[0]), d.order.a) * std::pow(cplx(0.0, u[1]), d.order.b);
                    spec[j] = mult * std::polar(1.0, -(u[0] * d.location[0] + u[1] * d.location[1])) * dil[j];
                }
                const CVec v = inverse_spectrum(spec, grid);
                for (std::size_t i = 0; i < grid.size(); ++i)
                    for (std::size_t c = 0; c < m; ++c) out[c][i] += d.weight[c] * v[i];
            }
        }
        for (const auto& w : f.waves()) {
            const cplx gain = phi_hat({y * w.frequency[0], y * w.frequency[1]});
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Point x = grid.point(i);
                const cplx e = gain * std::polar(1.0, w.frequency[0] * x[0] + w.frequency[1] * x[1]);
                for (std::size_t c = 0; c < m; ++c) out[c][i] += w.amplitude[c] * e;
            }
        }
        // int P(x - y t) phi(t) dt = sum_k (-y)^|k| mu_k (d^k P)(x) / k!
        for (const auto& p : f.poly()) {
            for (const auto& [k, muk] : mu) {
                if (k.a > p.power.a || k.b > p.power.b) continue;
                const double coef = std::pow(-y, k.order()) * falling(p.power.a, k.a) * falling(p.power.b, k.b) /
                                    multi_factorial(k);
                const cplx ck = coef * muk;
                if (ck == cplx(0.0)) continue;
                const MultiIndex rest{p.power.a - k.a, p.power.b - k.b};
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const cplx v = ck * monomial(grid.point(i), rest);
                    for (std::size_t c = 0; c < m; ++c) out[c][i] += p.coeff[c] * v;
                }
            }
        }
    });
    return field;
}

// W_psi f(x,y) = <f(x + y t), conj(psi(t))> is the regularizing transform with t -> conj(psi(-t)).
inline ScaleField wavelet_transform(const Signal& f, const Kernel& psi, const UniformGrid& grid,
                                    const ScaleLadder& ladder, std::string signal_id = "signal") {
    return regularize(f, psi.flipped_conjugate(), grid, ladder, std::move(signal_id));
}

// ---- slow growth ----

struct GrowthFit {
    int k = 0;
    int l = 0;
    double C = 0.0;
};

namespace detail {

struct EnvelopeSample {
    double y, r, logm;  // scale, |x|, log |M|
};

// Per-scale maxima of |M| inside |x| bins [0,1), [1,2), [2,4), ...
inline std::vector<EnvelopeSample> growth_envelope(const ScaleField& field) {
    std::vector<EnvelopeSample> out;
    double peak = 0.0;
    std::vector<std::vector<std::pair<double, double>>> bins(field.ladder.size());
    for (std::size_t s = 0; s < field.ladder.size(); ++s) {
        const auto mag = field.magnitudes(s);
        std::vector<std::pair<double, double>> best(64, {0.0, 0.0});  // (value, |x|)
        for (std::size_t i = 0; i < mag.size(); ++i) {
            const Point x = field.grid.point(i);
            const double r = std::hypot(x[0], x[1]);
            const std::size_t b = r < 1.0 ? 0 : 1 + static_cast<std::size_t>(std::floor(std::log2(r)));
            if (b >= best.size()) continue;
            if (mag[i] > best[b].first) best[b] = {mag[i], r};
            peak = std::max(peak, mag[i]);
        }
        bins[s] = std::move(best);
    }
    for (std::size_t s = 0; s < bins.size(); ++s)
        for (const auto& [v, r] : bins[s])
            if (v > 1e-10 * peak && v > 0.0) out.push_back({field.ladder[s], r, std::log(v)});
    return out;
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

inline double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

// Integer (k, l) and C with |M(x,y)| <= C (1/y + y)^k (1 + |x|)^l on the sampled window.
// A candidate must leave no residual growth towards y -> 0, y -> inf or |x| -> inf;
// C is then the smallest constant covering every envelope sample.
inline GrowthFit slow_growth_fit(const ScaleField& field, double trend_tolerance = 0.25) {
    if (!field.finite()) throw InvalidArgument("field has non-finite values");
    const auto env = detail::growth_envelope(field);
    if (env.empty()) return {0, 0, 0.0};

    for (int k = 0; k <= 12; ++k) {
        for (int l = 0; l <= 12; ++l) {
            std::vector<double> res(env.size());
            for (std::size_t i = 0; i < env.size(); ++i)
                res[i] = env[i].logm - k * std::log(1.0 / env[i].y + env[i].y) - l * std::log1p(env[i].r);
            const double top = *std::max_element(res.begin(), res.end());

            // residual trend in y: per-scale maxima against log(1/y + y) for y <= 0.1 and y >= 10,
            // where log(1/y + y) is close to |log y|
            bool grows = false;
            for (int side = 0; side < 2 && !grows; ++side) {
                std::vector<double> xs, ys;
                for (std::size_t s = 0; s < field.ladder.size(); ++s) {
                    const double y = field.ladder[s];
                    if (side == 0 ? y > 0.1 : y < 10.0) continue;
                    double best = -std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < env.size(); ++i)
                        if (env[i].y == y) best = std::max(best, res[i]);
                    if (!std::isfinite(best)) continue;
                    xs.push_back(std::log(1.0 / y + y));
                    ys.push_back(best);
                }
                if (xs.size() >= 3 && detail::ls_slope(xs, ys) > trend_tolerance) grows = true;
            }
            // residual trend in |x|: per-bin maxima over the outer half of bins with |x| >= 1
            if (!grows) {
                std::vector<std::pair<double, double>> bin_max;  // (log(1+r), residual)
                for (std::size_t i = 0; i < env.size(); ++i) {
                    if (env[i].r < 1.0) continue;
                    const double key = std::floor(std::log2(env[i].r));
                    auto it = std::find_if(bin_max.begin(), bin_max.end(),
                                           [&](const auto& b) { return std::floor(std::log2(std::expm1(b.first))) == key; });
                    if (it == bin_max.end())
                        bin_max.emplace_back(std::log1p(env[i].r), res[i]);
                    else if (res[i] > it->second)
                        *it = {std::log1p(env[i].r), res[i]};
                }
                std::sort(bin_max.begin(), bin_max.end());
                if (bin_max.size() >= 3) {
                    const std::size_t from = bin_max.size() / 2 > bin_max.size() - 3 ? bin_max.size() - 3 : bin_max.size() / 2;
                    std::vector<double> xs, ys;
                    for (std::size_t b = from; b < bin_max.size(); ++b) {
                        xs.push_back(bin_max[b].first);
                        ys.push_back(bin_max[b].second);
                    }
                    if (detail::ls_slope(xs, ys) > trend_tolerance) grows = true;
                }
            }
            if (grows) continue;
            return {k, l, std::exp(top)};
        }
    }
    return {13, 13, std::numeric_limits<double>::infinity()};
}

// ---- localization ----

struct DecayFit {
    double slope = 0.0;                // s in sup_K |M| ~ C y^s; +inf when M vanishes on K
    std::vector<double> scales, sups;  // the fitted data
};

// Fits sup_{x in K} |M(x,y)| ~ C y^s over the lower half of the scales y <= y_max.
// K is the box [lo, hi]. Gridded smooth parts carry FFT round-off, so their values below
// floor_rel * peak count as zero; purely symbolic signals are exact and use no floor.
inline DecayFit localization_decay(const ScaleField& field, const Signal& f, const Point& lo, const Point& hi,
                                   double y_max, double floor_rel = 1e-13) {
    const int n = field.grid.dimension();
    if (!f.poly().empty() || !f.waves().empty())
        throw SupportOverlapError("polynomial and exponential parts have full support");
    if (const auto box = f.support_box()) {
        bool disjoint = false;
        for (int a = 0; a < n; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (hi[ua] < (*box)[0][ua] || lo[ua] > (*box)[1][ua]) disjoint = true;
        }
        if (!disjoint) throw SupportOverlapError("K meets the support of the signal");
    }
    std::vector<std::size_t> idx;
    for (std::size_t s = 0; s < field.ladder.size(); ++s)
        if (field.ladder[s] <= y_max) idx.push_back(s);
    idx.resize((idx.size() + 1) / 2);

    DecayFit out;
    std::vector<double> lx, ly;
    for (const auto s : idx) {
        const auto mag = field.magnitudes(s);
        double peak = 0.0, sup = 0.0;
        for (std::size_t i = 0; i < mag.size(); ++i) {
            peak = std::max(peak, mag[i]);
            const Point x = field.grid.point(i);
            bool inside = true;
            for (int a = 0; a < n; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                inside = inside && x[ua] >= lo[ua] && x[ua] <= hi[ua];
            }
            if (inside) sup = std::max(sup, mag[i]);
        }
        out.scales.push_back(field.ladder[s]);
        out.sups.push_back(sup);
        if (sup > (f.smooth() ? floor_rel * peak : 0.0) && sup > 0.0) {
            lx.push_back(std::log(field.ladder[s]));
            ly.push_back(std::log(sup));
        }
    }
    out.slope = lx.size() >= 2 ? detail::ls_slope(lx, ly) : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace tsl
