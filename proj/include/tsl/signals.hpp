#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/fourier.hpp"
#include "tsl/grid.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

inline constexpr int kMaxPolyDegree = 8;
inline constexpr int kMaxDiracOrder = 6;

struct DiracTerm {
    Point location{0.0, 0.0};
    MultiIndex order;
    CVec weight;  // one entry per component
};

struct PolyTerm {
    MultiIndex power;
    CVec coeff;
};

struct WaveTerm {
    Point frequency{0.0, 0.0};
    CVec amplitude;
};

struct SmoothPart {
    UniformGrid grid;
    std::vector<CVec> components;
};

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

inline double falling(int n, int k) {  // n (n-1) ... (n-k+1)
    if (k > n) return 0.0;
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= n - i;
    return v;
}

inline double monomial(const Point& x, const MultiIndex& p) { return std::pow(x[0], p.a) * std::pow(x[1], p.b); }

// Finite stand-in for a tempered distribution: gridded smooth part plus symbolic
// Dirac, polynomial and exponential parts, valued in C^m.
class Signal {
public:
    Signal() = default;
    Signal(int dim, std::size_t components) : dim_(dim), m_(components) {
        if (dim != 1 && dim != 2) throw InvalidArgument("dimension must be 1 or 2");
        if (components == 0) throw InvalidArgument("component count must be positive");
    }

    int dimension() const { return dim_; }
    std::size_t components() const { return m_; }

    const std::optional<SmoothPart>& smooth() const { return smooth_; }
    const std::vector<DiracTerm>& diracs() const { return diracs_; }
    const std::vector<PolyTerm>& poly() const { return poly_; }
    const std::vector<WaveTerm>& waves() const { return waves_; }
    bool smooth_edge_waived() const { return waive_edges_; }

    Signal& add_dirac(DiracTerm d) {
        check_width(d.weight.size());
        if (d.order.order() > kMaxDiracOrder) throw InvalidArgument("Dirac derivative order exceeds 6");
        if (d.order.a < 0 || d.order.b < 0 || (dim_ == 1 && d.order.b != 0)) throw InvalidArgument("bad multi-index");
        diracs_.push_back(std::move(d));
        return *this;
    }
    Signal& add_poly(PolyTerm t) {
        check_width(t.coeff.size());
        if (t.power.order() > kMaxPolyDegree) throw InvalidArgument("polynomial degree exceeds 8");
        if (t.power.a < 0 || t.power.b < 0 || (dim_ == 1 && t.power.b != 0)) throw InvalidArgument("bad multi-index");
        for (auto& p : poly_) {
            if (p.power == t.power) {
                for (std::size_t c = 0; c < m_; ++c) p.coeff[c] += t.coeff[c];
                return *this;
            }
        }
        poly_.push_back(std::move(t));
        return *this;
    }
    Signal& add_wave(WaveTerm w) {
        check_width(w.amplitude.size());
        if (dim_ == 1) w.frequency[1] = 0.0;
        waves_.push_back(std::move(w));
        return *this;
    }
    // Adds gridded samples; the edge check can be waived for one-sided data (cone-supported inputs).
    Signal& add_smooth(const UniformGrid& grid, std::vector<CVec> comps, bool waive_edges = false) {
        if (grid.dimension() != dim_) throw InvalidArgument("smooth part dimension mismatch");
        check_width(comps.size());
        for (const auto& c : comps) {
            if (c.size() != grid.size()) throw InvalidArgument("smooth part sample count mismatch");
            check_edges(c, grid, {.waive = waive_edges});
        }
        waive_edges_ = waive_edges_ || waive_edges;
        if (smooth_) {
            if (!(smooth_->grid == grid)) throw InvalidArgument("smooth parts live on different grids");
            for (std::size_t c = 0; c < m_; ++c)
                for (std::size_t i = 0; i < grid.size(); ++i) smooth_->components[c][i] += comps[c][i];
        } else {
            smooth_ = SmoothPart{grid, std::move(comps)};
        }
        return *this;
    }

    int poly_degree() const {
        int d = -1;
        for (const auto& p : poly_) {
            bool nonzero = false;
            for (const auto& c : p.coeff) nonzero = nonzero || c != cplx(0.0);
            if (nonzero) d = std::max(d, p.power.order());
        }
        return d;
    }
    bool has_poly() const { return poly_degree() >= 0; }

    // Symbolic parts evaluated pointwise (smooth part excluded).
    CVec symbolic_value(const Point& x) const {
        CVec v(m_, 0.0);
        for (const auto& p : poly_) {
            const double mono = monomial(x, p.power);
            for (std::size_t c = 0; c < m_; ++c) v[c] += p.coeff[c] * mono;
        }
        for (const auto& w : waves_) {
            const cplx e = std::polar(1.0, w.frequency[0] * x[0] + w.frequency[1] * x[1]);
            for (std::size_t c = 0; c < m_; ++c) v[c] += w.amplitude[c] * e;
        }
        return v;
    }

    // Smooth, wave and polynomial parts on a grid (Dirac parts have no pointwise values).
    std::vector<CVec> evaluate_on(const UniformGrid& grid, bool include_poly = true) const {
        std::vector<CVec> out(m_, CVec(grid.size(), 0.0));
        if (smooth_) {
            if (!(smooth_->grid == grid)) throw InvalidArgument("evaluation grid differs from the smooth-part grid");
            for (std::size_t c = 0; c < m_; ++c) out[c] = smooth_->components[c];
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point x = grid.point(i);
            for (const auto& w : waves_) {
                const cplx e = std::polar(1.0, w.frequency[0] * x[0] + w.frequency[1] * x[1]);
                for (std::size_t c = 0; c < m_; ++c) out[c][i] += w.amplitude[c] * e;
            }
            if (include_poly) {
                for (const auto& p : poly_) {
                    const double mono = monomial(x, p.power);
                    for (std::size_t c = 0; c < m_; ++c) out[c][i] += p.coeff[c] * mono;
                }
            }
        }
        return out;
    }

    Signal scaled(cplx s) const {
        Signal r = *this;
        if (r.smooth_)
            for (auto& comp : r.smooth_->components)
                for (auto& v : comp) v *= s;
        for (auto& d : r.diracs_)
            for (auto& v : d.weight) v *= s;
        for (auto& p : r.poly_)
            for (auto& v : p.coeff) v *= s;
        for (auto& w : r.waves_)
            for (auto& v : w.amplitude) v *= s;
        return r;
    }

    Signal operator+(const Signal& o) const {
        if (o.dim_ != dim_ || o.m_ != m_) throw InvalidArgument("signals differ in shape");
        Signal r = *this;
        if (o.smooth_) r.add_smooth(o.smooth_->grid, o.smooth_->components, o.waive_edges_);
        for (const auto& d : o.diracs_) r.diracs_.push_back(d);
        for (const auto& p : o.poly_) r.add_poly(p);
        for (const auto& w : o.waves_) r.waves_.push_back(w);
        return r;
    }
    Signal operator-(const Signal& o) const { return *this + o.scaled(-1.0); }

    // f(. - h); the smooth part is shifted spectrally on its (periodic) grid.
    Signal translated(const Point& h) const {
        Signal r(dim_, m_);
        r.waive_edges_ = waive_edges_;
        if (smooth_) {
            std::vector<CVec> comps;
            for (const auto& comp : smooth_->components) {
                CVec spec = forward_spectrum(comp, smooth_->grid, {.waive = true});
                for (std::size_t j = 0; j < spec.size(); ++j) {
                    const Point u = smooth_->grid.freq_point(j);
                    spec[j] *= std::polar(1.0, -(u[0] * h[0] + u[1] * h[1]));
                }
                comps.push_back(inverse_spectrum(spec, smooth_->grid));
            }
            r.smooth_ = SmoothPart{smooth_->grid, std::move(comps)};
        }
        for (auto d : diracs_) {
            d.location[0] += h[0];
            d.location[1] += h[1];
            r.diracs_.push_back(std::move(d));
        }
        for (auto w : waves_) {
            const cplx ph = std::polar(1.0, -(w.frequency[0] * h[0] + w.frequency[1] * h[1]));
            for (auto& a : w.amplitude) a *= ph;
            r.waves_.push_back(std::move(w));
        }
        // (x - h)^p expanded by the binomial theorem
        for (const auto& p : poly_) {
            for (int i = 0; i <= p.power.a; ++i) {
                for (int j = 0; j <= p.power.b; ++j) {
                    const double f = binomial(p.power.a, i) * binomial(p.power.b, j) *
                                     std::pow(-h[0], p.power.a - i) * std::pow(-h[1], p.power.b - j);
                    PolyTerm t{{i, j}, p.coeff};
                    for (auto& v : t.coeff) v *= f;
                    r.add_poly(std::move(t));
                }
            }
        }
        return r;
    }

    // Support of the non-polynomial, non-wave parts: bounding box of Diracs and of smooth
    // samples above the edge tolerance. Empty optional when nothing is localized.
    std::optional<std::array<Point, 2>> support_box(double rel_tol = kEdgeTolerance) const {
        std::optional<std::array<Point, 2>> box;
        auto grow = [&](const Point& p) {
            if (!box) {
                box = std::array<Point, 2>{p, p};
                return;
            }
            for (int a = 0; a < 2; ++a) {
                (*box)[0][static_cast<std::size_t>(a)] = std::min((*box)[0][static_cast<std::size_t>(a)], p[static_cast<std::size_t>(a)]);
                (*box)[1][static_cast<std::size_t>(a)] = std::max((*box)[1][static_cast<std::size_t>(a)], p[static_cast<std::size_t>(a)]);
            }
        };
        for (const auto& d : diracs_) grow(d.location);
        if (smooth_) {
            double peak = 0.0;
            for (const auto& comp : smooth_->components)
                for (const auto& v : comp) peak = std::max(peak, std::abs(v));
            for (const auto& comp : smooth_->components)
                for (std::size_t i = 0; i < comp.size(); ++i)
                    if (std::abs(comp[i]) > rel_tol * peak) grow(smooth_->grid.point(i));
        }
        return box;
    }

private:
    void check_width(std::size_t w) const {
        if (w != m_) throw InvalidArgument("term has " + std::to_string(w) + " components, signal has " + std::to_string(m_));
    }

    int dim_ = 1;
    std::size_t m_ = 1;
    std::optional<SmoothPart> smooth_;
    std::vector<DiracTerm> diracs_;
    std::vector<PolyTerm> poly_;
    std::vector<WaveTerm> waves_;
    bool waive_edges_ = false;
};

// ---- common scalar signals ----

inline Signal dirac_signal(double x0 = 0.0, int order = 0, cplx weight = 1.0) {
    Signal s(1, 1);
    s.add_dirac({{x0, 0.0}, {order, 0}, {weight}});
    return s;
}

inline Signal wave_signal(double omega, cplx amplitude = 1.0) {
    Signal s(1, 1);
    s.add_wave({{omega, 0.0}, {amplitude}});
    return s;
}

inline Signal cosine_signal(double omega, cplx amplitude = 1.0) {
    Signal s(1, 1);
    s.add_wave({{omega, 0.0}, {0.5 * amplitude}});
    s.add_wave({{-omega, 0.0}, {0.5 * amplitude}});
    return s;
}

inline Signal poly_signal(const std::vector<cplx>& coeffs) {
    Signal s(1, 1);
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        if (coeffs[k] != cplx(0.0)) s.add_poly({{static_cast<int>(k), 0}, {coeffs[k]}});
    return s;
}

inline Signal sampled_signal(const UniformGrid& grid, const std::function<cplx(const Point&)>& f, bool waive = false) {
    Signal s(grid.dimension(), 1);
    CVec v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.point(i));
    s.add_smooth(grid, {std::move(v)}, waive);
    return s;
}

// A kernel's profile used as the smooth part of a signal.
inline Signal kernel_signal(const Kernel& k, const UniformGrid& grid) {
    Signal s(grid.dimension(), 1);
    s.add_smooth(grid, {k.sample_on(grid)});
    return s;
}

inline Signal gaussian_bump_signal(const UniformGrid& grid, double center = 0.0, double width = 1.0) {
    return sampled_signal(grid, [=](const Point& x) {
        const double r = (x[0] - center) / width;
        return cplx(std::exp(-r * r));
    });
}

// ---- test functions ----

// Everything the pairing needs from a test function.
struct TestFunction {
    int dim = 1;
    std::function<cplx(const Point&, const MultiIndex&)> derivative;
    std::function<cplx(const Point&)> spectrum;
    std::function<cplx(const MultiIndex&)> moment;
    std::function<CVec(const UniformGrid&)> samples;
    bool closed_form = false;  // derivative() is exact rather than a spectral sum
};

inline TestFunction as_test_function(const Kernel& k) {
    auto kp = std::make_shared<Kernel>(k);
    TestFunction t;
    t.dim = k.dimension();
    t.derivative = [kp](const Point& x, const MultiIndex& m) { return kp->derivative_at(x, m); };
    t.spectrum = [kp](const Point& u) { return kp->spectrum_at(u); };
    t.moment = [kp](const MultiIndex& m) {
        if (m.order() <= kp->moment_order()) return kp->moment(m);
        for (const auto& mo : moments(*kp, m.order()))
            if (mo.index == m) return mo.value;
        throw InvalidArgument("moment unavailable");
    };
    t.samples = [kp](const UniformGrid& g) { return kp->sample_on(g); };
    t.closed_form = k.has_closed_derivatives();
    return t;
}

// t -> y^{-n} phi((x - t)/y), the test function whose pairing with f gives (f * phi_y)(x).
inline TestFunction shifted_dilated(const TestFunction& phi, const Point& x, double y) {
    TestFunction t;
    t.dim = phi.dim;
    const double norm = std::pow(y, -phi.dim);
    t.derivative = [phi, x, y, norm](const Point& s, const MultiIndex& m) {
        const Point arg{(x[0] - s[0]) / y, (x[1] - s[1]) / y};
        return norm * std::pow(-1.0 / y, m.order()) * phi.derivative(arg, m);
    };
    t.spectrum = [phi, x, y](const Point& u) {
        return std::polar(1.0, -(u[0] * x[0] + u[1] * x[1])) * phi.spectrum({-y * u[0], -y * u[1]});
    };
    // int t^m y^{-n} phi((x-t)/y) dt = int (x - y s)^m phi(s) ds
    t.moment = [phi, x, y](const MultiIndex& m) {
        cplx acc = 0.0;
        for (int i = 0; i <= m.a; ++i)
            for (int j = 0; j <= m.b; ++j)
                acc += binomial(m.a, i) * binomial(m.b, j) * std::pow(x[0], m.a - i) * std::pow(x[1], m.b - j) *
                       std::pow(-y, i + j) * phi.moment({i, j});
        return acc;
    };
    t.closed_form = phi.closed_form;
    t.samples = [phi, x, y, norm](const UniformGrid& g) {
        CVec out(g.size());
        if (phi.closed_form) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Point s = g.point(i);
                out[i] = norm * phi.derivative({(x[0] - s[0]) / y, (x[1] - s[1]) / y}, {});
            }
            return out;
        }
        for (std::size_t j = 0; j < g.size(); ++j) {
            const Point u = g.freq_point(j);
            out[j] = std::polar(1.0, -(u[0] * x[0] + u[1] * x[1])) * phi.spectrum({-y * u[0], -y * u[1]});
        }
        return inverse_spectrum(out, g);
    };
    return t;
}

// rho(. - h)
inline TestFunction translated(const TestFunction& rho, const Point& h) {
    TestFunction t;
    t.dim = rho.dim;
    t.derivative = [rho, h](const Point& s, const MultiIndex& m) { return rho.derivative({s[0] - h[0], s[1] - h[1]}, m); };
    t.spectrum = [rho, h](const Point& u) { return std::polar(1.0, -(u[0] * h[0] + u[1] * h[1])) * rho.spectrum(u); };
    t.moment = [rho, h](const MultiIndex& m) {
        cplx acc = 0.0;
        for (int i = 0; i <= m.a; ++i)
            for (int j = 0; j <= m.b; ++j)
                acc += binomial(m.a, i) * binomial(m.b, j) * std::pow(h[0], m.a - i) * std::pow(h[1], m.b - j) *
                       rho.moment({i, j});
        return acc;
    };
    t.closed_form = rho.closed_form;
    t.samples = [rho, h](const UniformGrid& g) {
        if (rho.closed_form) {
            CVec out(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Point s = g.point(i);
                out[i] = rho.derivative({s[0] - h[0], s[1] - h[1]}, {});
            }
            return out;
        }
        CVec spec(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            const Point u = g.freq_point(j);
            spec[j] = std::polar(1.0, -(u[0] * h[0] + u[1] * h[1])) * rho.spectrum(u);
        }
        return inverse_spectrum(spec, g);
    };
    return t;
}

// <f, rho>, one value per component.
inline CVec pair(const Signal& f, const TestFunction& rho) {
    if (rho.dim != f.dimension()) throw InvalidArgument("pairing across dimensions");
    const std::size_t m = f.components();
    CVec out(m, 0.0);
    if (f.smooth()) {
        const auto& sp = *f.smooth();
        const CVec r = rho.samples(sp.grid);
        check_edges(r, sp.grid, {});
        for (std::size_t c = 0; c < m; ++c) {
            CVec prod(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) prod[i] = sp.components[c][i] * r[i];
            out[c] += quadrature(prod, sp.grid, {.waive = true});
        }
    }
    for (const auto& d : f.diracs()) {
        const cplx v = ((d.order.order() % 2) ? -1.0 : 1.0) * rho.derivative(d.location, d.order);
        for (std::size_t c = 0; c < m; ++c) out[c] += d.weight[c] * v;
    }
    for (const auto& p : f.poly()) {
        const cplx mu = rho.moment(p.power);
        for (std::size_t c = 0; c < m; ++c) out[c] += p.coeff[c] * mu;
    }
    for (const auto& w : f.waves()) {
        const cplx v = rho.spectrum({-w.frequency[0], -w.frequency[1]});
        for (std::size_t c = 0; c < m; ++c) out[c] += w.amplitude[c] * v;
    }
    return out;
}

inline CVec pair(const Signal& f, const Kernel& rho) { return pair(f, as_test_function(rho)); }

// ---- norms ----

enum class NormKind { Lp, Cb, UC, WeightedSup };
enum class ComponentNorm { L1, L2, Linf };

struct NormSpec {
    NormKind kind = NormKind::Cb;
    double p = 2.0;
    double weight_order = 0.0;  // N of the weighted sup norm
    ComponentNorm component = ComponentNorm::L2;

    static NormSpec lp(double p) { return {NormKind::Lp, p, 0.0, ComponentNorm::L2}; }
    static NormSpec cb() { return {NormKind::Cb, 2.0, 0.0, ComponentNorm::L2}; }
    static NormSpec uc() { return {NormKind::UC, 2.0, 0.0, ComponentNorm::L2}; }
    static NormSpec weighted_sup(double n) { return {NormKind::WeightedSup, 2.0, n, ComponentNorm::L2}; }

    void validate() const {
        if (kind == NormKind::Lp && !(p >= 1.0)) throw InvalidArgument("p must lie in [1, inf]");
        if (weight_order < 0.0) throw InvalidArgument("weight order must be nonnegative");
    }
    bool is_sup() const { return kind != NormKind::Lp || std::isinf(p); }
};

inline double component_norm(const std::vector<CVec>& comps, std::size_t i, ComponentNorm kind) {
    double acc = 0.0;
    for (const auto& c : comps) {
        const double a = std::abs(c[i]);
        switch (kind) {
            case ComponentNorm::L1: acc += a; break;
            case ComponentNorm::L2: acc += a * a; break;
            case ComponentNorm::Linf: acc = std::max(acc, a); break;
        }
    }
    return kind == ComponentNorm::L2 ? std::sqrt(acc) : acc;
}

// Pointwise magnitudes |v(x)| under the component norm.
inline std::vector<double> pointwise_norm(const std::vector<CVec>& comps, ComponentNorm kind) {
    const std::size_t n = comps.empty() ? 0 : comps[0].size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = component_norm(comps, i, kind);
    return out;
}

inline double norm_of_magnitudes(const std::vector<double>& mag, const UniformGrid& grid, const NormSpec& spec) {
    spec.validate();
    if (spec.is_sup()) {
        double s = 0.0;
        for (std::size_t i = 0; i < mag.size(); ++i) {
            double w = 1.0;
            if (spec.kind == NormKind::WeightedSup) {
                const Point x = grid.point(i);
                w = std::pow(1.0 + std::hypot(x[0], x[1]), -spec.weight_order);
            }
            s = std::max(s, mag[i] * w);
        }
        return s;
    }
    CVec powered(mag.size());
    for (std::size_t i = 0; i < mag.size(); ++i) powered[i] = std::pow(mag[i], spec.p);
    return std::pow(quadrature(powered, grid, {.waive = true}).real(), 1.0 / spec.p);
}

inline double norm(const std::vector<CVec>& comps, const UniformGrid& grid, const NormSpec& spec) {
    return norm_of_magnitudes(pointwise_norm(comps, spec.component), grid, spec);
}

inline double norm(const CVec& values, const UniformGrid& grid, const NormSpec& spec) {
    return norm(std::vector<CVec>{values}, grid, spec);
}

}  // namespace tsl
