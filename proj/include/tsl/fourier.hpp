#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/grid.hpp"

namespace tsl {

inline constexpr double kEdgeTolerance = 1e-10;

struct EdgePolicy {
    bool waive = false;
    double tolerance = kEdgeTolerance;
};

namespace detail {

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Unnormalized in-place DFT; sign = FFTW_FORWARD (e^{-i}) or FFTW_BACKWARD (e^{+i}).
inline void dft_inplace(CVec& data, const UniformGrid& grid, int sign) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (grid.dimension() == 1)
            plan = fftw_plan_dft_1d(static_cast<int>(grid.axis(0).count), buf, buf, sign,
                                    FFTW_ESTIMATE);
        else
            plan = fftw_plan_dft_2d(static_cast<int>(grid.axis(0).count),
                                    static_cast<int>(grid.axis(1).count), buf, buf, sign,
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

inline double checker_sign(const std::array<std::size_t, 2>& ij) {
    return ((ij[0] + ij[1]) & 1u) ? -1.0 : 1.0;
}

inline double origin_dot(const UniformGrid& grid, const Point& u) {
    double s = u[0] * grid.axis(0).origin;
    if (grid.dimension() == 2) s += u[1] * grid.axis(1).origin;
    return s;
}

}  // namespace detail

// Largest boundary magnitude relative to the largest magnitude overall (0 for zero data).
inline double edge_ratio(const CVec& values, const UniformGrid& grid) {
    double peak = 0.0, edge = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double a = std::abs(values[k]);
        peak = std::max(peak, a);
        if (grid.is_boundary(k)) edge = std::max(edge, a);
    }
    return peak > 0.0 ? edge / peak : 0.0;
}

inline void check_edges(const CVec& values, const UniformGrid& grid, const EdgePolicy& policy) {
    if (values.size() != grid.size()) throw GridError("sample count does not match grid");
    if (policy.waive) return;
    const double r = edge_ratio(values, grid);
    if (r > policy.tolerance)
        throw EdgeMassError("boundary samples reach " + std::to_string(r) +
                            " of the maximum (tolerance " + std::to_string(policy.tolerance) + ")");
}

// Samples of the continuous transform  f^(u) = int f(t) e^{-i u.t} dt  on the centred dual grid.
inline CVec forward_spectrum(const CVec& values, const UniformGrid& grid, const EdgePolicy& policy = {}) {
    check_edges(values, grid, policy);
    CVec data(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
        data[k] = values[k] * detail::checker_sign(grid.unflatten(k));
    detail::dft_inplace(data, grid, FFTW_FORWARD);
    const double vol = grid.cell_volume();
    for (std::size_t j = 0; j < data.size(); ++j) {
        const double phase = -detail::origin_dot(grid, grid.freq_point(j));
        data[j] *= vol * std::polar(1.0, phase);
    }
    return data;
}

// Inverse of forward_spectrum:  f(x) = (2 pi)^{-n} int f^(u) e^{i u.x} du.
inline CVec inverse_spectrum(const CVec& spectrum, const UniformGrid& grid) {
    if (spectrum.size() != grid.size()) throw GridError("spectrum size does not match grid");
    CVec data(spectrum.size());
    for (std::size_t j = 0; j < spectrum.size(); ++j)
        data[j] = spectrum[j] * std::polar(1.0, detail::origin_dot(grid, grid.freq_point(j)));
    detail::dft_inplace(data, grid, FFTW_BACKWARD);
    const double scale = 1.0 / (static_cast<double>(grid.size()) * grid.cell_volume());
    for (std::size_t k = 0; k < data.size(); ++k)
        data[k] *= scale * detail::checker_sign(grid.unflatten(k));
    return data;
}

// Trapezoid rule over the grid box (half weights on the outermost samples of each axis).
inline cplx quadrature(const CVec& values, const UniformGrid& grid, const EdgePolicy& policy = {}) {
    check_edges(values, grid, policy);
    cplx sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto ij = grid.unflatten(k);
        double w = 1.0;
        for (int a = 0; a < grid.dimension(); ++a) {
            if (ij[static_cast<std::size_t>(a)] == 0 ||
                ij[static_cast<std::size_t>(a)] + 1 == grid.axis(a).count)
                w *= 0.5;
        }
        sum += w * values[k];
    }
    return sum * grid.cell_volume();
}

inline double grid_l2_norm(const CVec& values, const UniformGrid& grid) {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return std::sqrt(s * grid.cell_volume());
}

inline double spectral_l2_norm(const CVec& spectrum, const UniformGrid& grid) {
    double s = 0.0;
    for (const auto& v : spectrum) s += std::norm(v);
    return std::sqrt(s * grid.freq_cell_volume());
}

// Multilinear interpolation of |spectrum| at frequency u; zero outside the sampled box.
inline double interpolate_magnitude(const CVec& spectrum, const UniformGrid& grid, const Point& u) {
    const int dim = grid.dimension();
    std::array<std::size_t, 2> lo{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        const Axis& ax = grid.axis(a);
        const double pos = u[static_cast<std::size_t>(a)] / ax.freq_spacing() +
                           static_cast<double>(ax.count / 2);
        if (pos < 0.0 || pos > static_cast<double>(ax.count - 1)) return 0.0;
        const double fl = std::min(std::floor(pos), static_cast<double>(ax.count - 2));
        lo[static_cast<std::size_t>(a)] = static_cast<std::size_t>(fl);
        frac[static_cast<std::size_t>(a)] = pos - fl;
    }
    const std::size_t cols = grid.cols();
    if (dim == 1) {
        return (1.0 - frac[0]) * std::abs(spectrum[lo[0]]) + frac[0] * std::abs(spectrum[lo[0] + 1]);
    }
    double acc = 0.0;
    for (int di = 0; di < 2; ++di) {
        for (int dj = 0; dj < 2; ++dj) {
            const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]);
            acc += w * std::abs(spectrum[(lo[0] + di) * cols + lo[1] + dj]);
        }
    }
    return acc;
}

struct RayProfile {
    std::vector<double> radius;
    std::vector<double> magnitude;
};

// |f^(r w)| for r in [0, r_max] with radial step dr (default: a quarter of the finest du).
inline RayProfile ray_samples(const CVec& spectrum, const UniformGrid& grid, const Point& direction,
                              double r_max, double dr = 0.0) {
    const double norm = std::hypot(direction[0], grid.dimension() == 2 ? direction[1] : 0.0);
    if (std::abs(norm - 1.0) > 1e-12) throw InvalidArgument("ray direction must have unit norm");
    if (grid.dimension() == 1 && direction[1] != 0.0)
        throw InvalidArgument("1D ray direction must be +1 or -1");
    if (!(r_max > 0.0)) throw InvalidArgument("r_max must be positive");
    double extent = grid.axis(0).max_freq();
    for (const auto& ax : grid.axes()) extent = std::min(extent, ax.max_freq() - ax.freq_spacing());
    if (r_max > extent + 1e-12) throw InvalidArgument("r_max exceeds the spectral grid extent");
    if (dr <= 0.0) dr = 0.25 * grid.min_freq_spacing();
    RayProfile out;
    const auto n = static_cast<std::size_t>(std::floor(r_max / dr + 1e-9)) + 1;
    out.radius.resize(n);
    out.magnitude.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::min(r_max, static_cast<double>(k) * dr);
        out.radius[k] = r;
        out.magnitude[k] = interpolate_magnitude(spectrum, grid, {r * direction[0], r * direction[1]});
    }
    return out;
}

}  // namespace tsl
