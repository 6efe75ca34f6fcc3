#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "tsl/errors.hpp"

namespace tsl {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using Point = std::array<double, 2>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Default cap on the number of points a grid may hold.
inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 22;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

struct Axis {
    double origin = 0.0;
    double spacing = 1.0;
    std::size_t count = 8;

    double coord(std::size_t k) const { return origin + static_cast<double>(k) * spacing; }
    double length() const { return spacing * static_cast<double>(count); }
    double freq_spacing() const { return kTwoPi / (static_cast<double>(count) * spacing); }
    // Frequencies are centred: u_j = (j - N/2) du.
    double freq(std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(count / 2)) * freq_spacing();
    }
    double max_freq() const { return static_cast<double>(count / 2) * freq_spacing(); }
};

class UniformGrid {
public:
    UniformGrid() = default;

    explicit UniformGrid(std::vector<Axis> axes, std::size_t budget = kDefaultPointBudget)
        : axes_(std::move(axes)) {
        if (axes_.empty() || axes_.size() > 2)
            throw GridError("dimension must be 1 or 2");
        std::size_t total = 1;
        for (const auto& a : axes_) {
            if (!(a.spacing > 0.0) || !std::isfinite(a.spacing))
                throw GridError("spacing must be positive");
            if (a.count < 8) throw GridError("count must be at least 8 per axis");
            if (!is_power_of_two(a.count)) throw GridError("count must be a power of two");
            total *= a.count;
        }
        if (total > budget)
            throw GridError("grid of " + std::to_string(total) + " points exceeds budget " +
                            std::to_string(budget));
    }

    // Line grid covering [lo, hi) with n points.
    static UniformGrid line(double lo, double hi, std::size_t n) {
        return UniformGrid({Axis{lo, (hi - lo) / static_cast<double>(n), n}});
    }
    static UniformGrid square(double lo, double hi, std::size_t n) {
        const Axis a{lo, (hi - lo) / static_cast<double>(n), n};
        return UniformGrid({a, a});
    }

    int dimension() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
    const std::vector<Axis>& axes() const { return axes_; }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes_) n *= a.count;
        return n;
    }
    std::size_t cols() const { return axes_.size() == 2 ? axes_[1].count : 1; }

    // Row-major: the last axis varies fastest.
    std::array<std::size_t, 2> unflatten(std::size_t flat) const {
        if (axes_.size() == 1) return {flat, 0};
        return {flat / axes_[1].count, flat % axes_[1].count};
    }

    Point point(std::size_t flat) const {
        const auto ij = unflatten(flat);
        Point p{axes_[0].coord(ij[0]), 0.0};
        if (axes_.size() == 2) p[1] = axes_[1].coord(ij[1]);
        return p;
    }
    Point freq_point(std::size_t flat) const {
        const auto ij = unflatten(flat);
        Point p{axes_[0].freq(ij[0]), 0.0};
        if (axes_.size() == 2) p[1] = axes_[1].freq(ij[1]);
        return p;
    }

    double cell_volume() const {
        double v = 1.0;
        for (const auto& a : axes_) v *= a.spacing;
        return v;
    }
    double freq_cell_volume() const {
        double v = 1.0;
        for (const auto& a : axes_) v *= a.freq_spacing();
        return v;
    }
    double min_freq_spacing() const {
        double d = axes_[0].freq_spacing();
        for (const auto& a : axes_) d = std::min(d, a.freq_spacing());
        return d;
    }
    double max_spacing() const {
        double d = 0.0;
        for (const auto& a : axes_) d = std::max(d, a.spacing);
        return d;
    }
    double max_freq() const {
        double m = axes_[0].max_freq();
        for (const auto& a : axes_) m = std::min(m, a.max_freq());
        return m;
    }

    bool is_boundary(std::size_t flat) const {
        const auto ij = unflatten(flat);
        for (std::size_t a = 0; a < axes_.size(); ++a) {
            if (ij[a] == 0 || ij[a] + 1 == axes_[a].count) return true;
        }
        return false;
    }

    bool operator==(const UniformGrid& o) const {
        if (axes_.size() != o.axes_.size()) return false;
        for (std::size_t a = 0; a < axes_.size(); ++a) {
            if (axes_[a].origin != o.axes_[a].origin || axes_[a].spacing != o.axes_[a].spacing ||
                axes_[a].count != o.axes_[a].count)
                return false;
        }
        return true;
    }

private:
    std::vector<Axis> axes_;
};

// Geometric scale samples with log-measure cell weights (trapezoid in log y).
class ScaleLadder {
public:
    ScaleLadder() = default;
    ScaleLadder(double y_min, double y_max, std::size_t count) : y_min_(y_min), y_max_(y_max) {
        if (!(y_min > 0.0) || !(y_max > y_min)) throw InvalidArgument("ladder needs 0 < y_min < y_max");
        if (count < 2) throw InvalidArgument("ladder needs at least 2 scales");
        step_ = std::log(y_max / y_min) / static_cast<double>(count - 1);
        scales_.resize(count);
        weights_.assign(count, step_);
        for (std::size_t j = 0; j < count; ++j)
            scales_[j] = y_min * std::exp(step_ * static_cast<double>(j));
        scales_.back() = y_max;
        weights_.front() = weights_.back() = 0.5 * step_;
    }

    static ScaleLadder per_decade(double y_min, double y_max, double per_decade) {
        const double decades = std::log10(y_max / y_min);
        const auto n = static_cast<std::size_t>(std::llround(decades * per_decade)) + 1;
        return ScaleLadder(y_min, y_max, std::max<std::size_t>(n, 2));
    }

    // Same span with twice the density.
    ScaleLadder refined() const { return ScaleLadder(y_min_, y_max_, 2 * (size() - 1) + 1); }

    std::size_t size() const { return scales_.size(); }
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }
    double log_step() const { return step_; }
    double operator[](std::size_t j) const { return scales_[j]; }
    const std::vector<double>& scales() const { return scales_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    double y_min_ = 0.0, y_max_ = 0.0, step_ = 0.0;
    std::vector<double> scales_, weights_;
};

}  // namespace tsl
