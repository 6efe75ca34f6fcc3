#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/grid.hpp"

namespace tsl {

// Real samples on a grid, components interleaved per point.
struct GridData {
    UniformGrid grid;
    std::uint32_t components = 1;
    std::vector<double> values;

    double at(std::size_t point, std::size_t comp) const { return values[point * components + comp]; }
};

inline constexpr char kTbrgMagic[6] = {'T', 'B', 'R', 'G', '1', '\0'};

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw FormatError("truncated TBRG1 stream");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace detail

inline void write_tbrg(std::ostream& os, const GridData& data) {
    if (data.values.size() != data.grid.size() * data.components)
        throw FormatError("value count does not match grid and component count");
    os.write(kTbrgMagic, sizeof kTbrgMagic);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(data.grid.dimension()));
    for (const auto& ax : data.grid.axes()) {
        detail::put_le<double>(os, ax.origin);
        detail::put_le<double>(os, ax.spacing);
        detail::put_le<std::uint64_t>(os, ax.count);
    }
    detail::put_le<std::uint32_t>(os, data.components);
    for (double v : data.values) detail::put_le<double>(os, v);
}

inline GridData read_tbrg(std::istream& is) {
    char magic[6];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kTbrgMagic, sizeof magic) != 0)
        throw FormatError("missing TBRG1 magic");
    const auto dim = detail::get_le<std::uint32_t>(is);
    if (dim != 1 && dim != 2) throw FormatError("unsupported dimension " + std::to_string(dim));
    std::vector<Axis> axes;
    for (std::uint32_t a = 0; a < dim; ++a) {
        Axis ax;
        ax.origin = detail::get_le<double>(is);
        ax.spacing = detail::get_le<double>(is);
        ax.count = static_cast<std::size_t>(detail::get_le<std::uint64_t>(is));
        axes.push_back(ax);
    }
    GridData out;
    try {
        out.grid = UniformGrid(std::move(axes));
    } catch (const GridError& e) {
        throw FormatError(e.what());
    }
    out.components = detail::get_le<std::uint32_t>(is);
    if (out.components == 0) throw FormatError("component count must be positive");
    out.values.resize(out.grid.size() * out.components);
    for (auto& v : out.values) v = detail::get_le<double>(is);
    return out;
}

inline void write_tbrg_file(const std::string& path, const GridData& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_tbrg(os, data);
}

inline GridData read_tbrg_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    return read_tbrg(is);
}

// One row per grid point: coordinates, then value components.
inline void write_csv(std::ostream& os, const GridData& data, const std::vector<std::string>& names = {}) {
    const int dim = data.grid.dimension();
    os << (dim == 1 ? "x" : "x1,x2");
    for (std::uint32_t c = 0; c < data.components; ++c)
        os << ',' << (c < names.size() ? names[c] : "v" + std::to_string(c));
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        const Point p = data.grid.point(k);
        os << p[0];
        if (dim == 2) os << ',' << p[1];
        for (std::uint32_t c = 0; c < data.components; ++c) os << ',' << data.at(k, c);
        os << '\n';
    }
}

// Splits complex samples into interleaved (re, im) components.
inline GridData complex_grid_data(const UniformGrid& grid, const CVec& values) {
    GridData d{grid, 2, {}};
    d.values.reserve(values.size() * 2);
    for (const auto& v : values) {
        d.values.push_back(v.real());
        d.values.push_back(v.imag());
    }
    return d;
}

}  // namespace tsl
