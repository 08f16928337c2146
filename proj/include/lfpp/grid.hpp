#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lfpp/errors.hpp"
#include "lfpp/geometry.hpp"

namespace lfpp {

/// Regular grid of cell centers: cell (i, j) sits at origin + (i, j) * mesh.
struct GridSpec {
    std::uint32_t width = 0;   // cells along x
    std::uint32_t height = 0;  // cells along y
    double mesh = 0.0;         // lattice spacing, world units
    Vec2 origin{0.0, 0.0};     // world coordinates of cell (0, 0)

    GridSpec() = default;
    GridSpec(std::uint32_t w, std::uint32_t h, double m, Vec2 o = {0.0, 0.0})
        : width(w), height(h), mesh(m), origin(o) {
        require(w >= 1 && h >= 1, "GridSpec: width and height must be >= 1");
        require(m > 0.0, "GridSpec: mesh must be positive");
    }

    std::size_t cells() const {
        return static_cast<std::size_t>(width) * height;
    }
    Vec2 cell_center(std::uint32_t i, std::uint32_t j) const {
        return {origin.x + i * mesh, origin.y + j * mesh};
    }
    std::size_t index(std::uint32_t i, std::uint32_t j) const {
        return static_cast<std::size_t>(j) * width + i;
    }

    /// Grid whose cell centers cover `box` with `margin` extra cells on
    /// every side.  Centers are anchored to multiples of mesh.
    static GridSpec covering(const Rect& box, double mesh, std::uint32_t margin = 1) {
        const auto lo_i = static_cast<std::int64_t>(std::floor(box.lo.x / mesh)) - margin;
        const auto lo_j = static_cast<std::int64_t>(std::floor(box.lo.y / mesh)) - margin;
        const auto hi_i = static_cast<std::int64_t>(std::ceil(box.hi.x / mesh)) + margin;
        const auto hi_j = static_cast<std::int64_t>(std::ceil(box.hi.y / mesh)) + margin;
        return GridSpec(static_cast<std::uint32_t>(hi_i - lo_i + 1),
                        static_cast<std::uint32_t>(hi_j - lo_j + 1), mesh,
                        {lo_i * mesh, lo_j * mesh});
    }

    bool operator==(const GridSpec& o) const {
        return width == o.width && height == o.height && mesh == o.mesh &&
               origin.x == o.origin.x && origin.y == o.origin.y;
    }
};

/// Scale band (delta, delta'], 0 < delta <= delta' <= 1.
struct Band {
    double delta = 1.0;
    double delta_prime = 1.0;

    void validate() const {
        require(delta > 0.0 && delta <= delta_prime && delta_prime <= 1.0,
                "Band: need 0 < delta <= delta' <= 1");
    }
};

enum class Generator : std::uint8_t {
    EtaBand = 0,
    DgffExact = 1,
    DgffBand = 2,
};

/// A real-valued field sampled on a grid, tagged with its provenance.
struct FieldSample {
    GridSpec grid;
    std::vector<double> values;  // row-major, values[j*width + i]
    Band band;
    Generator generator = Generator::EtaBand;
    std::uint64_t seed = 0;

    double at(std::uint32_t i, std::uint32_t j) const {
        return values[grid.index(i, j)];
    }
    double& at(std::uint32_t i, std::uint32_t j) {
        return values[grid.index(i, j)];
    }

    /// Bilinear interpolation; `p` must lie within the cell-center hull.
    double interpolate(Vec2 p) const {
        const double u = (p.x - grid.origin.x) / grid.mesh;
        const double v = (p.y - grid.origin.y) / grid.mesh;
        if (u < -1e-9 || v < -1e-9 || u > grid.width - 1 + 1e-9 ||
            v > grid.height - 1 + 1e-9)
            throw DomainError("FieldSample: interpolation point outside grid");
        const double uc = std::clamp(u, 0.0, static_cast<double>(grid.width - 1));
        const double vc = std::clamp(v, 0.0, static_cast<double>(grid.height - 1));
        auto i0 = static_cast<std::uint32_t>(uc);
        auto j0 = static_cast<std::uint32_t>(vc);
        if (i0 >= grid.width - 1 && grid.width > 1) i0 = grid.width - 2;
        if (j0 >= grid.height - 1 && grid.height > 1) j0 = grid.height - 2;
        const std::uint32_t i1 = (grid.width > 1) ? i0 + 1 : i0;
        const std::uint32_t j1 = (grid.height > 1) ? j0 + 1 : j0;
        const double fu = uc - i0, fv = vc - j0;
        return (1 - fu) * (1 - fv) * at(i0, j0) + fu * (1 - fv) * at(i1, j0) +
               (1 - fu) * fv * at(i0, j1) + fu * fv * at(i1, j1);
    }

    /// World region in which interpolate() is defined.
    Rect domain() const {
        return {grid.origin,
                {grid.origin.x + (grid.width - 1) * grid.mesh,
                 grid.origin.y + (grid.height - 1) * grid.mesh}};
    }

    void check_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) throw NumericError("FieldSample: non-finite value");
    }
};

}  // namespace lfpp
