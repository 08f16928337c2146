#pragma once

#include <vector>

#include "lfpp/crossing_params.hpp"
#include "lfpp/geometry.hpp"

namespace lfpp {

/// Isometry-plus-scale mapping the reference frame [0,Gamma] x [0,1] onto a
/// world rectangle that is a copy of some V_l^Gamma.
struct FrameMap {
    Vec2 origin;  // world position of local (0, 0)
    Vec2 ex, ey;  // world images of the local unit vectors, length = scale
    double scale = 1.0;

    static FrameMap onto(const OrientedRect& rect, std::int64_t Gamma) {
        FrameMap f;
        f.scale = rect.width;
        f.ex = rect.axis * f.scale;
        f.ey = rect.side() * f.scale;
        f.origin = rect.to_world(-rect.length / 2, -rect.width / 2);
        require(std::abs(rect.length - Gamma * rect.width) < 1e-9 * rect.length,
                "FrameMap: rectangle is not a V_l^Gamma copy");
        return f;
    }

    Vec2 to_world(Vec2 local) const {
        return {origin.x + ex.x * local.x + ey.x * local.y,
                origin.y + ex.y * local.x + ey.y * local.y};
    }

    Segment to_world(const Segment& s) const { return {to_world(s.a), to_world(s.b)}; }

    OrientedRect to_world(const OrientedRect& r) const {
        OrientedRect o;
        o.center = to_world(r.center);
        const double an = std::hypot(ex.x * r.axis.x + ey.x * r.axis.y,
                                     ex.y * r.axis.x + ey.y * r.axis.y);
        o.axis = {(ex.x * r.axis.x + ey.x * r.axis.y) / an,
                  (ex.y * r.axis.x + ey.y * r.axis.y) / an};
        o.length = r.length * scale;
        o.width = r.width * scale;
        return o;
    }
};

/// Sloped switching gadget at one location, in the local frame.
struct SlopedGadget {
    OrientedRect rect;
    std::int64_t block_count = 0;  // = l_gamma
    bool length_ok = false;        // length <= |c_left - c_right| + 2 Gamma^-1
    bool incidence_ok = false;     // long sides cross the end blocks' long sides
    bool usable = false;           // a switch at this location is admissible
};

/// Strip layout of V^Gamma = [0,Gamma] x [0,1]: the two horizontal strip
/// rows at heights 0.75 / 0.25, their location segments, and the sloped
/// gadgets joining them.  Everything is in the local frame; FrameMap places
/// it inside an arbitrary V_l^Gamma copy.
struct StripLayout {
    StrategyParams params;
    std::vector<Rect> top_strips;     // R_{1,j}, j = 1..locations
    std::vector<Rect> bottom_strips;  // R_{2,j}
    std::vector<SlopedGadget> sloped_top;     // S_{1,j}: top-left to bottom-right
    std::vector<SlopedGadget> sloped_bottom;  // S_{2,j}: reflection of S_{1,j}

    double strip_height() const {
        const double g = static_cast<double>(params.Gamma);
        return 1.0 / (g * g);
    }
    double block_length() const { return 1.0 / static_cast<double>(params.Gamma); }

    /// y-interval base of line i (1 = top at 0.75, 2 = bottom at 0.25).
    static double line_base(int i) { return (i == 1) ? 0.75 : 0.25; }

    Rect strip(int i, std::int64_t j) const {
        return (i == 1) ? top_strips[j - 1] : bottom_strips[j - 1];
    }
    const SlopedGadget& sloped(int i, std::int64_t j) const {
        return (i == 1) ? sloped_top[j - 1] : sloped_bottom[j - 1];
    }

    /// Upper boundary segment of R_{i,j} (the strategy integration path).
    Segment strip_upper_boundary(int i, std::int64_t j) const {
        const Rect& r = strip(i, j);
        return {{r.lo.x, r.hi.y}, {r.hi.x, r.hi.y}};
    }

    /// Block b (0-based) of R_{i,j} as an oriented rectangle.
    OrientedRect strip_block(int i, std::int64_t j, std::int64_t b) const {
        const Rect& r = strip(i, j);
        const double L = block_length();
        OrientedRect o;
        o.axis = {1.0, 0.0};
        o.length = L;
        o.width = strip_height();
        o.center = {r.lo.x + (b + 0.5) * L, (r.lo.y + r.hi.y) / 2};
        return o;
    }

    std::int64_t blocks_per_strip() const { return params.beta * params.Gamma; }

    /// Block b (0-based) of the sloped gadget, counted from the upper end.
    OrientedRect sloped_block(int i, std::int64_t j, std::int64_t b) const {
        const OrientedRect& s = sloped(i, j).rect;
        const double L = block_length();
        const double u0 = -s.length / 2 + b * L;
        return s.slice(u0, u0 + L);
    }
};

namespace crossing_detail {

inline SlopedGadget make_sloped_top(const StrategyParams& p, std::int64_t j) {
    const double inv_g = 1.0 / static_cast<double>(p.Gamma);
    const double h = inv_g * inv_g;
    const double x0 = static_cast<double>(j - 1) * static_cast<double>(p.beta);

    const GadgetGeometry g = gadget_geometry(p.Gamma, p.beta);
    const Vec2 c_left{x0 + g.c_left_x, g.c_left_y};
    const Vec2 c_right{x0 + g.c_right_x, g.c_right_y};
    Vec2 dir = c_right - c_left;
    dir = dir * (1.0 / dir.norm());

    // Extend the segment along its line to the prescribed heights, then
    // stretch symmetrically so that the length is an exact multiple of the
    // block length.  The symmetric split keeps the gadget's own horizontal
    // center line equal to the mirror line of the two strip rows, which
    // makes the reflected gadget land exactly on the opposite blocks.
    const auto at_height = [&](double y) {
        const double t = (y - c_left.y) / dir.y;
        return c_left + dir * t;
    };
    const Vec2 e_up = at_height(g.ext_top_y);
    const Vec2 e_down = at_height(g.ext_bot_y);
    const double raw_len = (e_down - e_up).norm();
    const auto l_gamma = static_cast<std::int64_t>(std::ceil(raw_len * p.Gamma - 1e-9));
    const double len = static_cast<double>(l_gamma) * inv_g;

    SlopedGadget out;
    out.block_count = l_gamma;
    out.rect.center = (e_up + e_down) * 0.5;
    out.rect.axis = dir;
    out.rect.length = len;
    out.rect.width = h;

    out.length_ok = len <= (c_right - c_left).norm() + 2.0 * inv_g + kGeomTol;

    // Lemma-style incidence: each long side of S crosses each long side of
    // the end blocks R_{1,j,left} and R_{2,j,right}.
    const auto block_long_sides = [&](Vec2 c) {
        const double bl = inv_g / 2, bw = h / 2;
        return std::array<Segment, 2>{
            Segment{{c.x - bl, c.y - bw}, {c.x + bl, c.y - bw}},
            Segment{{c.x - bl, c.y + bw}, {c.x + bl, c.y + bw}}};
    };
    out.incidence_ok = true;
    for (const Vec2 c : {c_left, c_right})
        for (const Segment& side : block_long_sides(c))
            for (int which : {0, 1})
                out.incidence_ok &=
                    segment_intersects_segment(out.rect.long_side(which), side);
    return out;
}

inline SlopedGadget reflect_horizontal(const SlopedGadget& g) {
    SlopedGadget out = g;
    out.rect.axis = {g.rect.axis.x, -g.rect.axis.y};
    return out;
}

}  // namespace crossing_detail

/// Build the strip layout for the given parameters.  Gadget predicates are
/// recorded per gadget; a predicate failure on a *usable* gadget (one that
/// the switching strategy may select) is a hard construction error.
inline StripLayout build_layout(const StrategyParams& params) {
    StripLayout lay;
    lay.params = params;
    const auto L = params.locations;
    require(L >= 1, "build_layout: no locations");
    const double beta = static_cast<double>(params.beta);
    const double h = lay.strip_height();

    for (std::int64_t j = 1; j <= L; ++j) {
        const double x0 = (j - 1) * beta;
        lay.top_strips.push_back(Rect{{x0, 0.75}, {x0 + beta, 0.75 + h}});
        lay.bottom_strips.push_back(Rect{{x0, 0.25}, {x0 + beta, 0.25 + h}});
        SlopedGadget top = crossing_detail::make_sloped_top(params, j);
        SlopedGadget bottom = crossing_detail::reflect_horizontal(top);
        // Switches happen at strategy-block boundaries only, never at
        // location 1, and never at the final location.
        const bool boundary = params.switching_feasible &&
                              (j % params.block_size == 0) && j >= 2 && j < L;
        top.usable = bottom.usable = boundary;
        if (boundary && !(top.incidence_ok && top.length_ok && top.block_count == params.l_gamma))
            throw StructuralError("build_layout: usable sloped gadget violates its predicates");
        lay.sloped_top.push_back(top);
        lay.sloped_bottom.push_back(bottom);
    }
    return lay;
}

}  // namespace lfpp
