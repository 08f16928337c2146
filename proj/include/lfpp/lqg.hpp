#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

#include "lfpp/errors.hpp"
#include "lfpp/grid.hpp"

namespace lfpp {

struct Ball {
    Vec2 center;
    double radius = 0.0;
};

/// Discretized LQG measure on the unit square: per-cell masses
/// m(cell) = exp(gamma h(z_cell)) 2^{-n gamma^2 / 2} (cell area) on the
/// 2^n x 2^n grid, with a dyadic subtree-sum index for ball queries.
class LqgGrid {
public:
    LqgGrid(const FieldSample& field, double gamma, int n) : n_(n), gamma_(gamma) {
        require(n >= 1 && n <= 14, "LqgGrid: n out of range");
        const auto side = static_cast<std::uint32_t>(1u << n);
        const double mesh = std::exp2(-n);
        grid_ = GridSpec(side, side, mesh, {mesh / 2, mesh / 2});
        if (!(field.grid == grid_))
            throw DomainError("LqgGrid: field must live on the 2^n x 2^n unit-square grid");
        if (field.band.delta > mesh + 1e-15)
            throw DomainError("LqgGrid: field band does not reach 2^-n");

        const double norm = std::exp2(-n * gamma * gamma / 2.0) * mesh * mesh;
        levels_.resize(n + 1);
        auto& leaves = levels_[n];
        leaves.resize(grid_.cells());
        for (std::size_t c = 0; c < leaves.size(); ++c)
            leaves[c] = std::exp(gamma * field.values[c]) * norm;
        for (int l = n - 1; l >= 0; --l) {
            const std::size_t s = std::size_t{1} << l;
            levels_[l].resize(s * s);
            const auto& child = levels_[l + 1];
            for (std::size_t j = 0; j < s; ++j)
                for (std::size_t i = 0; i < s; ++i) {
                    const std::size_t cw = 2 * s;
                    const double c00 = child[(2 * j) * cw + 2 * i];
                    const double c10 = child[(2 * j) * cw + 2 * i + 1];
                    const double c01 = child[(2 * j + 1) * cw + 2 * i];
                    const double c11 = child[(2 * j + 1) * cw + 2 * i + 1];
                    levels_[l][j * s + i] = ((c00 + c10) + c01) + c11;
                }
        }
    }

    int n() const { return n_; }
    double gamma() const { return gamma_; }
    const GridSpec& grid() const { return grid_; }
    double total_mass() const { return levels_[0][0]; }
    const std::vector<double>& masses() const { return levels_[n_]; }

    /// Max relative deviation of any node sum from its children's sum.
    double quadtree_residual() const {
        double worst = 0.0;
        for (int l = 0; l < n_; ++l) {
            const std::size_t s = std::size_t{1} << l;
            for (std::size_t j = 0; j < s; ++j)
                for (std::size_t i = 0; i < s; ++i) {
                    const auto& child = levels_[l + 1];
                    const std::size_t cw = 2 * s;
                    const double sum = ((child[(2 * j) * cw + 2 * i] +
                                         child[(2 * j) * cw + 2 * i + 1]) +
                                        child[(2 * j + 1) * cw + 2 * i]) +
                                       child[(2 * j + 1) * cw + 2 * i + 1];
                    const double node = levels_[l][j * s + i];
                    if (node != 0.0)
                        worst = std::max(worst, std::abs(node - sum) / std::abs(node));
                }
        }
        return worst;
    }

    /// Mass of the cells whose centers lie in the closed ball, via quadtree
    /// pruning (nodes fully inside summed wholesale, disjoint skipped).
    double ball_mass(const Ball& b) const {
        require(b.radius > 0.0, "ball_mass: radius must be positive");
        return descend(b, 0, 0, 0);
    }

private:
    double descend(const Ball& b, int l, std::size_t i, std::size_t j) const {
        // Bounding box of the node's cell centers.
        const std::size_t span = std::size_t{1} << (n_ - l);
        const double mesh = grid_.mesh;
        const double x0 = (i * span + 0.5) * mesh, x1 = ((i + 1) * span - 0.5) * mesh;
        const double y0 = (j * span + 0.5) * mesh, y1 = ((j + 1) * span - 0.5) * mesh;

        const double nx = std::clamp(b.center.x, x0, x1);
        const double ny = std::clamp(b.center.y, y0, y1);
        const double near2 = (nx - b.center.x) * (nx - b.center.x) +
                             (ny - b.center.y) * (ny - b.center.y);
        if (near2 > b.radius * b.radius) return 0.0;

        const double fx = std::max(std::abs(x0 - b.center.x), std::abs(x1 - b.center.x));
        const double fy = std::max(std::abs(y0 - b.center.y), std::abs(y1 - b.center.y));
        if (fx * fx + fy * fy <= b.radius * b.radius)
            return levels_[l][j * (std::size_t{1} << l) + i];

        if (l == n_) return 0.0;  // leaf center outside (near2 check passed exactly?)
        // Note: at the leaf, near2 == center distance, so we only get here
        // for internal nodes.
        return ((descend(b, l + 1, 2 * i, 2 * j) + descend(b, l + 1, 2 * i + 1, 2 * j)) +
                descend(b, l + 1, 2 * i, 2 * j + 1)) +
               descend(b, l + 1, 2 * i + 1, 2 * j + 1);
    }

    int n_;
    double gamma_;
    GridSpec grid_;
    std::vector<std::vector<double>> levels_;
};

inline LqgGrid build_measure(const FieldSample& field, double gamma, int n) {
    return LqgGrid(field, gamma, n);
}

// ---------------------------------------------------------------------------
// Dyadic covering of a segment (the recursive ball-family scheme).

struct CoverResult {
    std::vector<Ball> balls;
    std::vector<double> masses;
    std::size_t count = 0;
    bool certified = false;
    bool uncovered = false;  // recursion cap reached with oversized leaves
};

/// Cover an axis-aligned segment with dyadic balls: level k uses balls of
/// radius 2^-(k+1) centered at start + (j + 1/2) 2^-k along the segment; a
/// ball is included when its mass is <= delta^2 while its parent's (level
/// k-1, index j/2) exceeds delta^2.  Recursion is capped at the grid level.
inline CoverResult cover_segment(const LqgGrid& g, double delta, const Segment& seg) {
    require(delta > 0.0 && delta < 1.0, "cover_segment: delta must be in (0,1)");
    const double len = seg.length();
    require(len > 0.0, "cover_segment: degenerate segment");
    const Vec2 d = seg.dir();
    require(std::abs(d.x) < 1e-12 || std::abs(d.y) < 1e-12,
            "cover_segment: segment must be axis-aligned");
    const Vec2 dir = d * (1.0 / len);
    const double dd = delta * delta;

    // Coarsest level whose balls fit inside the unit square around the segment.
    const double margin = std::min(
        std::min(std::min(seg.a.x, seg.a.y), std::min(1.0 - seg.a.x, 1.0 - seg.a.y)),
        std::min(std::min(seg.b.x, seg.b.y), std::min(1.0 - seg.b.x, 1.0 - seg.b.y)));
    int k0 = 1;
    while (std::exp2(-k0 - 1) > margin + 1e-15) {
        ++k0;
        if (k0 > g.n()) throw DomainError("cover_segment: segment too close to the boundary");
    }

    CoverResult out;
    struct Item {
        int k;
        std::int64_t j;
    };
    std::vector<Item> stack;
    const auto top_count = static_cast<std::int64_t>(std::ceil(len * std::exp2(k0) - 1e-9));
    for (std::int64_t j = top_count - 1; j >= 0; --j) stack.push_back({k0, j});
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const double r = std::exp2(-it.k - 1);
        const Ball b{seg.a + dir * ((static_cast<double>(it.j) + 0.5) * std::exp2(-it.k)), r};
        const double mass = g.ball_mass(b);
        if (mass <= dd) {
            out.balls.push_back(b);
            out.masses.push_back(mass);
        } else if (it.k >= g.n()) {
            out.uncovered = true;  // oversized leaf at the resolution cap
        } else {
            stack.push_back({it.k + 1, 2 * it.j + 1});
            stack.push_back({it.k + 1, 2 * it.j});
        }
    }
    out.count = out.balls.size();

    if (!out.uncovered) {
        out.certified = true;
        const double probe = g.grid().mesh / 4;
        const auto steps = static_cast<std::size_t>(std::ceil(len / probe));
        for (std::size_t s = 0; s <= steps && out.certified; ++s) {
            const Vec2 p = seg.a + dir * (len * static_cast<double>(s) /
                                          static_cast<double>(steps));
            bool hit = false;
            for (const Ball& b : out.balls)
                if ((p - b.center).norm() <= b.radius + 1e-12) {
                    hit = true;
                    break;
                }
            out.certified = hit;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Liouville graph distance (dyadic-candidate upper bound).

struct GraphDistanceResult {
    std::size_t count = 0;
    std::vector<Ball> chain;
    bool dyadic_upper_bound = true;  // candidate set restricted to dyadic balls
};

/// Minimum number of passing dyadic balls forming a connected chain from a
/// ball containing v to one containing w.  Candidates: centers on the 2^-k
/// grid, radius 2^-(k+1), k = 1..n, restricted to balls inside the unit
/// square within a corridor around the v-w segment.  Balls that contain no
/// cell center (discrete mass 0, unresolvable at this grid) are not
/// admissible.  This is an upper bound on the graph distance over all
/// rational-center balls.
inline GraphDistanceResult graph_distance(const LqgGrid& g, double delta, Vec2 v, Vec2 w,
                                          double corridor = 0.2) {
    GraphDistanceResult res;
    if (v.x == w.x && v.y == w.y) return res;  // D(v, v) = 0
    require(delta >= std::exp2(-g.n() + 2),
            "graph_distance: delta below the resolution guard 2^(2-n)");
    const double dd = delta * delta;
    const Segment axis{v, w};

    struct Cand {
        Ball ball;
        std::int32_t state = 0;  // 0 unvisited, else BFS depth
    };
    std::vector<Cand> cands;
    for (int k = 1; k <= g.n(); ++k) {
        const double r = std::exp2(-k - 1);
        const double spacing = std::exp2(-k);
        const auto lo = static_cast<std::int64_t>(1);
        const auto hi = static_cast<std::int64_t>((std::int64_t{1} << k) - 1);
        // enumerate grid centers near the corridor only
        const double reach = corridor + r;
        const auto il0 = std::max(lo, static_cast<std::int64_t>(
                                          std::floor((std::min(v.x, w.x) - reach) / spacing)));
        const auto il1 = std::min(hi, static_cast<std::int64_t>(
                                          std::ceil((std::max(v.x, w.x) + reach) / spacing)));
        const auto jl0 = std::max(lo, static_cast<std::int64_t>(
                                          std::floor((std::min(v.y, w.y) - reach) / spacing)));
        const auto jl1 = std::min(hi, static_cast<std::int64_t>(
                                          std::ceil((std::max(v.y, w.y) + reach) / spacing)));
        for (std::int64_t j = jl0; j <= jl1; ++j)
            for (std::int64_t i = il0; i <= il1; ++i) {
                const Ball b{{i * spacing, j * spacing}, r};
                if (b.center.x < r || b.center.x > 1 - r || b.center.y < r ||
                    b.center.y > 1 - r)
                    continue;  // ball must stay inside the domain
                if (dist_point_segment(b.center, axis) > corridor + r) continue;
                const double mass = g.ball_mass(b);
                if (mass > 0.0 && mass <= dd) cands.push_back({b, 0});
            }
    }
    if (cands.empty()) throw UnreachableError("graph_distance: no admissible balls");

    // Bucket index on ball centers for neighbor lookups.
    const double cell = std::exp2(-g.n());
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    const auto key = [&](double x, double y) {
        const auto ix = static_cast<std::int64_t>(std::floor(x / cell));
        const auto iy = static_cast<std::int64_t>(std::floor(y / cell));
        return static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
               static_cast<std::uint64_t>(iy);
    };
    for (std::size_t c = 0; c < cands.size(); ++c)
        buckets[key(cands[c].ball.center.x, cands[c].ball.center.y)].push_back(c);

    std::queue<std::size_t> frontier;
    std::vector<std::int32_t> parent(cands.size(), -1);
    for (std::size_t c = 0; c < cands.size(); ++c)
        if ((v - cands[c].ball.center).norm() <= cands[c].ball.radius) {
            cands[c].state = 1;
            frontier.push(c);
        }
    if (frontier.empty())
        throw UnreachableError("graph_distance: no admissible ball contains v");

    std::int32_t goal = -1;
    while (!frontier.empty() && goal < 0) {
        const std::size_t cur = frontier.front();
        frontier.pop();
        const Ball& cb = cands[cur].ball;
        if ((w - cb.center).norm() <= cb.radius) {
            goal = static_cast<std::int32_t>(cur);
            break;
        }
        const double reach = cb.radius + 0.5;  // r1 + max candidate radius (<= 1/4) padded
        const auto c0x = static_cast<std::int64_t>(std::floor((cb.center.x - reach) / cell));
        const auto c1x = static_cast<std::int64_t>(std::floor((cb.center.x + reach) / cell));
        const auto c0y = static_cast<std::int64_t>(std::floor((cb.center.y - reach) / cell));
        const auto c1y = static_cast<std::int64_t>(std::floor((cb.center.y + reach) / cell));
        for (std::int64_t jy = c0y; jy <= c1y; ++jy)
            for (std::int64_t jx = c0x; jx <= c1x; ++jx) {
                auto it = buckets.find(static_cast<std::uint64_t>(jx) * 0x9e3779b97f4a7c15ULL ^
                                       static_cast<std::uint64_t>(jy));
                if (it == buckets.end()) continue;
                auto& vec = it->second;
                for (std::size_t t = 0; t < vec.size();) {
                    const std::size_t other = vec[t];
                    if (cands[other].state != 0) {
                        vec[t] = vec.back();
                        vec.pop_back();
                        continue;
                    }
                    const Ball& ob = cands[other].ball;
                    if ((ob.center - cb.center).norm() <= ob.radius + cb.radius) {
                        cands[other].state = cands[cur].state + 1;
                        parent[other] = static_cast<std::int32_t>(cur);
                        frontier.push(other);
                        vec[t] = vec.back();
                        vec.pop_back();
                        continue;
                    }
                    ++t;
                }
            }
    }
    if (goal < 0)
        throw UnreachableError("graph_distance: no admissible chain at this resolution");
    res.count = static_cast<std::size_t>(cands[goal].state);
    for (std::int32_t c = goal; c >= 0; c = parent[c]) res.chain.push_back(cands[c].ball);
    std::reverse(res.chain.begin(), res.chain.end());
    return res;
}

}  // namespace lfpp
