#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "lfpp/errors.hpp"
#include "lfpp/grid.hpp"

namespace lfpp {

/// Lattice vertex by cell coordinates.
struct Vertex {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    bool operator==(const Vertex& o) const { return i == o.i && j == o.j; }
};

/// Grid vertices carrying positive weights w(v) = exp(scale * gamma * eta(v)).
/// The distance of a path is the sum of the weights of all its vertices,
/// both endpoints included.
struct WeightedLattice {
    GridSpec grid;
    double gamma = 0.0;
    double exponent_scale = 1.0;
    std::vector<double> weights;

    static WeightedLattice from_field(const FieldSample& field, double gamma,
                                      double exponent_scale = 1.0) {
        WeightedLattice lat;
        lat.grid = field.grid;
        lat.gamma = gamma;
        lat.exponent_scale = exponent_scale;
        lat.weights.resize(field.values.size());
        for (std::size_t k = 0; k < field.values.size(); ++k) {
            lat.weights[k] = std::exp(exponent_scale * gamma * field.values[k]);
            if (!(lat.weights[k] > 0.0) || !std::isfinite(lat.weights[k]))
                throw NumericError("WeightedLattice: weight not positive finite");
        }
        return lat;
    }

    double weight(Vertex v) const { return weights[grid.index(v.i, v.j)]; }
    std::size_t index(Vertex v) const { return grid.index(v.i, v.j); }
    bool in_grid(Vertex v) const { return v.i < grid.width && v.j < grid.height; }
};

struct LatticePath {
    std::vector<Vertex> vertices;
};

struct GeodesicResult {
    double distance = 0.0;
    LatticePath path;
    std::uint64_t expanded = 0;  // settled vertices during the search
};

using RegionPredicate = std::function<bool(Vertex)>;

/// Path weight: left-to-right sum of vertex weights in path order.
/// Validates 4-adjacency and simplicity.
inline double path_weight(const WeightedLattice& lat, const LatticePath& p) {
    if (p.vertices.empty()) throw StructuralError("path_weight: empty path");
    std::vector<char> seen(lat.grid.cells(), 0);
    double acc = 0.0;
    for (std::size_t k = 0; k < p.vertices.size(); ++k) {
        const Vertex v = p.vertices[k];
        if (!lat.in_grid(v)) throw StructuralError("path_weight: vertex outside lattice");
        if (seen[lat.index(v)]) throw StructuralError("path_weight: repeated vertex");
        seen[lat.index(v)] = 1;
        if (k > 0) {
            const Vertex u = p.vertices[k - 1];
            const int di = std::abs(static_cast<int>(v.i) - static_cast<int>(u.i));
            const int dj = std::abs(static_cast<int>(v.j) - static_cast<int>(u.j));
            if (di + dj != 1) throw StructuralError("path_weight: not 4-adjacent");
        }
        acc += lat.weight(v);
    }
    return acc;
}

/// Dijkstra over vertex weights.  Relaxation cost is the weight of the
/// entered vertex; the source is initialized with its own weight; v == w
/// short-circuits to 0 per the distance definition.  Ties in the queue are
/// broken by lexicographic vertex order for deterministic geodesics.
///
/// The search always runs from the lexicographically smaller endpoint, so
/// the accumulated float sum -- and hence the returned distance -- is
/// bit-identical under endpoint exchange.  The returned path runs in that
/// canonical direction; its endpoints are the query endpoints as a set.
inline GeodesicResult fpp_distance(const WeightedLattice& lat, Vertex v, Vertex w,
                                   const RegionPredicate& region = {}) {
    require(lat.in_grid(v) && lat.in_grid(w), "fpp_distance: endpoint outside lattice");
    if (region && (!region(v) || !region(w)))
        throw DomainError("fpp_distance: endpoint outside region");
    GeodesicResult res;
    if (v == w) {
        res.path.vertices = {v};
        return res;
    }
    if (lat.index(w) < lat.index(v)) std::swap(v, w);

    const std::size_t n = lat.grid.cells();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<std::uint32_t> parent(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<char> settled(n, 0);

    struct Item {
        double d;
        std::uint32_t idx;
        bool operator>(const Item& o) const {
            return d > o.d || (d == o.d && idx > o.idx);
        }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;

    const auto vi = static_cast<std::uint32_t>(lat.index(v));
    const auto wi = static_cast<std::uint32_t>(lat.index(w));
    dist[vi] = lat.weight(v);
    queue.push({dist[vi], vi});

    const std::uint32_t W = lat.grid.width, H = lat.grid.height;
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        ++res.expanded;
        if (u == wi) break;
        const std::uint32_t ui = u % W, uj = u / W;
        const auto relax = [&](std::uint32_t ni, std::uint32_t nj) {
            const std::uint32_t nu = nj * W + ni;
            if (settled[nu]) return;
            if (region && !region({ni, nj})) return;
            const double nd = d + lat.weights[nu];
            if (nd < dist[nu] || (nd == dist[nu] && u < parent[nu])) {
                dist[nu] = nd;
                parent[nu] = u;
                queue.push({nd, nu});
            }
        };
        if (ui + 1 < W) relax(ui + 1, uj);
        if (ui > 0) relax(ui - 1, uj);
        if (uj + 1 < H) relax(ui, uj + 1);
        if (uj > 0) relax(ui, uj - 1);
    }

    if (!settled[wi])
        throw UnreachableError("fpp_distance: endpoints disconnected within region");
    res.distance = dist[wi];
    for (std::uint32_t cur = wi;;) {
        res.path.vertices.push_back({cur % W, cur / W});
        if (cur == vi) break;
        cur = parent[cur];
    }
    std::reverse(res.path.vertices.begin(), res.path.vertices.end());
    return res;
}

/// Hop count of the shortest lattice path (gamma = 0 oracle).
inline std::uint64_t bfs_oracle(const WeightedLattice& lat, Vertex v, Vertex w,
                                const RegionPredicate& region = {}) {
    require(lat.in_grid(v) && lat.in_grid(w), "bfs_oracle: endpoint outside lattice");
    if (v == w) return 0;
    const std::uint32_t W = lat.grid.width, H = lat.grid.height;
    std::vector<std::uint64_t> hops(lat.grid.cells(),
                                    std::numeric_limits<std::uint64_t>::max());
    std::queue<std::uint32_t> q;
    const auto vi = static_cast<std::uint32_t>(lat.index(v));
    const auto wi = static_cast<std::uint32_t>(lat.index(w));
    hops[vi] = 0;
    q.push(vi);
    while (!q.empty()) {
        const std::uint32_t u = q.front();
        q.pop();
        if (u == wi) return hops[u];
        const std::uint32_t ui = u % W, uj = u / W;
        const auto visit = [&](std::uint32_t ni, std::uint32_t nj) {
            const std::uint32_t nu = nj * W + ni;
            if (hops[nu] != std::numeric_limits<std::uint64_t>::max()) return;
            if (region && !region({ni, nj})) return;
            hops[nu] = hops[u] + 1;
            q.push(nu);
        };
        if (ui + 1 < W) visit(ui + 1, uj);
        if (ui > 0) visit(ui - 1, uj);
        if (uj + 1 < H) visit(ui, uj + 1);
        if (uj > 0) visit(ui, uj - 1);
    }
    throw UnreachableError("bfs_oracle: endpoints disconnected");
}

/// Exact minimum over all simple paths by enumeration.  Lattices only up
/// to 4x4 vertices; the accumulation direction is canonicalized exactly as
/// in fpp_distance, so agreement is exact, not approximate.
inline double exhaustive_oracle(const WeightedLattice& lat, Vertex v, Vertex w) {
    if (lat.grid.cells() > 16)
        throw CapacityError("exhaustive_oracle: lattice larger than 4x4");
    require(lat.in_grid(v) && lat.in_grid(w), "exhaustive_oracle: endpoint outside lattice");
    if (v == w) return 0.0;
    if (lat.index(w) < lat.index(v)) std::swap(v, w);
    const std::uint32_t W = lat.grid.width, H = lat.grid.height;
    const auto wi = lat.index(w);
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> used(lat.grid.cells(), 0);

    const std::function<void(std::uint32_t, std::uint32_t, double)> dfs =
        [&](std::uint32_t ui, std::uint32_t uj, double acc) {
            const std::size_t u = lat.grid.index(ui, uj);
            if (acc >= best) return;  // weights are positive; safe pruning
            if (u == wi) {
                best = acc;
                return;
            }
            used[u] = 1;
            if (ui + 1 < W && !used[lat.grid.index(ui + 1, uj)])
                dfs(ui + 1, uj, acc + lat.weights[lat.grid.index(ui + 1, uj)]);
            if (ui > 0 && !used[lat.grid.index(ui - 1, uj)])
                dfs(ui - 1, uj, acc + lat.weights[lat.grid.index(ui - 1, uj)]);
            if (uj + 1 < H && !used[lat.grid.index(ui, uj + 1)])
                dfs(ui, uj + 1, acc + lat.weights[lat.grid.index(ui, uj + 1)]);
            if (uj > 0 && !used[lat.grid.index(ui, uj - 1)])
                dfs(ui, uj - 1, acc + lat.weights[lat.grid.index(ui, uj - 1)]);
            used[u] = 0;
        };
    dfs(v.i, v.j, lat.weight(v));
    if (!std::isfinite(best)) throw UnreachableError("exhaustive_oracle: no path");
    return best;
}

}  // namespace lfpp
