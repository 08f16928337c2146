#pragma once

#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "lfpp/geometry.hpp"

namespace lfpp {

enum class SegmentRole : std::uint8_t {
    StripBlock = 0,
    SlopedBlock = 1,
    TieGadget = 2,
};

/// A finite collection of directed segments with selection indicators whose
/// selected union forms a connected set (the crossing object).  Segments
/// carry the recursion node that created them, so sub-crossings can be
/// extracted for local analysis.
struct Polypath {
    struct Node {
        std::int32_t parent = -1;
        OrientedRect rect;
        int depth = 0;
    };

    std::vector<Segment> segments;
    std::vector<std::uint8_t> selected;
    std::vector<SegmentRole> roles;
    std::vector<std::int32_t> node_of;
    std::vector<Node> nodes;
    OrientedRect rect;          // the rectangle this polypath crosses
    double beta_replaced = 0.0; // sum over switches of beta * frame scale
    std::int64_t switches = 0;

    std::size_t size() const { return segments.size(); }

    std::int32_t add_node(std::int32_t parent, const OrientedRect& r, int depth) {
        nodes.push_back({parent, r, depth});
        return static_cast<std::int32_t>(nodes.size() - 1);
    }

    void add_segment(const Segment& s, bool sel, SegmentRole role, std::int32_t node) {
        segments.push_back(s);
        selected.push_back(sel ? 1 : 0);
        roles.push_back(role);
        node_of.push_back(node);
    }

    /// Restriction to the subtree rooted at `node`: the sub-crossing built
    /// inside that recursion node's rectangle.
    Polypath subtree(std::int32_t node) const {
        Polypath sub;
        sub.rect = nodes[node].rect;
        std::vector<char> in(nodes.size(), 0);
        in[node] = 1;
        for (std::size_t k = node + 1; k < nodes.size(); ++k)
            if (nodes[k].parent >= 0 && in[nodes[k].parent]) in[k] = 1;
        for (std::size_t s = 0; s < segments.size(); ++s)
            if (node_of[s] >= 0 && in[node_of[s]])
                sub.add_segment(segments[s], selected[s], roles[s], 0);
        sub.nodes.push_back({-1, nodes[node].rect, nodes[node].depth});
        return sub;
    }
};

namespace polypath_detail {

/// Union-find over selected segments using a spatial hash of inflated
/// bounding boxes to limit candidate pairs.
class SegmentConnectivity {
public:
    explicit SegmentConnectivity(const Polypath& p, double tol = kGeomTol) {
        for (std::size_t s = 0; s < p.size(); ++s)
            if (p.selected[s]) ids_.push_back(s);
        parent_.resize(ids_.size());
        std::iota(parent_.begin(), parent_.end(), 0);
        if (ids_.empty()) return;

        double maxlen = 0.0;
        for (std::size_t k : ids_)
            maxlen = std::max(maxlen, p.segments[k].length());
        cell_ = std::max(maxlen, 16 * tol);

        std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
        for (std::size_t a = 0; a < ids_.size(); ++a) {
            const Segment& s = p.segments[ids_[a]];
            const Rect bb{{std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y)},
                          {std::max(s.a.x, s.b.x), std::max(s.a.y, s.b.y)}};
            const auto lo_i = cell_index(bb.lo.x - tol), hi_i = cell_index(bb.hi.x + tol);
            const auto lo_j = cell_index(bb.lo.y - tol), hi_j = cell_index(bb.hi.y + tol);
            for (std::int64_t i = lo_i; i <= hi_i; ++i)
                for (std::int64_t j = lo_j; j <= hi_j; ++j) {
                    auto& bucket = buckets[hash_cell(i, j)];
                    for (std::size_t b : bucket)
                        if (find(a) != find(b) &&
                            segments_touch(p.segments[ids_[a]], p.segments[ids_[b]], tol))
                            unite(a, b);
                    bucket.push_back(a);
                }
        }
    }

    bool all_connected() {
        if (ids_.empty()) return false;
        const std::size_t root = find(0);
        for (std::size_t a = 1; a < ids_.size(); ++a)
            if (find(a) != root) return false;
        return true;
    }

private:
    std::int64_t cell_index(double x) const {
        return static_cast<std::int64_t>(std::floor(x / cell_));
    }
    static std::uint64_t hash_cell(std::int64_t i, std::int64_t j) {
        return static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ULL ^
               static_cast<std::uint64_t>(j);
    }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

    double cell_ = 1.0;
    std::vector<std::size_t> ids_;
    std::vector<std::size_t> parent_;
};

}  // namespace polypath_detail

/// Crossing predicate: selected union connected, touching both shorter
/// boundaries of `rect`, and contained in it (all with tolerance).
struct CrossingCheck {
    bool connected = false;
    bool touches_low_end = false;
    bool touches_high_end = false;
    bool contained = false;
    bool ok() const { return connected && touches_low_end && touches_high_end && contained; }
};

inline CrossingCheck check_crossing(const Polypath& p, const OrientedRect& rect,
                                    double tol = kGeomTol) {
    CrossingCheck c;
    polypath_detail::SegmentConnectivity conn(p, tol);
    c.connected = conn.all_connected();
    const Segment lo = rect.short_side(0), hi = rect.short_side(1);
    c.contained = true;
    for (std::size_t s = 0; s < p.size(); ++s) {
        if (!p.selected[s]) continue;
        const Segment& seg = p.segments[s];
        c.touches_low_end = c.touches_low_end || segments_touch(seg, lo, tol);
        c.touches_high_end = c.touches_high_end || segments_touch(seg, hi, tol);
        c.contained = c.contained && rect.contains(seg.a, tol) && rect.contains(seg.b, tol);
    }
    return c;
}

}  // namespace lfpp
