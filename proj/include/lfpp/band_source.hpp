#pragma once

#include <memory>
#include <span>
#include <vector>

#include "lfpp/errors.hpp"
#include "lfpp/eta_field.hpp"
#include "lfpp/grid.hpp"

namespace lfpp {

/// Field access used by the crossing builder: values of dyadic band k
/// (the band (2^-k, 2^-(k-1)]) and of the full field at arbitrary points.
class BandSource {
public:
    virtual ~BandSource() = default;
    virtual int depth() const = 0;

    /// Add band-k values at pts to out (pts ordered along a line).
    virtual void add_band(int k, std::span<const Vec2> pts,
                          std::span<double> out) const = 0;

    /// Add the total field (bands 1..depth) at pts to out.
    virtual void add_total(std::span<const Vec2> pts, std::span<double> out) const {
        for (int k = 1; k <= depth(); ++k) add_band(k, pts, out);
    }
};

/// Lazily evaluated bands backed by seeded white noise.
class EtaStackSource final : public BandSource {
public:
    explicit EtaStackSource(const EtaStack& stack) : stack_(stack) {}
    int depth() const override { return stack_.depth(); }
    void add_band(int k, std::span<const Vec2> pts, std::span<double> out) const override {
        stack_.band(k).accumulate_at(pts, out);
    }

private:
    const EtaStack& stack_;
};

/// Grid-backed bands (a BandDecomposition) with bilinear interpolation.
class GridBandsSource final : public BandSource {
public:
    explicit GridBandsSource(const BandDecomposition& d) : decomp_(d) {
        for (int k = 1; k <= depth(); ++k) {
            const Band& b = decomp_.bands[k - 1].band;
            require(b.delta == std::exp2(-k) && b.delta_prime == std::exp2(-(k - 1)),
                    "GridBandsSource: bands must be the dyadic stack");
        }
    }
    int depth() const override { return static_cast<int>(decomp_.bands.size()); }
    void add_band(int k, std::span<const Vec2> pts, std::span<double> out) const override {
        const FieldSample& f = decomp_.bands[k - 1];
        for (std::size_t i = 0; i < pts.size(); ++i) out[i] += f.interpolate(pts[i]);
    }
    void add_total(std::span<const Vec2> pts, std::span<double> out) const override {
        for (std::size_t i = 0; i < pts.size(); ++i)
            out[i] += decomp_.total.interpolate(pts[i]);
    }

private:
    const BandDecomposition& decomp_;
};

/// Composite-midpoint quadrature points for a segment at the given step.
inline std::vector<Vec2> quadrature_points(const Segment& seg, double step,
                                           double* h_out) {
    const double len = seg.length();
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
    const double h = len / static_cast<double>(k);
    std::vector<Vec2> pts(k);
    const Vec2 d = seg.dir() * (1.0 / len);
    for (std::size_t i = 0; i < k; ++i)
        pts[i] = seg.a + d * ((static_cast<double>(i) + 0.5) * h);
    if (h_out) *h_out = h;
    return pts;
}

/// Composite-midpoint integral of exp(gamma * X) along a segment, with X
/// interpolated bilinearly from the sample.  Step must not exceed the mesh.
inline double line_integral(const FieldSample& field, const Segment& seg,
                            double gamma, double step) {
    require(step > 0.0, "line_integral: step must be positive");
    if (step > field.grid.mesh + 1e-15)
        throw DomainError("line_integral: step must be <= field mesh");
    const Rect dom = field.domain();
    if (!dom.contains(seg.a, 1e-12) || !dom.contains(seg.b, 1e-12))
        throw DomainError("line_integral: segment outside field domain");
    double h = 0.0;
    const auto pts = quadrature_points(seg, step, &h);
    double acc = 0.0;
    for (const Vec2& p : pts) acc += std::exp(gamma * field.interpolate(p));
    return acc * h;
}

/// Same quadrature for the plain field integral (no exponential).
inline double line_integral_field(const FieldSample& field, const Segment& seg,
                                  double step) {
    double h = 0.0;
    const auto pts = quadrature_points(seg, step, &h);
    double acc = 0.0;
    for (const Vec2& p : pts) acc += field.interpolate(p);
    return acc * h;
}

}  // namespace lfpp
