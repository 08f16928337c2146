#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lfpp/band_source.hpp"
#include "lfpp/crossing_layout.hpp"
#include "lfpp/crossing_params.hpp"
#include "lfpp/polypath.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

/// Per-location line choices i_j in {1, 2}, constant on strategy blocks.
struct SwitchDecision {
    std::vector<int> line;          // i_j, j = 1..locations
    std::vector<double> dz;         // per-location Delta Z_j
    std::vector<double> block_sums; // per-block sums of dz
    std::int64_t block_size = 1;

    std::int64_t switch_count() const {
        std::int64_t s = 0;
        for (std::size_t j = 0; j + 1 < line.size(); ++j)
            if (line[j] != line[j + 1]) ++s;
        return s;
    }
};

namespace crossing_detail {

/// Plain field integral of one band along a segment (composite midpoint).
inline double band_line_integral(const BandSource& bands, int k, const Segment& seg,
                                 double step) {
    double h = 0.0;
    const auto pts = quadrature_points(seg, step, &h);
    std::vector<double> vals(pts.size(), 0.0);
    bands.add_band(k, pts, vals);
    double acc = 0.0;
    for (double v : vals) acc += v;
    return acc * h;
}

/// The sign rule shared by every strategy entry point.  dz[j-1] holds
/// gamma * (integral along the top strip's upper boundary minus the bottom
/// one's) at location j; i_j = 2 on a block iff the block's dz sum > 0.
inline SwitchDecision decide_from_dz(std::vector<double> dz, const StrategyParams& p) {
    SwitchDecision dec;
    dec.block_size = p.block_size;
    dec.dz = std::move(dz);
    const auto L = static_cast<std::int64_t>(dec.dz.size());
    dec.line.resize(L, 1);
    for (std::int64_t b0 = 0; b0 < L; b0 += p.block_size) {
        const std::int64_t b1 = std::min(L, b0 + p.block_size);
        double sum = 0.0;
        for (std::int64_t j = b0; j < b1; ++j) sum += dec.dz[j];
        dec.block_sums.push_back(sum);
        const int line = sum > 0.0 ? 2 : 1;
        for (std::int64_t j = b0; j < b1; ++j) dec.line[j] = line;
    }
    return dec;
}

inline SwitchDecision decide(const BandSource& bands, int band_k, const FrameMap& frame,
                             const StripLayout& layout, const StrategyParams& p) {
    if (band_k > bands.depth())
        throw DepthError("crossing: band " + std::to_string(band_k) +
                         " not available (depth " + std::to_string(bands.depth()) + ")");
    const double step = std::exp2(-band_k) / 4.0;  // band mesh / 2, world units
    std::vector<double> dz(layout.params.locations);
    for (std::int64_t j = 1; j <= layout.params.locations; ++j) {
        const Segment top = frame.to_world(layout.strip_upper_boundary(1, j));
        const Segment bot = frame.to_world(layout.strip_upper_boundary(2, j));
        dz[j - 1] = p.gamma * (band_line_integral(bands, band_k, top, step) -
                               band_line_integral(bands, band_k, bot, step));
    }
    return decide_from_dz(std::move(dz), p);
}

}  // namespace crossing_detail

/// Strategy from a sampled (1/2, 1] band on the reference frame V^Gamma.
inline SwitchDecision choose_strategy(const FieldSample& eta_top_band,
                                      const StripLayout& layout,
                                      const StrategyParams& params) {
    require(eta_top_band.band.delta == 0.5 && eta_top_band.band.delta_prime == 1.0,
            "choose_strategy: field must be the (1/2, 1] band");
    const double step = eta_top_band.grid.mesh / 2.0;
    std::vector<double> dz(layout.params.locations);
    for (std::int64_t j = 1; j <= layout.params.locations; ++j) {
        dz[j - 1] = params.gamma *
                    (line_integral_field(eta_top_band, layout.strip_upper_boundary(1, j), step) -
                     line_integral_field(eta_top_band, layout.strip_upper_boundary(2, j), step));
    }
    return crossing_detail::decide_from_dz(std::move(dz), params);
}

/// Recursive light-crossing builder.
class CrossingBuilder {
public:
    CrossingBuilder(const BandSource& bands, const StrategyParams& params)
        : bands_(bands), params_(params), layout_(build_layout(params)) {}

    /// Crossing of `rect` (a copy of V_l^Gamma) at recursion depth n.
    /// Depth beyond the 4 m_Gamma desk-scale cap is clamped with a notice.
    Polypath build(const OrientedRect& rect, int depth) {
        Polypath out;
        out.rect = rect;
        int d = depth;
        if (d > 4 * params_.m_Gamma) {
            d = 4 * params_.m_Gamma;
            depth_clamped_ = true;
        }
        build_node(rect, d, -1, std::nullopt, out);
        return out;
    }

    bool depth_clamped() const { return depth_clamped_; }
    const StripLayout& layout() const { return layout_; }

    /// Test hook: build with a forced top-level decision.
    Polypath build_with_decision(const OrientedRect& rect, int depth,
                                 const SwitchDecision& dec) {
        forced_ = &dec;
        Polypath out;
        out.rect = rect;
        build_node(rect, depth, -1, std::nullopt, out);
        forced_ = nullptr;
        return out;
    }

private:
    static int scale_of(const OrientedRect& rect) {
        const int l = static_cast<int>(std::round(-std::log2(rect.width)));
        require(std::abs(rect.width - std::exp2(-l)) < 1e-9 * rect.width,
                "crossing: rectangle width is not a power of two");
        return l;
    }

    void emit_midline(const OrientedRect& rect, SegmentRole role, std::int32_t node,
                      Polypath& out) {
        out.add_segment(rect.midline(), true, role, node);
    }

    void build_block(const OrientedRect& block, int depth, std::int32_t parent,
                     SegmentRole role, Polypath& out) {
        if (depth <= 0) {
            const std::int32_t node = out.add_node(parent, block, depth);
            emit_midline(block, role, node, out);
        } else {
            build_node(block, depth, parent, role, out);
        }
    }

    /// Tie the junction at the far end of `prev` (shared with the next
    /// like-oriented block) with two vertical crossings and a low bar,
    /// each built recursively.
    void tie_junction(const OrientedRect& prev, int depth, std::int32_t parent,
                      SegmentRole role, Polypath& out) {
        const Vec2 junction = prev.to_world(prev.length / 2, 0.0);
        const Vec2 a = prev.axis, s = prev.side();
        const double wb = prev.width;
        const double g = static_cast<double>(params_.Gamma);

        OrientedRect tie1;
        tie1.center = junction - a * (wb / (2 * g));
        tie1.axis = s;
        tie1.length = wb;
        tie1.width = wb / g;
        OrientedRect tie2 = tie1;
        tie2.center = junction + a * (wb / (2 * g));
        OrientedRect bar;
        bar.center = junction - s * (wb / 2 - wb / (g * g));
        bar.axis = a;
        bar.length = 2 * wb / g;
        bar.width = 2 * wb / (g * g);

        build_block(tie1, depth - 3 * params_.m_Gamma, parent, role, out);
        build_block(tie2, depth - 3 * params_.m_Gamma, parent, role, out);
        build_block(bar, depth - 4 * params_.m_Gamma + 1, parent, role, out);
    }

    void build_node(const OrientedRect& rect, int depth, std::int32_t parent,
                    std::optional<SegmentRole> inherited, Polypath& out) {
        const std::int32_t node = out.add_node(parent, rect, depth);
        if (depth <= 0) {
            emit_midline(rect, inherited.value_or(SegmentRole::StripBlock), node, out);
            return;
        }
        const bool top = !inherited.has_value();
        const int scale_l = scale_of(rect);
        const FrameMap frame = FrameMap::onto(rect, params_.Gamma);
        const SwitchDecision dec =
            (top && forced_) ? *forced_
                             : crossing_detail::decide(bands_, scale_l + 1, frame,
                                                       layout_, params_);

        struct Entry {
            OrientedRect rect;
            SegmentRole role;
        };
        std::vector<Entry> bridge;
        const auto L = params_.locations;
        for (std::int64_t j = 1; j <= L; ++j) {
            const int line = dec.line[j - 1];
            const bool switching = (j < L) && dec.line[j] != line;
            if (!switching) {
                for (std::int64_t b = 0; b < layout_.blocks_per_strip(); ++b)
                    bridge.push_back({frame.to_world(layout_.strip_block(line, j, b)),
                                      inherited.value_or(SegmentRole::StripBlock)});
            } else {
                const SlopedGadget& gadget = layout_.sloped(line, j);
                if (!(gadget.usable || forced_))
                    throw StructuralError("crossing: switch requested at an unusable location");
                bridge.push_back({frame.to_world(layout_.strip_block(line, j, 0)),
                                  inherited.value_or(SegmentRole::StripBlock)});
                for (std::int64_t b = 0; b < gadget.block_count; ++b)
                    bridge.push_back({frame.to_world(layout_.sloped_block(line, j, b)),
                                      inherited.value_or(SegmentRole::SlopedBlock)});
                bridge.push_back(
                    {frame.to_world(layout_.strip_block(3 - line, j,
                                                        layout_.blocks_per_strip() - 1)),
                     inherited.value_or(SegmentRole::StripBlock)});
                if (top) {
                    ++out.switches;
                    out.beta_replaced += static_cast<double>(params_.beta) * frame.scale;
                }
            }
        }

        for (std::size_t b = 0; b < bridge.size(); ++b) {
            build_block(bridge[b].rect, depth - 2 * params_.m_Gamma, node,
                        bridge[b].role, out);
            if (b > 0 && like_oriented_adjacent(bridge[b - 1].rect, bridge[b].rect))
                tie_junction(bridge[b - 1].rect, depth, node,
                             inherited.value_or(SegmentRole::TieGadget), out);
        }

        // Record the unchosen line's block midlines at the top level as the
        // polypath's unselected alternatives.
        if (top) {
            for (std::int64_t j = 1; j <= L; ++j) {
                const int other = 3 - dec.line[j - 1];
                for (std::int64_t b = 0; b < layout_.blocks_per_strip(); ++b)
                    out.add_segment(
                        frame.to_world(layout_.strip_block(other, j, b)).midline(), false,
                        SegmentRole::StripBlock, node);
            }
        }
    }

    static bool like_oriented_adjacent(const OrientedRect& a, const OrientedRect& b) {
        if (std::abs(a.axis.cross(b.axis)) > 1e-9) return false;
        const Vec2 gap = b.to_world(-b.length / 2, 0.0) - a.to_world(a.length / 2, 0.0);
        return gap.norm() <= 1e-9;
    }

    const BandSource& bands_;
    StrategyParams params_;
    StripLayout layout_;
    const SwitchDecision* forced_ = nullptr;
    bool depth_clamped_ = false;
};

/// Build a crossing of `rect` at recursion depth `depth`.
inline Polypath build_crossing(const BandSource& bands, const OrientedRect& rect,
                               int depth, const StrategyParams& params) {
    CrossingBuilder builder(bands, params);
    return builder.build(rect, depth);
}

/// Spec-shaped overload: depth taken from the band stack and the rect scale.
inline Polypath build_crossing(const BandDecomposition& bands, const OrientedRect& rect,
                               const StrategyParams& params) {
    GridBandsSource src(bands);
    const int l = static_cast<int>(std::round(-std::log2(rect.width)));
    return build_crossing(src, rect, src.depth() - l, params);
}

/// The reference frame rectangle V^Gamma = [0, Gamma] x [0, 1].
inline OrientedRect reference_rect(const StrategyParams& params) {
    OrientedRect r;
    r.center = {static_cast<double>(params.Gamma) / 2, 0.5};
    r.axis = {1.0, 0.0};
    r.length = static_cast<double>(params.Gamma);
    r.width = 1.0;
    return r;
}

// ---------------------------------------------------------------------------
// Weight accounting.

struct WeightLedger {
    double base_length_term = 0.0;   // strip segments at gamma = 0, plus beta per switch
    double gadget_excess_term = 0.0; // sloped length minus beta per switch
    double tie_term = 0.0;           // tie gadget length at gamma = 0
    double field_integral_term = 0.0;  // total minus the gamma = 0 total
    double total = 0.0;              // fixed-order sum of the four terms
    double quadrature_total = 0.0;   // direct sum of selected segment integrals
};

namespace crossing_detail {

template <typename ExpIntegral, typename LenIntegral>
WeightLedger ledger_from_integrals(const Polypath& xi, const ExpIntegral& exp_int,
                                   const LenIntegral& len_int) {
    WeightLedger w;
    double strip_len = 0.0, sloped_len = 0.0, tie_len = 0.0;
    for (std::size_t s = 0; s < xi.size(); ++s) {
        if (!xi.selected[s]) continue;
        const double ei = exp_int(xi.segments[s]);
        const double li = len_int(xi.segments[s]);
        w.quadrature_total += ei;
        switch (xi.roles[s]) {
            case SegmentRole::StripBlock: strip_len += li; break;
            case SegmentRole::SlopedBlock: sloped_len += li; break;
            case SegmentRole::TieGadget: tie_len += li; break;
        }
        w.field_integral_term += ei - li;
    }
    w.base_length_term = strip_len + xi.beta_replaced;
    w.gadget_excess_term = sloped_len - xi.beta_replaced;
    w.tie_term = tie_len;
    w.total = ((w.base_length_term + w.gadget_excess_term) + w.tie_term) +
              w.field_integral_term;
    return w;
}

}  // namespace crossing_detail

/// Ledger from a grid-backed total field (step = mesh / 2).
inline WeightLedger crossing_weight(const FieldSample& full_field, const Polypath& xi,
                                    double gamma) {
    const double step = full_field.grid.mesh / 2.0;
    return crossing_detail::ledger_from_integrals(
        xi,
        [&](const Segment& s) { return line_integral(full_field, s, gamma, step); },
        [&](const Segment& s) { return line_integral(full_field, s, 0.0, step); });
}

/// Ledger from a lazy band source; `step` defaults to 2^-depth / 2.
inline WeightLedger crossing_weight(const BandSource& bands, const Polypath& xi,
                                    double gamma, double step = 0.0) {
    if (step <= 0.0) step = std::exp2(-bands.depth()) / 2.0;
    const auto exp_int = [&](const Segment& seg) {
        double h = 0.0;
        const auto pts = quadrature_points(seg, step, &h);
        double acc = 0.0;
        if (gamma == 0.0) {
            acc = static_cast<double>(pts.size());
        } else {
            std::vector<double> vals(pts.size(), 0.0);
            bands.add_total(pts, vals);
            for (double v : vals) acc += std::exp(gamma * v);
        }
        return acc * h;
    };
    const auto len_int = [&](const Segment& seg) {
        double h = 0.0;
        const auto pts = quadrature_points(seg, step, &h);
        return static_cast<double>(pts.size()) * h;
    };
    return crossing_detail::ledger_from_integrals(xi, exp_int, len_int);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimate of the expected crossing weight at scale n.

struct LambdaEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    int replicas = 0;
    bool depth_clamped = false;
    std::vector<double> totals;
};

/// Variant with explicit geometry parameters; params.gamma = 0 measures the
/// deterministic geometry total of the construction.
inline LambdaEstimate measure_lambda(const StrategyParams& params, int n, int replicas,
                                     std::uint64_t seed) {
    require(replicas >= 1, "measure_lambda: need at least one replica");
    LambdaEstimate est;
    est.replicas = replicas;
    est.totals.reserve(replicas);
    for (int r = 0; r < replicas; ++r) {
        const std::uint64_t rs = rng::substream(
            seed, static_cast<std::uint64_t>(rng::ModuleId::Crossing), r);
        const EtaStack stack(std::max(1, n), rs);
        const EtaStackSource src(stack);
        CrossingBuilder builder(src, params);
        const Polypath xi = builder.build(reference_rect(params), n);
        est.depth_clamped = est.depth_clamped || builder.depth_clamped();
        est.totals.push_back(crossing_weight(src, xi, params.gamma).total);
    }
    double sum = 0.0;
    for (double t : est.totals) sum += t;
    est.mean = sum / replicas;
    double ss = 0.0;
    for (double t : est.totals) ss += (t - est.mean) * (t - est.mean);
    est.stderr_mean = replicas > 1 ? std::sqrt(ss / (replicas - 1) / replicas) : 0.0;
    return est;
}

inline LambdaEstimate measure_lambda(double gamma, int n, int replicas,
                                     std::uint64_t seed,
                                     const CalibConstants& calib = {}) {
    return measure_lambda(derive_params(gamma, calib), n, replicas, seed);
}

// ---------------------------------------------------------------------------
// Pilot calibration: measure the constants behind the switch-block formula
// from the coarse band itself.

inline CalibConstants pilot_calibrate(double gamma, int replicas, std::uint64_t seed) {
    const StrategyParams p = derive_params(gamma);
    const StripLayout lay = build_layout(p);
    const double beta = static_cast<double>(p.beta);
    const double step = 0.5 / 4.0 / 2.0;  // top-band mesh / 2
    const auto L = p.locations;

    std::vector<double> abs_strip, abs_slope;
    std::vector<std::vector<double>> gaps(static_cast<std::size_t>(L));
    for (int r = 0; r < replicas; ++r) {
        EtaBandField band(Band{0.5, 1.0}, rng::substream(seed, 71, r));
        const auto integral = [&](const Segment& seg) {
            double h = 0.0;
            const auto pts = quadrature_points(seg, step, &h);
            std::vector<double> vals(pts.size(), 0.0);
            band.accumulate_at(pts, vals);
            double acc = 0.0;
            for (double v : vals) acc += v;
            return acc * h;
        };
        for (std::int64_t j = 1; j <= L; ++j) {
            const double top = integral(lay.strip_upper_boundary(1, j));
            const double bot = integral(lay.strip_upper_boundary(2, j));
            gaps[j - 1].push_back(top - bot);
            if (j == 1) abs_strip.push_back(std::abs(top));
        }
        abs_slope.push_back(std::abs(integral(lay.sloped_top[0].rect.midline())));
    }

    const auto mean_abs = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / v.size();
    };
    CalibConstants out;
    out.C = std::max(mean_abs(abs_strip) / std::sqrt(beta),
                     mean_abs(abs_slope) / std::sqrt(lay.sloped_top[0].rect.length));
    out.C_prime = (lay.sloped_top[0].rect.length - beta) * beta;

    double c_min = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= L; n *= 2) {
        std::vector<double> sums(gaps[0].size(), 0.0);
        for (std::int64_t j = 0; j < n; ++j)
            for (std::size_t r = 0; r < sums.size(); ++r) sums[r] += 0.5 * gaps[j][r];
        double m = 0.0, ss = 0.0;
        for (double s : sums) m += s;
        m /= sums.size();
        for (double s : sums) ss += (s - m) * (s - m);
        c_min = std::min(c_min, ss / sums.size() / (static_cast<double>(n) * beta));
    }
    out.c = c_min;
    return out;
}

}  // namespace lfpp
