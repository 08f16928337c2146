#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lfpp/errors.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

// White-noise heat-kernel band field.  The field over the scale band
// (delta, delta'] is the integral of the Brownian transition kernel
// p(s/2; v, w) = exp(-|v-w|^2/s) / (pi s) against space-time white noise
// over R^2 x [delta^2, delta'^2], scaled by sqrt(pi).
//
// Discretization, per the module design:
//   * the time interval is split into slabs descending from delta'^2 by
//     factors of sqrt(1/2) (half-octave slabs), the last one clamped at
//     delta^2; each slab is evaluated at its geometric midpoint
//     s* = sqrt(s_lo * s_hi);
//   * per slab, the white noise lives on a square lattice of spacing m,
//     the largest power of two <= sqrt(s*)/2; one standard normal per
//     site, drawn by a counter-based generator so any site can be
//     evaluated independently;
//   * the Gaussian kernel is truncated at radius R = sqrt(ln(1e12) * s*),
//     i.e. where it falls below 1e-12 of its peak.
//
// With this slab rule, the variance of the half-octave slab discretization
// exceeds the continuum value (1/2)log(s_hi/s_lo) by a closed-form bias of
// about 8.7e-4 per slab; quadrature_bias() reports it exactly.  Spatial
// discretization and truncation errors are below 1e-8 relative.

namespace eta_detail {

inline constexpr double kTruncLog = 27.63102111592855;  // ln(1e12)

struct Slab {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double s_star = 0.0;
    double width = 0.0;
    double spacing = 0.0;  // noise lattice spacing m (power of two)
    double radius = 0.0;   // kernel truncation radius
    double amp = 0.0;      // sqrt(m^2 * width / pi) / s*
    std::uint64_t stream = 0;
};

inline std::vector<Slab> make_slabs(Band band, std::uint64_t seed) {
    band.validate();
    std::vector<Slab> slabs;
    if (band.delta == band.delta_prime) return slabs;  // empty integration slab
    const double t_bot = band.delta * band.delta;
    double t_hi = band.delta_prime * band.delta_prime;
    const double half_octave = std::sqrt(0.5);
    for (std::size_t i = 0; t_hi > t_bot; ++i) {
        Slab s;
        s.t_hi = t_hi;
        s.t_lo = std::max(t_bot, t_hi * half_octave);
        s.s_star = std::sqrt(s.t_lo * s.t_hi);
        s.width = s.t_hi - s.t_lo;
        s.spacing = std::exp2(std::floor(std::log2(std::sqrt(s.s_star) / 2.0)));
        s.radius = std::sqrt(kTruncLog * s.s_star);
        s.amp = std::sqrt(s.spacing * s.spacing * s.width / M_PI) / s.s_star;
        s.stream = rng::substream(seed, static_cast<std::uint64_t>(rng::ModuleId::EtaField), i);
        slabs.push_back(s);
        t_hi = s.t_lo;
    }
    return slabs;
}

/// Gaussian tap values exp(-(x - I*m)^2 / s) for I in [i_lo, i_lo + count),
/// computed with two exp() calls and a running product.
inline void gaussian_taps(double x, double m, double inv_s, std::int64_t i_lo,
                          int count, const double* site_sq, double* out) {
    const double d0 = x - static_cast<double>(i_lo) * m;
    double run = std::exp(-d0 * d0 * inv_s);
    const double ratio = std::exp(2.0 * d0 * m * inv_s);
    for (int w = 0; w < count; ++w) {
        out[w] = run * site_sq[w];
        run *= ratio;
    }
}

/// Per-slab table of exp(-(w*m)^2 / s), w = 0..count-1.
inline std::vector<double> site_sq_table(double m, double inv_s, int count) {
    std::vector<double> t(count);
    for (int w = 0; w < count; ++w) {
        const double d = w * m;
        t[w] = std::exp(-d * d * inv_s);
    }
    return t;
}

/// Rolling dense window over one slab's noise lattice.  Quadrature points
/// walking along a segment slide the window monotonically; refills are
/// incremental in the common case.
class NoiseWindow {
public:
    NoiseWindow(std::uint64_t stream, int wi, int wj)
        : stream_(stream), wi_(wi), wj_(wj), data_(static_cast<std::size_t>(wi) * wj) {}

    void anchor(std::int64_t i0, std::int64_t j0) {
        if (!valid_) {
            fill_all(i0, j0);
            return;
        }
        if (i0 == i0_ && j0 == j0_) return;
        const std::int64_t di = i0 - i0_, dj = j0 - j0_;
        if (std::llabs(di) >= wi_ || std::llabs(dj) >= wj_) {
            fill_all(i0, j0);
            return;
        }
        shift(di, dj);
    }

    double at(std::int64_t i, std::int64_t j) const {
        return data_[static_cast<std::size_t>(j - j0_) * wi_ + (i - i0_)];
    }
    const double* row(std::int64_t j) const {
        return data_.data() + static_cast<std::size_t>(j - j0_) * wi_;
    }
    std::int64_t i0() const { return i0_; }
    std::int64_t j0() const { return j0_; }

private:
    void fill_all(std::int64_t i0, std::int64_t j0) {
        i0_ = i0;
        j0_ = j0;
        for (int j = 0; j < wj_; ++j)
            for (int i = 0; i < wi_; ++i)
                data_[static_cast<std::size_t>(j) * wi_ + i] =
                    rng::normal_at(stream_, i0 + i, j0 + j);
        valid_ = true;
    }

    void shift(std::int64_t di, std::int64_t dj) {
        // Slide the valid region, regenerate the uncovered strips.
        std::vector<double> fresh(data_.size());
        const std::int64_t ni0 = i0_ + di, nj0 = j0_ + dj;
        for (int j = 0; j < wj_; ++j) {
            const std::int64_t gj = nj0 + j;
            for (int i = 0; i < wi_; ++i) {
                const std::int64_t gi = ni0 + i;
                const std::int64_t oi = gi - i0_, oj = gj - j0_;
                fresh[static_cast<std::size_t>(j) * wi_ + i] =
                    (oi >= 0 && oi < wi_ && oj >= 0 && oj < wj_)
                        ? data_[static_cast<std::size_t>(oj) * wi_ + oi]
                        : rng::normal_at(stream_, gi, gj);
            }
        }
        data_.swap(fresh);
        i0_ = ni0;
        j0_ = nj0;
    }

    std::uint64_t stream_;
    int wi_, wj_;
    std::vector<double> data_;
    std::int64_t i0_ = 0, j0_ = 0;
    bool valid_ = false;
};

}  // namespace eta_detail

/// One band of the white-noise field, evaluated lazily from seeded noise.
/// All evaluation paths share the same per-site noise, so values are a
/// pure function of (band, seed, location).
class EtaBandField {
public:
    EtaBandField(Band band, std::uint64_t seed)
        : band_(band), seed_(seed), slabs_(eta_detail::make_slabs(band, seed)) {}

    const Band& band() const { return band_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t slab_count() const { return slabs_.size(); }

    /// Variance of the discretized field at a point (closed form).
    double discrete_variance() const {
        double v = 0.0;
        for (const auto& s : slabs_) v += s.width / (2.0 * s.s_star);
        return v;
    }

    /// Continuum variance log(delta'/delta) of the band.
    double continuum_variance() const {
        return std::log(band_.delta_prime / band_.delta);
    }

    /// Slab midpoint-rule bias: discrete minus continuum variance.
    double quadrature_bias() const {
        double b = 0.0;
        for (const auto& s : slabs_)
            b += s.width / (2.0 * s.s_star) - 0.5 * std::log(s.t_hi / s.t_lo);
        return b;
    }

    /// Covariance of the discretized field at separation r (closed form,
    /// up to spatial-discretization error ~1e-8).
    double discrete_covariance(double r) const {
        double c = 0.0;
        for (const auto& s : slabs_)
            c += s.width * std::exp(-r * r / (2.0 * s.s_star)) / (2.0 * s.s_star);
        return c;
    }

    /// Add this band's values at the given points to `out`.  Points are
    /// expected to advance monotonically along a line (any order is
    /// correct; ordered points are fast).
    void accumulate_at(std::span<const Vec2> pts, std::span<double> out) const {
        using namespace eta_detail;
        for (const auto& s : slabs_) {
            const double m = s.spacing, inv_s = 1.0 / s.s_star;
            const int taps = static_cast<int>(std::floor(2.0 * s.radius / m)) + 1;
            NoiseWindow win(s.stream, taps + 2, taps + 2);
            std::vector<double> site_sq = site_sq_table(m, inv_s, taps + 2);
            std::vector<double> kx(taps + 2), ky(taps + 2);
            for (std::size_t n = 0; n < pts.size(); ++n) {
                const Vec2 p = pts[n];
                const auto ilo = static_cast<std::int64_t>(std::ceil((p.x - s.radius) / m));
                const auto ihi = static_cast<std::int64_t>(std::floor((p.x + s.radius) / m));
                const auto jlo = static_cast<std::int64_t>(std::ceil((p.y - s.radius) / m));
                const auto jhi = static_cast<std::int64_t>(std::floor((p.y + s.radius) / m));
                const int ni = static_cast<int>(ihi - ilo + 1);
                const int nj = static_cast<int>(jhi - jlo + 1);
                win.anchor(ilo, jlo);
                gaussian_taps(p.x, m, inv_s, ilo, ni, site_sq.data(), kx.data());
                gaussian_taps(p.y, m, inv_s, jlo, nj, site_sq.data(), ky.data());
                double acc = 0.0;
                for (int j = 0; j < nj; ++j) {
                    const double* noise = win.row(jlo + j) + (ilo - win.i0());
                    double rowsum = 0.0;
                    for (int i = 0; i < ni; ++i) rowsum += kx[i] * noise[i];
                    acc += ky[j] * rowsum;
                }
                out[n] += s.amp * acc;
            }
        }
    }

    double value_at(Vec2 p) const {
        double v = 0.0;
        accumulate_at(std::span<const Vec2>(&p, 1), std::span<double>(&v, 1));
        return v;
    }

    /// Add this band's values on a full grid to `out` (row-major).
    /// Separable convolution per slab; same noise as accumulate_at.
    void accumulate_on_grid(const GridSpec& g, std::span<double> out) const {
        using namespace eta_detail;
        const double x0 = g.origin.x, y0 = g.origin.y;
        const std::size_t P = g.width, Q = g.height;
        std::vector<double> tmp;
        for (const auto& s : slabs_) {
            const double m = s.spacing, inv_s = 1.0 / s.s_star;
            const int taps = static_cast<int>(std::floor(2.0 * s.radius / m)) + 1;
            std::vector<double> site_sq = site_sq_table(m, inv_s, taps + 2);

            // x-taps per column p.
            std::vector<std::int64_t> ilo(P);
            std::vector<int> ni(P);
            std::vector<double> kx(P * (taps + 2));
            std::int64_t gi_lo = 0, gi_hi = 0;
            for (std::size_t p = 0; p < P; ++p) {
                const double x = x0 + p * g.mesh;
                ilo[p] = static_cast<std::int64_t>(std::ceil((x - s.radius) / m));
                const auto ihi = static_cast<std::int64_t>(std::floor((x + s.radius) / m));
                ni[p] = static_cast<int>(ihi - ilo[p] + 1);
                gaussian_taps(x, m, inv_s, ilo[p], ni[p], site_sq.data(),
                              kx.data() + p * (taps + 2));
                if (p == 0) gi_lo = ilo[p];
                gi_hi = std::max(gi_hi, ihi);
            }

            // y range of noise rows touching any output row.
            const auto jlo_all = static_cast<std::int64_t>(
                std::ceil((y0 - s.radius) / m));
            const auto jhi_all = static_cast<std::int64_t>(
                std::floor((y0 + (Q - 1) * g.mesh + s.radius) / m));
            const auto nj_all = static_cast<std::size_t>(jhi_all - jlo_all + 1);

            // Row pass: tmp[j][p] = sum_i kx[p][i] * noise(i, j).
            tmp.assign(nj_all * P, 0.0);
            std::vector<double> noise_row(static_cast<std::size_t>(gi_hi - gi_lo + 1));
            for (std::size_t j = 0; j < nj_all; ++j) {
                const std::int64_t gj = jlo_all + static_cast<std::int64_t>(j);
                for (std::size_t i = 0; i < noise_row.size(); ++i)
                    noise_row[i] = rng::normal_at(s.stream, gi_lo + static_cast<std::int64_t>(i), gj);
                double* trow = tmp.data() + j * P;
                for (std::size_t p = 0; p < P; ++p) {
                    const double* kxp = kx.data() + p * (taps + 2);
                    const double* nz = noise_row.data() + (ilo[p] - gi_lo);
                    double acc = 0.0;
                    for (int i = 0; i < ni[p]; ++i) acc += kxp[i] * nz[i];
                    trow[p] = acc;
                }
            }

            // Column pass: out[q][p] += amp * sum_j ky[q][j] * tmp[j][p].
            std::vector<double> ky(taps + 2);
            for (std::size_t q = 0; q < Q; ++q) {
                const double y = y0 + q * g.mesh;
                const auto jlo = static_cast<std::int64_t>(std::ceil((y - s.radius) / m));
                const auto jhi = static_cast<std::int64_t>(std::floor((y + s.radius) / m));
                const int nj = static_cast<int>(jhi - jlo + 1);
                gaussian_taps(y, m, inv_s, jlo, nj, site_sq.data(), ky.data());
                double* orow = out.data() + q * P;
                for (int j = 0; j < nj; ++j) {
                    const double coeff = s.amp * ky[j];
                    const double* trow = tmp.data() + static_cast<std::size_t>(jlo - jlo_all + j) * P;
                    for (std::size_t p = 0; p < P; ++p) orow[p] += coeff * trow[p];
                }
            }
        }
    }

    FieldSample sample_on(const GridSpec& g) const {
        FieldSample f;
        f.grid = g;
        f.values.assign(g.cells(), 0.0);
        f.band = band_;
        f.generator = Generator::EtaBand;
        f.seed = seed_;
        accumulate_on_grid(g, f.values);
        return f;
    }

private:
    Band band_;
    std::uint64_t seed_;
    std::vector<eta_detail::Slab> slabs_;
};

/// One FieldSample of eta_{delta}^{delta'} on `grid`.
inline FieldSample sample_eta(const GridSpec& grid, double delta, double delta_prime,
                              std::uint64_t seed) {
    Band band{delta, delta_prime};
    band.validate();
    if (grid.mesh > delta / 2.0 + 1e-15)
        throw ResolutionError("sample_eta: grid mesh must be <= delta/2");
    return EtaBandField(band, seed).sample_on(grid);
}

/// Dyadic band stack: bands (2^-k, 2^-(k-1)], k = 1..n, each from its own
/// seed substream, plus their pointwise sum.
struct BandDecomposition {
    std::vector<FieldSample> bands;
    FieldSample total;
};

inline std::uint64_t band_seed(std::uint64_t master, int k) {
    return rng::substream(master, static_cast<std::uint64_t>(rng::ModuleId::EtaField) + 100,
                          static_cast<std::uint64_t>(k));
}

inline BandDecomposition decompose_bands(const GridSpec& grid, int n, std::uint64_t seed) {
    require(n >= 1, "decompose_bands: n must be >= 1");
    const double finest = std::exp2(-n);
    if (grid.mesh > finest / 2.0 + 1e-15)
        throw ResolutionError("decompose_bands: grid mesh must resolve 2^-n / 2");
    BandDecomposition d;
    d.total.grid = grid;
    d.total.values.assign(grid.cells(), 0.0);
    d.total.band = Band{finest, 1.0};
    d.total.generator = Generator::EtaBand;
    d.total.seed = seed;
    for (int k = 1; k <= n; ++k) {
        Band b{std::exp2(-k), std::exp2(-(k - 1))};
        d.bands.push_back(EtaBandField(b, band_seed(seed, k)).sample_on(grid));
        const auto& v = d.bands.back().values;
        for (std::size_t i = 0; i < v.size(); ++i) d.total.values[i] += v[i];
    }
    return d;
}

/// Lazily evaluated stack of dyadic bands; the seeds match decompose_bands,
/// so grid samples and lazy evaluation describe the same field.
class EtaStack {
public:
    EtaStack(int n, std::uint64_t seed) : n_(n), seed_(seed) {
        require(n >= 1, "EtaStack: n must be >= 1");
        bands_.reserve(n);
        for (int k = 1; k <= n; ++k)
            bands_.emplace_back(Band{std::exp2(-k), std::exp2(-(k - 1))},
                                band_seed(seed, k));
    }

    int depth() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    const EtaBandField& band(int k) const { return bands_.at(k - 1); }

    /// Sum of bands k = k_lo..k_hi at the given points, added to out.
    void accumulate_range(int k_lo, int k_hi, std::span<const Vec2> pts,
                          std::span<double> out) const {
        for (int k = k_lo; k <= k_hi; ++k) band(k).accumulate_at(pts, out);
    }

    /// Total field eta_{2^-n} at the given points.
    std::vector<double> total_at(std::span<const Vec2> pts) const {
        std::vector<double> vals(pts.size(), 0.0);
        accumulate_range(1, n_, pts, vals);
        return vals;
    }

    FieldSample sample_total(const GridSpec& g) const {
        FieldSample f;
        f.grid = g;
        f.values.assign(g.cells(), 0.0);
        f.band = Band{std::exp2(-n_), 1.0};
        f.generator = Generator::EtaBand;
        f.seed = seed_;
        for (const auto& b : bands_) b.accumulate_on_grid(g, f.values);
        return f;
    }

private:
    int n_;
    std::uint64_t seed_;
    std::vector<EtaBandField> bands_;
};

}  // namespace lfpp
