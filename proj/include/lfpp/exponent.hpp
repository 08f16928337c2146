#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lfpp/dgff.hpp"
#include "lfpp/errors.hpp"
#include "lfpp/eta_field.hpp"
#include "lfpp/fpp.hpp"
#include "lfpp/lqg.hpp"
#include "lfpp/parallel.hpp"

namespace lfpp {

/// Conjectured LQG Hausdorff dimension: 1 + g^2/4 + sqrt((1 + g^2/4)^2 + g^2).
inline double watabiki_dimension(double gamma) {
    require(gamma >= 0.0, "watabiki_dimension: gamma must be >= 0");
    const double q = 1.0 + gamma * gamma / 4.0;
    return q + std::sqrt(q * q + gamma * gamma);
}

/// Implied graph-distance scaling exponent chi = 2 / d_H(gamma).
inline double lgd_exponent_prediction(double gamma) {
    return 2.0 / watabiki_dimension(gamma);
}

/// The upper-bound template c* gamma^{4/3} / log(1/gamma), for gamma in (0,1).
inline double paper_bound_exponent(double gamma, double c_star) {
    require(c_star > 0.0, "paper_bound_exponent: c_star must be positive");
    require(gamma > 0.0 && gamma < 1.0, "paper_bound_exponent: gamma must be in (0,1)");
    return c_star * std::pow(gamma, 4.0 / 3.0) / std::log(1.0 / gamma);
}

// ---------------------------------------------------------------------------
// Scaling series and the log-log fit.

struct ScalingRow {
    double scale = 0.0;       // N or delta
    double stat = 0.0;        // mean distance
    double stderr_stat = 0.0; // standard error of the mean
    int replicas = 0;
    double median = 0.0;
};

struct ScalingSeries {
    std::vector<ScalingRow> rows;
    std::vector<std::string> warnings;

    void validate() const {
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const bool up = rows[1].scale > rows[0].scale;
            require(rows[r].scale != rows[r - 1].scale &&
                        (rows[r].scale > rows[r - 1].scale) == up,
                    "ScalingSeries: scales must be strictly monotone");
        }
        for (const auto& row : rows)
            require(row.stderr_stat >= 0.0, "ScalingSeries: stderr must be >= 0");
    }
};

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double r2 = 0.0;
};

/// OLS of log(stat) on log(scale).  The 95% CI combines the delta-method
/// propagation of per-row standard errors with the residual variance, in
/// quadrature.
inline ExponentFit fit_exponent(const ScalingSeries& series) {
    const auto n = series.rows.size();
    require(n >= 3, "fit_exponent: need at least 3 rows");
    std::vector<double> x(n), y(n), sy(n);
    for (std::size_t r = 0; r < n; ++r) {
        require(series.rows[r].stat > 0.0, "fit_exponent: statistics must be positive");
        x[r] = std::log(series.rows[r].scale);
        y[r] = std::log(series.rows[r].stat);
        sy[r] = series.rows[r].stderr_stat / series.rows[r].stat;  // delta method
    }
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        xbar += x[r];
        ybar += y[r];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        sxx += (x[r] - xbar) * (x[r] - xbar);
        sxy += (x[r] - xbar) * (y[r] - ybar);
    }
    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;

    double ss_res = 0.0, ss_tot = 0.0, var_meas = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double e = y[r] - (fit.intercept + fit.slope * x[r]);
        ss_res += e * e;
        ss_tot += (y[r] - ybar) * (y[r] - ybar);
        const double wgt = (x[r] - xbar) / sxx;
        var_meas += wgt * wgt * sy[r] * sy[r];
    }
    const double var_res = (n > 2) ? (ss_res / static_cast<double>(n - 2)) / sxx : 0.0;
    const double half = 1.959963984540054 * std::sqrt(var_meas + var_res);
    fit.ci_lo = fit.slope - half;
    fit.ci_hi = fit.slope + half;
    fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Lattice FPP scaling experiment over the DGFF.

struct FppExperimentConfig {
    double gamma = 0.4;
    std::vector<int> sizes = {64, 128, 256, 512};  // N, powers of two
    int replicas = 200;
    std::uint64_t seed = 1;
    double epsilon = 0.25;  // endpoints: left/right midpoints of V_{N,eps}
    enum class Sampler { Auto, Exact, Band } sampler = Sampler::Auto;
    bool restrict_to_inner = false;  // restrict paths to V_{N,eps}
    int threads = 1;
};

namespace exponent_detail {

inline FieldSample sample_for_size(const FppExperimentConfig& cfg, int n_log2,
                                   std::uint64_t rep_seed) {
    const DgffSpec spec = DgffSpec::square(n_log2);
    const bool exact_fits = spec.interior_count() <= kDgffDenseBudget;
    switch (cfg.sampler) {
        case FppExperimentConfig::Sampler::Exact:
            return sample_dgff_exact(spec, rep_seed);
        case FppExperimentConfig::Sampler::Band:
            return sample_dgff_band_total(spec, rep_seed);
        default:
            return exact_fits ? sample_dgff_exact(spec, rep_seed)
                              : sample_dgff_band_total(spec, rep_seed);
    }
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace exponent_detail

inline ScalingSeries run_fpp_experiment(const FppExperimentConfig& cfg) {
    require(cfg.replicas >= 1, "run_fpp_experiment: need replicas >= 1");
    require(!cfg.sizes.empty(), "run_fpp_experiment: empty size list");
    require(cfg.epsilon >= 0.0 && cfg.epsilon < 0.5,
            "run_fpp_experiment: epsilon must be in [0, 1/2)");
    ScalingSeries series;
    if (cfg.replicas == 1)
        series.warnings.push_back("single replica: stderr is 0 by convention");

    for (int N : cfg.sizes) {
        const int n_log2 = static_cast<int>(std::round(std::log2(N)));
        require(N >= 4 && (1 << n_log2) == N, "run_fpp_experiment: N must be a power of two");
        const auto off = static_cast<std::uint32_t>(std::floor(cfg.epsilon * N));
        const Vertex a{off, static_cast<std::uint32_t>(N / 2)};
        const Vertex b{static_cast<std::uint32_t>(N - 1 - off),
                       static_cast<std::uint32_t>(N / 2)};
        RegionPredicate region;
        if (cfg.restrict_to_inner) {
            const std::uint32_t m = off;
            const auto NN = static_cast<std::uint32_t>(N);
            region = [m, NN](Vertex u) {
                return u.i >= m && u.j >= m && u.i < NN - m && u.j < NN - m;
            };
        }

        std::vector<double> dists(cfg.replicas);
        parallel_for(cfg.replicas, cfg.threads, [&](int r) {
            const std::uint64_t rep_seed =
                rng::substream(cfg.seed, static_cast<std::uint64_t>(rng::ModuleId::Experiment),
                               static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(r));
            if (cfg.gamma == 0.0) {
                // ballistic: D = hops + 1, no sampling required
                WeightedLattice flat;
                flat.grid = GridSpec(N, N, 1.0);
                flat.weights.assign(flat.grid.cells(), 1.0);
                dists[r] = static_cast<double>(bfs_oracle(flat, a, b, region) + 1);
            } else {
                const FieldSample field = exponent_detail::sample_for_size(cfg, n_log2, rep_seed);
                const auto lat = WeightedLattice::from_field(field, cfg.gamma);
                dists[r] = fpp_distance(lat, a, b, region).distance;
            }
        });
        ScalingRow row;
        row.scale = static_cast<double>(N);
        row.replicas = cfg.replicas;
        double sum = 0.0;
        for (double d : dists) sum += d;
        row.stat = sum / cfg.replicas;
        double ss = 0.0;
        for (double d : dists) ss += (d - row.stat) * (d - row.stat);
        row.stderr_stat =
            cfg.replicas > 1 ? std::sqrt(ss / (cfg.replicas - 1) / cfg.replicas) : 0.0;
        row.median = exponent_detail::median_of(dists);
        series.rows.push_back(row);
    }
    series.validate();
    return series;
}

// ---------------------------------------------------------------------------
// Liouville graph distance scaling experiment.

struct LgdExperimentConfig {
    double gamma = 0.3;  // 0 gives the Lebesgue measure
    int n = 6;           // measure resolution (2^n x 2^n cells)
    std::vector<double> deltas;
    int replicas = 20;
    std::uint64_t seed = 1;
    Vec2 v{0.25, 0.5};
    Vec2 w{0.75, 0.5};
    double corridor = 0.2;
};

inline ScalingSeries run_lgd_experiment(const LgdExperimentConfig& cfg) {
    require(cfg.replicas >= 1, "run_lgd_experiment: need replicas >= 1");
    require(!cfg.deltas.empty(), "run_lgd_experiment: empty delta list");
    require(!(cfg.v.x == cfg.w.x && cfg.v.y == cfg.w.y),
            "run_lgd_experiment: endpoints must be distinct");
    ScalingSeries series;
    if (cfg.replicas == 1)
        series.warnings.push_back("single replica: stderr is 0 by convention");

    const auto side = static_cast<std::uint32_t>(1u << cfg.n);
    const double mesh = std::exp2(-cfg.n);
    const GridSpec grid(side, side, mesh, {mesh / 2, mesh / 2});

    // one measure per replica, reused across the delta list
    std::vector<LqgGrid> grids;
    grids.reserve(cfg.replicas);
    for (int r = 0; r < cfg.replicas; ++r) {
        FieldSample field;
        if (cfg.gamma == 0.0) {
            field.grid = grid;
            field.values.assign(grid.cells(), 0.0);
            field.band = Band{mesh, 1.0};
        } else {
            const std::uint64_t rep_seed = rng::substream(
                cfg.seed, static_cast<std::uint64_t>(rng::ModuleId::Lqg), 0,
                static_cast<std::uint64_t>(r));
            field = EtaStack(cfg.n, rep_seed).sample_total(grid);
        }
        grids.emplace_back(field, cfg.gamma, cfg.n);
    }

    for (std::size_t d = 0; d < cfg.deltas.size(); ++d) {
        const double delta = cfg.deltas[d];
        std::vector<double> counts;
        for (int r = 0; r < cfg.replicas; ++r) {
            try {
                counts.push_back(static_cast<double>(
                    graph_distance(grids[r], delta, cfg.v, cfg.w, cfg.corridor).count));
            } catch (const UnreachableError& e) {
                series.warnings.push_back("delta " + std::to_string(delta) +
                                          " replica " + std::to_string(r) + ": " + e.what());
            }
        }
        if (counts.empty()) {
            series.warnings.push_back("delta " + std::to_string(delta) + ": row omitted");
            continue;
        }
        ScalingRow row;
        row.scale = delta;
        row.replicas = static_cast<int>(counts.size());
        double sum = 0.0;
        for (double c : counts) sum += c;
        row.stat = sum / static_cast<double>(counts.size());
        double ss = 0.0;
        for (double c : counts) ss += (c - row.stat) * (c - row.stat);
        row.stderr_stat = counts.size() > 1
                              ? std::sqrt(ss / (counts.size() - 1) / counts.size())
                              : 0.0;
        row.median = exponent_detail::median_of(counts);
        series.rows.push_back(row);
    }
    series.validate();
    return series;
}

// ---------------------------------------------------------------------------
// Comparator report.

struct WatabikiReport {
    double gamma = 0.0;
    double d_H = 0.0;
    double chi = 0.0;             // 2 / d_H
    double c_star = 1.0;
    double bound_exponent = 0.0;  // c* gamma^{4/3} / log(1/gamma); 0 at gamma = 0,
                                  // NaN where the template is undefined (gamma >= 1)
    ExponentFit measured;
};

inline WatabikiReport compare_report(const ExponentFit& fit, double gamma, double c_star) {
    WatabikiReport rep;
    rep.gamma = gamma;
    rep.d_H = watabiki_dimension(gamma);
    rep.chi = 2.0 / rep.d_H;
    rep.c_star = c_star;
    if (gamma == 0.0)
        rep.bound_exponent = 0.0;
    else if (gamma < 1.0)
        rep.bound_exponent = paper_bound_exponent(gamma, c_star);
    else
        rep.bound_exponent = std::numeric_limits<double>::quiet_NaN();
    rep.measured = fit;
    return rep;
}

}  // namespace lfpp
