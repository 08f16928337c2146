#pragma once

#include <cmath>
#include <cstdint>

#include "lfpp/errors.hpp"

namespace lfpp {

/// Calibration constants entering the switch-block size formula.  They are
/// existential in the underlying analysis; the defaults below were frozen
/// from a 2000-replica pilot run at gamma = 0.2 / 0.3 (see pilot_calibrate
/// in crossing_build.hpp):
///   c  ~ per-length variance rate of half the top/bottom integral gap,
///   C  ~ mean-absolute line integral of the coarse band per sqrt(length),
///   C' ~ sloped-gadget length excess times beta (small-gamma geometry).
struct CalibConstants {
    double c = 0.11;
    double C = 0.82;
    double C_prime = 0.125;
};

/// Calibration override that admits multi-block switching at desk-scale
/// gamma (the honest pilot constants push the block size past Gamma/beta;
/// with this setting the sloped gadgets actually fire, e.g. two blocks at
/// gamma = 0.3 and four at gamma = 0.2).
inline CalibConstants switch_demo_calib() { return {1.0, 0.3, 0.125}; }

inline constexpr double kDefaultGammaMax = 0.8;

struct StrategyParams {
    double gamma = 0.0;
    std::int64_t Gamma = 0;       // smallest power of two >= gamma^-2
    std::int64_t beta = 0;        // smallest power of two >= gamma^-2/3
    int m_Gamma = 0;              // log2 Gamma
    std::int64_t locations = 0;   // Gamma / beta
    double n_prime = 0.0;         // N'_gamma from the closed formula
    std::int64_t n_gamma = 2;     // smallest power of two >= max(2, N'_gamma)
    bool switching_feasible = false;  // beta * n_gamma <= Gamma
    std::int64_t block_size = 1;  // locations per strategy block (clamped)
    std::int64_t l_gamma = 0;     // sloped-gadget block count
    CalibConstants calib;

    double gamma_inv_sq() const { return 1.0 / (gamma * gamma); }
};

namespace crossing_detail {

inline std::int64_t next_pow2_at_least(double x) {
    std::int64_t p = 1;
    while (static_cast<double>(p) < x) p *= 2;
    return p;
}

/// Sloped-gadget geometry shared by derive_params and the layout builder.
/// All quantities in the local frame of V^Gamma = [0,Gamma] x [0,1].
struct GadgetGeometry {
    double c_left_x, c_left_y;    // center of R_{1,j,left} for j = 1
    double c_right_x, c_right_y;  // center of R_{2,j,right} for j = 1
    double ext_top_y, ext_bot_y;  // extension heights
    double raw_length;            // |e_up - e_down| before dyadic rounding
    std::int64_t l_gamma;         // ceil(raw_length * Gamma)
};

inline GadgetGeometry gadget_geometry(std::int64_t Gamma, std::int64_t beta) {
    GadgetGeometry g;
    const double inv_g = 1.0 / static_cast<double>(Gamma);
    const double h = inv_g * inv_g;
    g.c_left_x = 0.5 * inv_g;
    g.c_left_y = 0.75 + 0.5 * h;
    g.c_right_x = static_cast<double>(beta) - 0.5 * inv_g;
    g.c_right_y = 0.25 + 0.5 * h;
    g.ext_top_y = 0.75 + 2.0 * h;
    g.ext_bot_y = 0.25 - h;
    const double dx = g.c_right_x - g.c_left_x;
    const double dy = g.c_left_y - g.c_right_y;  // positive
    const double span_y = g.ext_top_y - g.ext_bot_y;
    g.raw_length = span_y * std::hypot(dx, dy) / dy;
    g.l_gamma = static_cast<std::int64_t>(std::ceil(g.raw_length * Gamma - 1e-9));
    return g;
}

}  // namespace crossing_detail

/// Dyadic parameter derivation.  Infeasible switching (beta * N_gamma >
/// Gamma) is reported through the flag, not an exception; the strategy then
/// degenerates to a single block spanning all locations.
inline StrategyParams derive_params(double gamma, const CalibConstants& calib = {},
                                    double gamma_max = kDefaultGammaMax) {
    require(gamma > 0.0 && gamma <= gamma_max,
            "derive_params: gamma must be in (0, gamma_max]");
    StrategyParams p;
    p.gamma = gamma;
    p.calib = calib;
    p.Gamma = crossing_detail::next_pow2_at_least(1.0 / (gamma * gamma));
    p.beta = crossing_detail::next_pow2_at_least(std::pow(gamma, -2.0 / 3.0));
    p.m_Gamma = static_cast<int>(std::round(std::log2(static_cast<double>(p.Gamma))));
    p.locations = p.Gamma / p.beta;

    const double b = static_cast<double>(p.beta);
    const double lin = 1.0 / b + gamma * std::sqrt(b);
    p.n_prime = 4.0 * calib.C * calib.C * lin * lin /
                ((2.0 / M_PI) * calib.c * b * gamma * gamma);
    p.n_gamma = crossing_detail::next_pow2_at_least(std::max(2.0, p.n_prime));
    p.switching_feasible = (p.beta * p.n_gamma <= p.Gamma) && p.locations >= 1;
    p.block_size = p.switching_feasible ? std::min(p.n_gamma, p.locations)
                                        : std::max<std::int64_t>(p.locations, 1);
    p.l_gamma = crossing_detail::gadget_geometry(p.Gamma, p.beta).l_gamma;
    return p;
}

/// lambda_{gamma,n} <= Gamma (1 - 0.5 c gamma^{4/3})^{floor(n / 2 m_Gamma)};
/// equals Gamma for n <= 0.
inline double lambda_bound(int n, double gamma, double c) {
    require(c > 0.0 && c < 1.0, "lambda_bound: c must be in (0,1)");
    const StrategyParams p = derive_params(gamma);
    if (n <= 0) return static_cast<double>(p.Gamma);
    const auto steps = n / (2 * p.m_Gamma);  // integer floor
    return static_cast<double>(p.Gamma) *
           std::pow(1.0 - 0.5 * c * std::pow(gamma, 4.0 / 3.0), steps);
}

}  // namespace lfpp
