#include <catch_amalgamated.hpp>

#include <cmath>

#include "lfpp/exponent.hpp"

using namespace lfpp;

TEST_CASE("Hausdorff dimension formula") {
    CHECK(watabiki_dimension(0.0) == Catch::Approx(2.0).margin(1e-12));
    CHECK(watabiki_dimension(std::sqrt(8.0 / 3.0)) == Catch::Approx(4.0).margin(1e-12));
    CHECK(watabiki_dimension(2.0) ==
          Catch::Approx(2.0 + 2.0 * std::sqrt(2.0)).margin(1e-12));
    CHECK_THROWS_AS(watabiki_dimension(-0.1), DomainError);
}

TEST_CASE("graph distance exponent prediction chi = 2 / d_H") {
    CHECK(lgd_exponent_prediction(0.0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(lgd_exponent_prediction(std::sqrt(8.0 / 3.0)) ==
          Catch::Approx(0.5).margin(1e-12));
    CHECK(lgd_exponent_prediction(2.0) ==
          Catch::Approx(std::sqrt(2.0) - 1.0).margin(1e-12));  // 2 / (2 + 2 sqrt 2)
}

TEST_CASE("upper-bound exponent template") {
    CHECK(paper_bound_exponent(std::exp(-1.0), 1.0) ==
          Catch::Approx(std::exp(-4.0 / 3.0)).margin(1e-12));
    CHECK(paper_bound_exponent(0.5, 1.0) ==
          Catch::Approx(std::pow(0.5, 4.0 / 3.0) / std::log(2.0)).margin(1e-12));
    CHECK_THROWS_AS(paper_bound_exponent(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(paper_bound_exponent(1.0, 1.0), DomainError);
}

TEST_CASE("monotonicity of the comparators on [0, 2]") {
    double prev_d = watabiki_dimension(0.0), prev_chi = lgd_exponent_prediction(0.0);
    for (int i = 1; i <= 100; ++i) {
        const double g = 2.0 * i / 100.0;
        const double d = watabiki_dimension(g), chi = lgd_exponent_prediction(g);
        CHECK(d > prev_d);
        CHECK(chi < prev_chi);
        prev_d = d;
        prev_chi = chi;
    }
}

TEST_CASE("fit recovers exact power laws") {
    ScalingSeries series;
    const double a = 0.77;
    for (double s : {2.0, 4.0, 8.0, 16.0, 32.0})
        series.rows.push_back({s, std::pow(s, a), 0.0, 1, std::pow(s, a)});
    const auto fit = fit_exponent(series);
    CHECK(std::abs(fit.slope - a) < 1e-10);
    CHECK(fit.r2 == Catch::Approx(1.0).margin(1e-12));
    CHECK(fit.ci_lo <= fit.slope);
    CHECK(fit.ci_hi >= fit.slope);
}

TEST_CASE("fit of a constant series has slope zero") {
    ScalingSeries series;
    for (double s : {2.0, 4.0, 8.0, 16.0})
        series.rows.push_back({s, 5.5, 0.1, 10, 5.5});
    CHECK(fit_exponent(series).slope == 0.0);
}

TEST_CASE("fit rejects bad input") {
    ScalingSeries series;
    series.rows.push_back({2.0, 1.0, 0.0, 1, 1.0});
    series.rows.push_back({4.0, 2.0, 0.0, 1, 2.0});
    CHECK_THROWS_AS(fit_exponent(series), DomainError);  // too few rows
    series.rows.push_back({8.0, -1.0, 0.0, 1, -1.0});
    CHECK_THROWS_AS(fit_exponent(series), DomainError);  // nonpositive stat
}

TEST_CASE("noisy power law: CI covers the exponent in most seeded trials") {
    const double a = 0.9;
    int covered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        rng::Xoshiro256pp gen(rng::substream(31337, 0, trial));
        ScalingSeries series;
        for (int k = 0; k < 8; ++k) {
            const double s = std::exp2(3 + k);
            const int reps = 40;
            double sum = 0.0, ss = 0.0;
            const double truth = std::pow(s, a);
            for (int r = 0; r < reps; ++r) {
                const double x = truth * (1.0 + 0.05 * gen.normal());
                sum += x;
                ss += x * x;
            }
            const double mean = sum / reps;
            const double var = ss / reps - mean * mean;
            series.rows.push_back(
                {s, mean, std::sqrt(var / reps), reps, mean});
        }
        const auto fit = fit_exponent(series);
        if (fit.ci_lo <= a && a <= fit.ci_hi) ++covered;
    }
    INFO("covered " << covered << " / 100");
    CHECK(covered >= 90);
}

TEST_CASE("FPP experiment at gamma = 0 is ballistic") {
    FppExperimentConfig cfg;
    cfg.gamma = 0.0;
    cfg.sizes = {16, 32, 64, 128};
    cfg.replicas = 3;
    cfg.epsilon = 0.0;  // endpoints on the box sides: D = N exactly
    const auto series = run_fpp_experiment(cfg);
    REQUIRE(series.rows.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(series.rows[r].stat == series.rows[r].scale);
        CHECK(series.rows[r].stderr_stat == 0.0);
    }
    const auto fit = fit_exponent(series);
    CHECK(std::abs(fit.slope - 1.0) < 1e-12);
}

TEST_CASE("FPP experiment: determinism and flags") {
    FppExperimentConfig cfg;
    cfg.gamma = 0.4;
    cfg.sizes = {16, 32};
    cfg.replicas = 3;
    cfg.seed = 777;
    const auto a = run_fpp_experiment(cfg);
    const auto b = run_fpp_experiment(cfg);
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].stat == b.rows[r].stat);
        CHECK(a.rows[r].stderr_stat == b.rows[r].stderr_stat);
        CHECK(a.rows[r].median == b.rows[r].median);
    }

    cfg.replicas = 1;
    const auto single = run_fpp_experiment(cfg);
    CHECK_FALSE(single.warnings.empty());
    CHECK(single.rows[0].stderr_stat == 0.0);

    cfg.sizes = {48};  // not a power of two
    CHECK_THROWS_AS(run_fpp_experiment(cfg), DomainError);
}

TEST_CASE("FPP experiment with the band sampler and restricted paths") {
    FppExperimentConfig cfg;
    cfg.gamma = 0.3;
    cfg.sizes = {16, 32};
    cfg.replicas = 2;
    cfg.sampler = FppExperimentConfig::Sampler::Band;
    cfg.restrict_to_inner = true;
    const auto series = run_fpp_experiment(cfg);
    REQUIRE(series.rows.size() == 2);
    for (const auto& row : series.rows) CHECK(row.stat > 0.0);
}

TEST_CASE("LGD experiment at gamma = 0 follows the covering curve") {
    LgdExperimentConfig cfg;
    cfg.gamma = 0.0;
    cfg.n = 8;
    cfg.replicas = 1;
    // Exactly geometric delta list: sqrt(1.1) 2^-k sits between the level-k
    // and level-(k-1) discrete Lebesgue masses for every k here, so level k
    // is the first admissible one and the chain count is the closed-form
    // greedy cover between the quarter points, 2^{k-1} + 1 balls.
    for (int k = 5; k >= 2; --k) cfg.deltas.push_back(std::sqrt(1.1) * std::exp2(-k));

    const auto series = run_lgd_experiment(cfg);
    REQUIRE(series.rows.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) {
        const int k = 5 - static_cast<int>(r);
        CHECK(series.rows[r].stat == static_cast<double>(std::exp2(k - 1) + 1));
    }

    // The +1 is the endpoint-ball fencepost; the pure scaling part of the
    // covering curve has slope exactly -1.
    ScalingSeries pure = series;
    for (auto& row : pure.rows) row.stat -= 1.0;
    const auto fit = fit_exponent(pure);
    CHECK(std::abs(fit.slope + 1.0) < 1e-3);
    const auto raw_fit = fit_exponent(series);
    CHECK(std::abs(raw_fit.slope + 1.0) < 0.2);  // fencepost effect on raw counts
}

TEST_CASE("LGD experiment validation and reproducibility") {
    LgdExperimentConfig cfg;
    cfg.gamma = 0.3;
    cfg.n = 5;
    cfg.deltas = {0.5, 0.3, 0.2};
    cfg.replicas = 3;
    cfg.seed = 99;
    const auto a = run_lgd_experiment(cfg);
    const auto b = run_lgd_experiment(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r)
        CHECK(a.rows[r].stat == b.rows[r].stat);

    cfg.w = cfg.v;
    CHECK_THROWS_AS(run_lgd_experiment(cfg), DomainError);
}

TEST_CASE("comparator report") {
    ScalingSeries series;
    for (double s : {2.0, 4.0, 8.0})
        series.rows.push_back({s, std::pow(s, 0.8), 0.0, 1, 0.0});
    const auto fit = fit_exponent(series);

    const auto rep = compare_report(fit, std::sqrt(8.0 / 3.0), 1.0);
    CHECK(rep.d_H == Catch::Approx(4.0).margin(1e-12));
    CHECK(rep.chi == Catch::Approx(0.5).margin(1e-12));
    CHECK(rep.chi == Catch::Approx(2.0 / rep.d_H).margin(1e-12));

    const auto zero = compare_report(fit, 0.0, 1.0);
    CHECK(zero.d_H == Catch::Approx(2.0).margin(1e-12));
    CHECK(zero.chi == Catch::Approx(1.0).margin(1e-12));
    CHECK(zero.bound_exponent == 0.0);
}
