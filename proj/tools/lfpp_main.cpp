// Command-line laboratory driver: field sampling, shortest-path queries,
// crossing construction, measure covers, and scaling experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lfpp/lfpp.hpp"

using nlohmann::json;
using namespace lfpp;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNumeric = 4;

std::uint64_t env_seed_override(std::uint64_t seed) {
    if (const char* env = std::getenv("LFPP_SEED"))
        return std::strtoull(env, nullptr, 10);
    return seed;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DomainError("cannot open output file: " + path);
    os << std::setprecision(17);
    return os;
}

void write_series_csv(const std::string& path, const ScalingSeries& series) {
    auto os = open_out(path);
    os << "scale,stat,stderr,replicas\n";
    for (const auto& row : series.rows)
        os << row.scale << ',' << row.stat << ',' << row.stderr_stat << ','
           << row.replicas << '\n';
}

json series_to_json(const ScalingSeries& series) {
    json rows = json::array();
    for (const auto& row : series.rows)
        rows.push_back({{"scale", row.scale},
                        {"stat", row.stat},
                        {"stderr", row.stderr_stat},
                        {"replicas", row.replicas},
                        {"median", row.median}});
    return {{"rows", rows}, {"warnings", series.warnings}};
}

json fit_to_json(const ExponentFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"ci95", {fit.ci_lo, fit.ci_hi}},
            {"r2", fit.r2}};
}

json report_to_json(const WatabikiReport& rep) {
    json j{{"gamma", rep.gamma},
           {"watabiki_d_H", rep.d_H},
           {"chi", rep.chi},
           {"c_star", rep.c_star},
           {"measured", fit_to_json(rep.measured)}};
    if (std::isnan(rep.bound_exponent))
        j["bound_exponent"] = nullptr;
    else
        j["bound_exponent"] = rep.bound_exponent;
    return j;
}

void write_polypath_csv(const std::string& path, const Polypath& xi) {
    auto os = open_out(path);
    os << "x0,y0,x1,y1,selected\n";
    for (std::size_t s = 0; s < xi.size(); ++s)
        os << xi.segments[s].a.x << ',' << xi.segments[s].a.y << ','
           << xi.segments[s].b.x << ',' << xi.segments[s].b.y << ','
           << int(xi.selected[s]) << '\n';
}

json ledger_to_json(const WeightLedger& w) {
    return {{"base_length_term", w.base_length_term},
            {"gadget_excess_term", w.gadget_excess_term},
            {"tie_term", w.tie_term},
            {"field_integral_term", w.field_integral_term},
            {"total", w.total}};
}

// --- selftest -------------------------------------------------------------

int run_selftest() {
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
        if (!ok) ++failures;
    };

    {
        EtaBandField band(Band{0.25, 1.0}, 12);
        const double expect = band.continuum_variance() + band.quadrature_bias();
        double s2 = 0.0;
        const int reps = 1500;
        for (int r = 0; r < reps; ++r) {
            const double v =
                EtaBandField(Band{0.25, 1.0}, rng::substream(2, 0, r)).value_at({0.5, 0.5});
            s2 += v * v;
        }
        const double var = s2 / reps;
        check("eta variance law (quick)",
              std::abs(var - expect) < 5 * expect * std::sqrt(2.0 / reps));
    }
    {
        const auto f = green_factor(DgffSpec::square(4));
        check("dgff factorization residual", f.reconstruction_residual < 1e-9);
    }
    {
        WeightedLattice flat;
        flat.grid = GridSpec(8, 8, 1.0);
        flat.weights.assign(64, 1.0);
        const auto d = fpp_distance(flat, {0, 0}, {7, 7});
        check("fpp ballistic distance", d.distance == 15.0);
    }
    {
        check("watabiki spot values",
              std::abs(watabiki_dimension(0) - 2) < 1e-12 &&
                  std::abs(watabiki_dimension(std::sqrt(8.0 / 3.0)) - 4) < 1e-12);
    }
    {
        const auto p = derive_params(0.6);
        EtaStack stack(2 * p.m_Gamma, 5);
        const EtaStackSource src(stack);
        const auto xi = build_crossing(src, reference_rect(p), 2 * p.m_Gamma, p);
        check("crossing predicate", check_crossing(xi, reference_rect(p)).ok());
    }
    std::cout << (failures ? "selftest: FAILED\n" : "selftest: all checks passed\n");
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Liouville first-passage percolation laboratory"};
    app.require_subcommand(1);
    std::cout << std::setprecision(12);

    // --- sample-field ---
    auto* sf = app.add_subcommand("sample-field", "sample a field and dump it");
    bool sf_eta = false, sf_dgff = false, sf_dgff_band = false;
    double sf_delta = 0.25, sf_delta_prime = 1.0, sf_mesh = 0.0;
    int sf_n = 4, sf_k = 1;
    std::uint64_t sf_seed = 1;
    std::string sf_out;
    sf->add_flag("--eta", sf_eta, "white-noise band field");
    sf->add_flag("--dgff", sf_dgff, "exact discrete GFF");
    sf->add_flag("--dgff-band", sf_dgff_band, "lazy-walk band of the discrete GFF");
    sf->add_option("--delta", sf_delta, "band lower scale");
    sf->add_option("--delta-prime", sf_delta_prime, "band upper scale");
    sf->add_option("--mesh", sf_mesh, "grid mesh (default delta/4)");
    sf->add_option("--n", sf_n, "lattice size exponent (N = 2^n)");
    sf->add_option("--k", sf_k, "band index for --dgff-band");
    sf->add_option("--seed", sf_seed, "master seed");
    sf->add_option("--out", sf_out, "output path")->required();

    // --- fpp ---
    auto* fp = app.add_subcommand("fpp", "lattice first-passage distance");
    double fp_gamma = 0.0, fp_epsilon = 0.25;
    int fp_size = 64;
    std::uint64_t fp_seed = 1;
    std::string fp_sampler = "auto", fp_geo_out;
    bool fp_restrict = false;
    fp->add_option("--gamma", fp_gamma, "inverse temperature")->required();
    fp->add_option("--n", fp_size, "box side N (power of two)")->required();
    fp->add_option("--seed", fp_seed, "seed");
    fp->add_option("--epsilon", fp_epsilon, "inner margin for the endpoints");
    fp->add_option("--sampler", fp_sampler, "auto | exact | band");
    fp->add_flag("--restrict", fp_restrict, "restrict paths to the inner box");
    fp->add_option("--geodesic-out", fp_geo_out, "CSV of geodesic vertices");

    // --- crossing ---
    auto* cr = app.add_subcommand("crossing", "build one multi-scale crossing");
    double cr_gamma = 0.3;
    int cr_depth = -1;
    std::uint64_t cr_seed = 1;
    bool cr_demo = false;
    double cr_c = -1, cr_C = -1, cr_Cp = -1;
    std::string cr_segments_out, cr_ledger_out;
    cr->add_option("--gamma", cr_gamma)->required();
    cr->add_option("--depth", cr_depth, "recursion depth n (default 2 m_Gamma)");
    cr->add_option("--seed", cr_seed);
    cr->add_flag("--demo-calib", cr_demo, "calibration admitting switches at desk scale");
    cr->add_option("--calib-c", cr_c);
    cr->add_option("--calib-C", cr_C);
    cr->add_option("--calib-Cp", cr_Cp);
    cr->add_option("--segments-out", cr_segments_out, "polypath CSV");
    cr->add_option("--ledger-out", cr_ledger_out, "weight ledger JSON");

    // --- measure-lambda ---
    auto* ml = app.add_subcommand("measure-lambda", "Monte Carlo crossing weight");
    double ml_gamma = 0.3, ml_cbound = 0.5;
    int ml_depth = -1, ml_replicas = 100;
    std::uint64_t ml_seed = 1;
    bool ml_demo = false;
    std::string ml_out;
    ml->add_option("--gamma", ml_gamma)->required();
    ml->add_option("--depth", ml_depth, "recursion depth n (default 2 m_Gamma)");
    ml->add_option("--replicas", ml_replicas);
    ml->add_option("--seed", ml_seed);
    ml->add_flag("--demo-calib", ml_demo);
    ml->add_option("--c-bound", ml_cbound, "c in the recursion bound template");
    ml->add_option("--out", ml_out, "JSON report");

    // --- lqg-cover ---
    auto* lc = app.add_subcommand("lqg-cover", "dyadic ball cover of a segment");
    double lc_gamma = 0.3, lc_delta = 0.1;
    int lc_n = 6;
    std::uint64_t lc_seed = 1;
    std::vector<double> lc_seg = {0.25, 0.5, 0.75, 0.5};
    std::string lc_out;
    lc->add_option("--gamma", lc_gamma)->required();
    lc->add_option("--n", lc_n, "measure resolution exponent");
    lc->add_option("--delta", lc_delta)->required();
    lc->add_option("--seed", lc_seed);
    lc->add_option("--segment", lc_seg, "x0 y0 x1 y1")->expected(4);
    lc->add_option("--out", lc_out, "cover JSON");

    // --- lgd ---
    auto* lg = app.add_subcommand("lgd", "Liouville graph distance scaling");
    double lg_gamma = 0.3;
    int lg_n = 6, lg_replicas = 10;
    std::uint64_t lg_seed = 1;
    std::vector<double> lg_deltas;
    std::string lg_out, lg_summary, lg_chain_out;
    lg->add_option("--gamma", lg_gamma)->required();
    lg->add_option("--n", lg_n);
    lg->add_option("--deltas", lg_deltas, "delta list")->required();
    lg->add_option("--replicas", lg_replicas);
    lg->add_option("--seed", lg_seed);
    lg->add_option("--out", lg_out, "series CSV");
    lg->add_option("--summary", lg_summary, "fit JSON");
    lg->add_option("--chain-out", lg_chain_out, "first-delta ball chain CSV");

    // --- exponent ---
    auto* ex = app.add_subcommand("exponent", "FPP distance-exponent experiment");
    std::string ex_config, ex_series_out, ex_report_out, ex_sampler = "auto";
    double ex_gamma = 0.4, ex_epsilon = 0.25, ex_cstar = 1.0;
    std::vector<int> ex_sizes = {64, 128, 256, 512};
    int ex_replicas = 200, ex_threads = 1;
    std::uint64_t ex_seed = 1;
    ex->add_option("--config", ex_config, "JSON experiment config");
    ex->add_option("--gamma", ex_gamma);
    ex->add_option("--sizes", ex_sizes, "N list");
    ex->add_option("--replicas", ex_replicas);
    ex->add_option("--seed", ex_seed);
    ex->add_option("--epsilon", ex_epsilon);
    ex->add_option("--sampler", ex_sampler, "auto | exact | band");
    ex->add_option("--threads", ex_threads);
    ex->add_option("--c-star", ex_cstar);
    ex->add_option("--series-out", ex_series_out, "series CSV");
    ex->add_option("--report-out", ex_report_out, "comparator report JSON");

    // --- watabiki ---
    auto* wb = app.add_subcommand("watabiki", "dimension and exponent comparators");
    double wb_gamma = 0.0, wb_cstar = 1.0;
    wb->add_option("--gamma", wb_gamma)->required();
    wb->add_option("--c-star", wb_cstar);

    auto* st = app.add_subcommand("selftest", "quick internal checks");

    CLI11_PARSE(app, argc, argv);

    const auto parse_sampler = [](const std::string& s) {
        if (s == "auto") return FppExperimentConfig::Sampler::Auto;
        if (s == "exact") return FppExperimentConfig::Sampler::Exact;
        if (s == "band") return FppExperimentConfig::Sampler::Band;
        throw DomainError("unknown sampler '" + s + "' (want auto | exact | band)");
    };

    try {
        if (sf->parsed()) {
            const std::uint64_t seed = env_seed_override(sf_seed);
            FieldSample field;
            if (sf_eta + sf_dgff + sf_dgff_band != 1)
                throw DomainError("sample-field: pick exactly one of --eta/--dgff/--dgff-band");
            if (sf_eta) {
                const double mesh = sf_mesh > 0 ? sf_mesh : sf_delta / 4.0;
                const GridSpec grid = GridSpec::covering({{0, 0}, {1, 1}}, mesh, 1);
                field = sample_eta(grid, sf_delta, sf_delta_prime, seed);
            } else if (sf_dgff) {
                field = sample_dgff_exact(DgffSpec::square(sf_n), seed);
            } else {
                field = sample_dgff_band(DgffSpec::square(sf_n), sf_k, seed);
            }
            save_field(sf_out, field);
            std::cout << "wrote " << sf_out << " (" << field.grid.width << "x"
                      << field.grid.height << " cells)\n";
        } else if (fp->parsed()) {
            FppExperimentConfig cfg;
            cfg.gamma = fp_gamma;
            cfg.sizes = {fp_size};
            cfg.replicas = 1;
            cfg.seed = env_seed_override(fp_seed);
            cfg.epsilon = fp_epsilon;
            cfg.sampler = parse_sampler(fp_sampler);
            cfg.restrict_to_inner = fp_restrict;

            const int n_log2 = static_cast<int>(std::round(std::log2(fp_size)));
            require(fp_size >= 4 && (1 << n_log2) == fp_size,
                    "fpp: --n must be a power of two >= 4");
            const auto off = static_cast<std::uint32_t>(std::floor(fp_epsilon * fp_size));
            const Vertex a{off, static_cast<std::uint32_t>(fp_size / 2)};
            const Vertex b{static_cast<std::uint32_t>(fp_size - 1 - off),
                           static_cast<std::uint32_t>(fp_size / 2)};

            WeightedLattice lat;
            if (cfg.gamma == 0.0) {
                lat.grid = GridSpec(fp_size, fp_size, 1.0);
                lat.weights.assign(lat.grid.cells(), 1.0);
            } else {
                const std::uint64_t rep_seed = rng::substream(
                    cfg.seed, static_cast<std::uint64_t>(rng::ModuleId::Experiment),
                    static_cast<std::uint64_t>(fp_size), 0);
                lat = WeightedLattice::from_field(
                    exponent_detail::sample_for_size(cfg, n_log2, rep_seed), cfg.gamma);
            }
            const auto res = fpp_distance(lat, a, b);
            std::cout << "N=" << fp_size << " distance=" << res.distance
                      << " hops=" << bfs_oracle(lat, a, b) << " expanded=" << res.expanded
                      << '\n';
            if (!fp_geo_out.empty()) {
                auto os = open_out(fp_geo_out);
                os << "x,y\n";
                for (const auto& v : res.path.vertices) os << v.i << ',' << v.j << '\n';
            }
        } else if (cr->parsed() || ml->parsed()) {
            const bool is_cr = cr->parsed();
            const double gamma = is_cr ? cr_gamma : ml_gamma;
            CalibConstants calib;
            if ((is_cr && cr_demo) || (!is_cr && ml_demo)) calib = switch_demo_calib();
            if (is_cr) {
                if (cr_c > 0) calib.c = cr_c;
                if (cr_C > 0) calib.C = cr_C;
                if (cr_Cp > 0) calib.C_prime = cr_Cp;
            }
            const auto params = derive_params(gamma, calib);
            if (!params.switching_feasible)
                std::cout << "note: switching infeasible (beta N_gamma = "
                          << params.beta * params.n_gamma << " > Gamma = " << params.Gamma
                          << "); strategy degenerates to a single block\n";

            if (is_cr) {
                const int depth = cr_depth > 0 ? cr_depth : 2 * params.m_Gamma;
                const std::uint64_t seed = env_seed_override(cr_seed);
                EtaStack stack(std::max(1, depth), seed);
                const EtaStackSource src(stack);
                CrossingBuilder builder(src, params);
                const auto xi = builder.build(reference_rect(params), depth);
                const auto ledger = crossing_weight(src, xi, gamma);
                const auto chk = check_crossing(xi, reference_rect(params));
                std::cout << "crossing: segments=" << xi.size()
                          << " switches=" << xi.switches << " valid=" << chk.ok()
                          << " total=" << ledger.total << '\n';
                if (!cr_segments_out.empty()) write_polypath_csv(cr_segments_out, xi);
                if (!cr_ledger_out.empty()) {
                    json j = ledger_to_json(ledger);
                    j["switches"] = xi.switches;
                    j["valid"] = chk.ok();
                    j["switching_feasible"] = params.switching_feasible;
                    open_out(cr_ledger_out) << j.dump(2) << '\n';
                }
            } else {
                const int depth = ml_depth > 0 ? ml_depth : 2 * params.m_Gamma;
                const auto est =
                    measure_lambda(params, depth, ml_replicas, env_seed_override(ml_seed));
                const double bound = lambda_bound(depth, gamma, ml_cbound);
                std::cout << "lambda(" << gamma << ", n=" << depth << "): mean=" << est.mean
                          << " stderr=" << est.stderr_mean << " bound(c=" << ml_cbound
                          << ")=" << bound << '\n';
                if (!ml_out.empty()) {
                    const json j{{"gamma", gamma},
                                 {"depth", depth},
                                 {"replicas", est.replicas},
                                 {"mean", est.mean},
                                 {"stderr", est.stderr_mean},
                                 {"bound_template_c", ml_cbound},
                                 {"bound_template", bound},
                                 {"depth_clamped", est.depth_clamped}};
                    open_out(ml_out) << j.dump(2) << '\n';
                }
            }
        } else if (lc->parsed()) {
            const std::uint64_t seed = env_seed_override(lc_seed);
            const auto side = static_cast<std::uint32_t>(1u << lc_n);
            const double mesh = std::exp2(-lc_n);
            const GridSpec grid(side, side, mesh, {mesh / 2, mesh / 2});
            FieldSample field;
            if (lc_gamma == 0.0) {
                field.grid = grid;
                field.values.assign(grid.cells(), 0.0);
                field.band = Band{mesh, 1.0};
            } else {
                field = EtaStack(lc_n, seed).sample_total(grid);
            }
            const LqgGrid g(field, lc_gamma, lc_n);
            const Segment seg{{lc_seg[0], lc_seg[1]}, {lc_seg[2], lc_seg[3]}};
            const auto cover = cover_segment(g, lc_delta, seg);
            std::cout << "cover: count=" << cover.count << " certified=" << cover.certified
                      << " uncovered=" << cover.uncovered << '\n';
            if (!lc_out.empty()) {
                json balls = json::array();
                for (std::size_t b = 0; b < cover.balls.size(); ++b)
                    balls.push_back(
                        {{"center", {cover.balls[b].center.x, cover.balls[b].center.y}},
                         {"radius", cover.balls[b].radius},
                         {"mass", cover.masses[b]}});
                const json j{{"delta", lc_delta},
                             {"count", cover.count},
                             {"certified", cover.certified},
                             {"uncovered", cover.uncovered},
                             {"balls", balls}};
                open_out(lc_out) << j.dump(2) << '\n';
            }
        } else if (lg->parsed()) {
            LgdExperimentConfig cfg;
            cfg.gamma = lg_gamma;
            cfg.n = lg_n;
            cfg.deltas = lg_deltas;
            cfg.replicas = lg_replicas;
            cfg.seed = env_seed_override(lg_seed);
            const auto series = run_lgd_experiment(cfg);
            for (const auto& row : series.rows)
                std::cout << "delta=" << row.scale << " count=" << row.stat
                          << " stderr=" << row.stderr_stat << '\n';
            for (const auto& w : series.warnings) std::cout << "warning: " << w << '\n';
            if (!lg_out.empty()) write_series_csv(lg_out, series);
            if (!lg_summary.empty()) {
                json j = series_to_json(series);
                if (series.rows.size() >= 3) j["fit"] = fit_to_json(fit_exponent(series));
                open_out(lg_summary) << j.dump(2) << '\n';
            }
            if (!lg_chain_out.empty() && !cfg.deltas.empty()) {
                // chain of the first delta on the first replica's measure
                FieldSample field;
                const auto side = static_cast<std::uint32_t>(1u << cfg.n);
                const double mesh = std::exp2(-cfg.n);
                const GridSpec grid(side, side, mesh, {mesh / 2, mesh / 2});
                if (cfg.gamma == 0.0) {
                    field.grid = grid;
                    field.values.assign(grid.cells(), 0.0);
                    field.band = Band{mesh, 1.0};
                } else {
                    field = EtaStack(cfg.n,
                                     rng::substream(cfg.seed,
                                                    static_cast<std::uint64_t>(rng::ModuleId::Lqg),
                                                    0, 0))
                                .sample_total(grid);
                }
                const LqgGrid g(field, cfg.gamma, cfg.n);
                const auto chain = graph_distance(g, cfg.deltas[0], cfg.v, cfg.w, cfg.corridor);
                auto os = open_out(lg_chain_out);
                os << "center_x,center_y,radius\n";
                for (const auto& b : chain.chain)
                    os << b.center.x << ',' << b.center.y << ',' << b.radius << '\n';
            }
        } else if (ex->parsed()) {
            FppExperimentConfig cfg;
            double c_star = ex_cstar;
            if (!ex_config.empty()) {
                std::ifstream is(ex_config);
                if (!is) throw DomainError("cannot open config: " + ex_config);
                json j;
                is >> j;
                if (!j.contains("schema_version") || j["schema_version"] != 1)
                    throw DomainError("config: schema_version must be 1");
                cfg.gamma = j.value("gamma", 0.4);
                cfg.sizes = j.value("sizes", std::vector<int>{64, 128, 256, 512});
                cfg.replicas = j.value("replicas", 200);
                cfg.seed = j.value("seed", std::uint64_t{1});
                cfg.epsilon = j.value("epsilon", 0.25);
                cfg.sampler = parse_sampler(j.value("sampler", std::string("auto")));
                cfg.restrict_to_inner = j.value("restrict_to_inner", false);
                cfg.threads = j.value("threads", 1);
                c_star = j.value("c_star", 1.0);
            } else {
                cfg.gamma = ex_gamma;
                cfg.sizes = ex_sizes;
                cfg.replicas = ex_replicas;
                cfg.seed = ex_seed;
                cfg.epsilon = ex_epsilon;
                cfg.sampler = parse_sampler(ex_sampler);
                cfg.threads = ex_threads;
            }
            cfg.seed = env_seed_override(cfg.seed);
            require(cfg.gamma >= 0.0, "exponent: gamma must be >= 0");

            const auto series = run_fpp_experiment(cfg);
            const auto fit = fit_exponent(series);
            const auto rep = compare_report(fit, cfg.gamma, c_star);
            std::cout << "slope=" << fit.slope << " ci=[" << fit.ci_lo << ", " << fit.ci_hi
                      << "] r2=" << fit.r2 << " | watabiki d_H=" << rep.d_H
                      << " chi=" << rep.chi << '\n';
            if (!ex_series_out.empty()) write_series_csv(ex_series_out, series);
            if (!ex_report_out.empty()) {
                json j = report_to_json(rep);
                j["series"] = series_to_json(series);
                open_out(ex_report_out) << j.dump(2) << '\n';
            }
        } else if (wb->parsed()) {
            const auto rep = compare_report(ExponentFit{}, wb_gamma, wb_cstar);
            std::cout << "d_H=" << rep.d_H << " chi=" << rep.chi;
            if (!std::isnan(rep.bound_exponent))
                std::cout << " bound_exponent=" << rep.bound_exponent;
            std::cout << '\n';
        } else if (st->parsed()) {
            return run_selftest();
        }
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ResolutionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
