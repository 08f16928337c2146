#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "lfpp/field_io.hpp"

using namespace lfpp;

namespace {

std::string cli_path() {
    const char* p = std::getenv("LFPP_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string out_file = "/tmp/lfpp_cli_out.txt";
    const std::string cmd = cli_path() + " " + args + " > " + out_file + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream is(out_file);
    std::stringstream ss;
    ss << is.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("watabiki subcommand prints the comparators") {
    const auto r = run_cli("watabiki --gamma 1.632993");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("d_H=3.9999") != std::string::npos);
    CHECK(r.out.find("chi=0.5000") != std::string::npos);
}

TEST_CASE("sample-field round-trips bit-identically") {
    const auto r = run_cli("sample-field --eta --delta 0.25 --seed 11 --out /tmp/lfpp_f1.lfpp");
    REQUIRE(r.exit_code == 0);
    const auto f = load_field("/tmp/lfpp_f1.lfpp");
    CHECK(f.band.delta == 0.25);
    CHECK(f.generator == Generator::EtaBand);

    const auto r2 = run_cli("sample-field --eta --delta 0.25 --seed 11 --out /tmp/lfpp_f2.lfpp");
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp("/tmp/lfpp_f1.lfpp") == slurp("/tmp/lfpp_f2.lfpp"));
}

TEST_CASE("LFPP_SEED environment variable overrides the seed") {
    const auto a = run_cli("sample-field --eta --delta 0.25 --seed 11 --out /tmp/lfpp_e1.lfpp");
    REQUIRE(a.exit_code == 0);
    const auto b = run_cli(
        "sample-field --eta --delta 0.25 --seed 999 --out /tmp/lfpp_e2.lfpp");
    REQUIRE(b.exit_code == 0);
    CHECK(slurp("/tmp/lfpp_e1.lfpp") != slurp("/tmp/lfpp_e2.lfpp"));
    const int rc = std::system((std::string("LFPP_SEED=11 ") + cli_path() +
                                " sample-field --eta --delta 0.25 --seed 999 --out "
                                "/tmp/lfpp_e3.lfpp > /dev/null 2>&1")
                                   .c_str());
    REQUIRE(WEXITSTATUS(rc) == 0);
    CHECK(slurp("/tmp/lfpp_e1.lfpp") == slurp("/tmp/lfpp_e3.lfpp"));
}

TEST_CASE("fpp at gamma zero prints hops + 1") {
    const auto r = run_cli("fpp --gamma 0 --n 64 --seed 7");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("distance=32") != std::string::npos);
    CHECK(r.out.find("hops=31") != std::string::npos);
}

TEST_CASE("config validation names the violated bound") {
    const auto r = run_cli("fpp --gamma 0 --n 48");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("power of two") != std::string::npos);

    const auto cap = run_cli("fpp --gamma 0.4 --n 128 --sampler exact");
    CHECK(cap.exit_code == 3);  // interior 126^2 over the dense budget
    CHECK(cap.out.find("budget") != std::string::npos);
}

TEST_CASE("exponent subcommand consumes a JSON config") {
    {
        std::ofstream os("/tmp/lfpp_cfg.json");
        os << R"({"schema_version":1,"gamma":0.0,"sizes":[16,32,64],"replicas":2,)"
           << R"("seed":5,"epsilon":0.0,"sampler":"auto"})";
    }
    const auto r = run_cli("exponent --config /tmp/lfpp_cfg.json --series-out /tmp/lfpp_s.csv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("slope=1") != std::string::npos);
    const auto csv = slurp("/tmp/lfpp_s.csv");
    CHECK(csv.find("scale,stat,stderr,replicas") == 0);
    CHECK(csv.find("16,16,0,2") != std::string::npos);

    {
        std::ofstream os("/tmp/lfpp_cfg_bad.json");
        os << R"({"schema_version":2,"gamma":0.4})";
    }
    CHECK(run_cli("exponent --config /tmp/lfpp_cfg_bad.json").exit_code == 2);
}

TEST_CASE("crossing subcommand emits a ledger and polypath") {
    const auto r = run_cli(
        "crossing --gamma 0.3 --demo-calib --seed 1003 --segments-out /tmp/lfpp_xi.csv "
        "--ledger-out /tmp/lfpp_ledger.json");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("valid=1") != std::string::npos);
    const auto csv = slurp("/tmp/lfpp_xi.csv");
    CHECK(csv.find("x0,y0,x1,y1,selected") == 0);
    const auto ledger = slurp("/tmp/lfpp_ledger.json");
    CHECK(ledger.find("\"total\"") != std::string::npos);

    // infeasible switching at default calibration still exits 0 with a report
    const auto inf = run_cli("crossing --gamma 0.6 --seed 2");
    CHECK(inf.exit_code == 0);
    CHECK(inf.out.find("switching infeasible") != std::string::npos);
}

TEST_CASE("measure-lambda prints the bound template") {
    const auto r = run_cli("measure-lambda --gamma 0.5 --replicas 3 --seed 4 --depth 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("mean=") != std::string::npos);
    CHECK(r.out.find("bound(c=0.5)=") != std::string::npos);
}

TEST_CASE("lqg-cover writes certified covers") {
    const auto r = run_cli(
        "lqg-cover --gamma 0 --n 7 --delta 0.26 --out /tmp/lfpp_cover.json");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("certified=1") != std::string::npos);
    const auto j = slurp("/tmp/lfpp_cover.json");
    CHECK(j.find("\"balls\"") != std::string::npos);
    CHECK(j.find("\"mass\"") != std::string::npos);
}
