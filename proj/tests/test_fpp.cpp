#include <catch_amalgamated.hpp>

#include <cmath>

#include "lfpp/eta_field.hpp"
#include "lfpp/fpp.hpp"

using namespace lfpp;

namespace {

WeightedLattice flat_lattice(std::uint32_t w, std::uint32_t h) {
    WeightedLattice lat;
    lat.grid = GridSpec(w, h, 1.0);
    lat.gamma = 0.0;
    lat.weights.assign(lat.grid.cells(), 1.0);
    return lat;
}

WeightedLattice random_lattice(std::uint32_t w, std::uint32_t h, double gamma,
                               std::uint64_t seed) {
    WeightedLattice lat;
    lat.grid = GridSpec(w, h, 1.0);
    lat.gamma = gamma;
    lat.weights.resize(lat.grid.cells());
    rng::Xoshiro256pp gen(seed);
    for (auto& wt : lat.weights) wt = std::exp(gamma * gen.normal());
    return lat;
}

}  // namespace

TEST_CASE("identical endpoints give zero distance") {
    const auto lat = random_lattice(4, 4, 1.0, 3);
    const auto r = fpp_distance(lat, {2, 2}, {2, 2});
    CHECK(r.distance == 0.0);
    REQUIRE(r.path.vertices.size() == 1);
}

TEST_CASE("adjacent vertices at gamma = 0 cost two unit weights") {
    const auto lat = flat_lattice(4, 4);
    const auto r = fpp_distance(lat, {1, 1}, {2, 1});
    CHECK(r.distance == 2.0);
    REQUIRE(r.path.vertices.size() == 2);
    CHECK(r.path.vertices[0] == Vertex{1, 1});
    CHECK(r.path.vertices[1] == Vertex{2, 1});
}

TEST_CASE("path weight basics") {
    const auto lat = flat_lattice(5, 1);
    LatticePath p{{{0, 0}, {1, 0}, {2, 0}}};
    CHECK(path_weight(lat, p) == 3.0);

    WeightedLattice three = flat_lattice(3, 1);
    three.weights = {1.0, 2.0, 1.0};  // eta = (0, log 2, 0), gamma = 1
    CHECK(path_weight(three, p) == 4.0);
    CHECK(path_weight(three, LatticePath{{{1, 0}}}) == 2.0);

    CHECK_THROWS_AS(path_weight(lat, LatticePath{{{0, 0}, {2, 0}}}), StructuralError);
    CHECK_THROWS_AS(path_weight(lat, LatticePath{{{0, 0}, {1, 0}, {0, 0}}}),
                    StructuralError);
}

TEST_CASE("bfs oracle basics") {
    const auto lat = flat_lattice(5, 5);
    CHECK(bfs_oracle(lat, {2, 2}, {2, 2}) == 0);
    CHECK(bfs_oracle(lat, {2, 2}, {3, 2}) == 1);
    CHECK(bfs_oracle(lat, {0, 0}, {4, 4}) == 8);  // corners of a 5x5 box
}

TEST_CASE("gamma = 0 distance equals hops + 1") {
    const auto lat = flat_lattice(64, 64);
    rng::Xoshiro256pp gen(17);
    for (int t = 0; t < 100; ++t) {
        const Vertex v{static_cast<std::uint32_t>(gen.next() % 64),
                       static_cast<std::uint32_t>(gen.next() % 64)};
        Vertex w{static_cast<std::uint32_t>(gen.next() % 64),
                 static_cast<std::uint32_t>(gen.next() % 64)};
        if (v == w) w.i = (w.i + 1) % 64;
        const auto r = fpp_distance(lat, v, w);
        CHECK(r.distance == static_cast<double>(bfs_oracle(lat, v, w) + 1));
        CHECK(r.distance == path_weight(lat, r.path));
    }
}

TEST_CASE("exhaustive oracle trivia") {
    const auto lat3 = flat_lattice(3, 3);
    CHECK(exhaustive_oracle(lat3, {0, 0}, {2, 2}) == 5.0);  // 4 hops + 1
    CHECK(exhaustive_oracle(lat3, {1, 1}, {1, 1}) == 0.0);
    CHECK_THROWS_AS(exhaustive_oracle(flat_lattice(5, 4), {0, 0}, {1, 0}),
                    CapacityError);
}

TEST_CASE("search equals exhaustive enumeration on seeded small instances") {
    int cases = 0;
    for (double gamma : {0.0, 0.5, 1.0}) {
        for (int inst = 0; inst < 100; ++inst) {
            const std::uint32_t w = 3 + inst % 2, h = 3 + (inst / 2) % 2;
            const auto lat = random_lattice(
                w, h, gamma, rng::substream(2222, inst, static_cast<std::uint64_t>(gamma * 2)));
            rng::Xoshiro256pp pick(rng::substream(999, inst, 0));
            const Vertex v{static_cast<std::uint32_t>(pick.next() % w),
                           static_cast<std::uint32_t>(pick.next() % h)};
            const Vertex t{static_cast<std::uint32_t>(pick.next() % w),
                           static_cast<std::uint32_t>(pick.next() % h)};
            const auto r = fpp_distance(lat, v, t);
            const double oracle = exhaustive_oracle(lat, v, t);
            REQUIRE(r.distance == oracle);  // identical accumulation order: exact
            if (!(v == t)) CHECK(r.distance == path_weight(lat, r.path));
            ++cases;
        }
    }
    CHECK(cases == 300);
}

TEST_CASE("symmetry is exact") {
    for (int inst = 0; inst < 20; ++inst) {
        const auto lat = random_lattice(12, 9, 0.8, rng::substream(31, inst, 0));
        const Vertex v{1, 2}, w{10, 7};
        CHECK(fpp_distance(lat, v, w).distance == fpp_distance(lat, w, v).distance);
    }
}

TEST_CASE("any explicit path upper-bounds the distance") {
    const auto lat = random_lattice(8, 8, 1.0, 55);
    const Vertex v{0, 3}, w{7, 3};
    const auto r = fpp_distance(lat, v, w);
    LatticePath straight;
    for (std::uint32_t i = 0; i <= 7; ++i) straight.vertices.push_back({i, 3});
    CHECK(r.distance <= path_weight(lat, straight));

    LatticePath bent;
    for (std::uint32_t i = 0; i <= 7; ++i) bent.vertices.push_back({i, (i % 2) ? 4u : 3u});
    CHECK_THROWS_AS(path_weight(lat, bent), StructuralError);  // not 4-adjacent
}

TEST_CASE("region restriction and monotonicity") {
    const auto lat = random_lattice(16, 16, 0.7, 91);
    const Vertex v{1, 8}, w{14, 8};
    const auto full = fpp_distance(lat, v, w);

    const RegionPredicate tube = [](Vertex u) { return u.j >= 6 && u.j <= 10; };
    const auto restricted = fpp_distance(lat, v, w, tube);
    CHECK(restricted.distance >= full.distance);
    for (const auto& u : restricted.path.vertices) CHECK(tube(u));

    const RegionPredicate wall = [](Vertex u) { return u.i != 7; };
    CHECK_THROWS_AS(fpp_distance(lat, v, w, wall), UnreachableError);
    CHECK_THROWS_AS(fpp_distance(lat, v, w, [](Vertex u) { return u.i > 3; }),
                    DomainError);  // endpoint outside region
}

TEST_CASE("lattice from a field sample") {
    GridSpec g(8, 8, 1.0 / 32);
    const auto f = sample_eta(g, 0.25, 1.0, 4);
    const auto lat = WeightedLattice::from_field(f, 0.5);
    for (std::size_t k = 0; k < lat.weights.size(); ++k)
        CHECK(lat.weights[k] == std::exp(0.5 * f.values[k]));
    const auto scaled = WeightedLattice::from_field(f, 0.5, 0.6);
    CHECK(scaled.weights[10] == std::exp(0.6 * 0.5 * f.values[10]));
}
