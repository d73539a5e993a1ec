#include <doctest.h>

#include "mid/geometry.hpp"
#include "test_helpers.hpp"

using namespace mid;
using namespace mid::geometry;
using test_helpers::brute_force_knn;
using test_helpers::random_points;

namespace {

DataMatrix line_points() {
    DataMatrix data;
    data.values.resize(3, 1);
    data.values << 0.0, 1.0, 3.0;
    return data;
}

bool tables_equal(const NeighborTable& a, const NeighborTable& b) {
    return a.indices == b.indices && a.distances == b.distances;
}

}  // namespace

TEST_CASE("nearest_neighbors: hand geometry on 1-D {0,1,3}") {
    auto table = nearest_neighbors(line_points(), 2);
    CHECK(table.indices(1, 0) == 0);
    CHECK(table.distances(1, 0) == 1.0);
    CHECK(table.indices(1, 1) == 2);
    CHECK(table.distances(1, 1) == 2.0);
    CHECK(table.indices(0, 0) == 1);
    CHECK(table.indices(2, 0) == 1);
}

TEST_CASE("nearest_neighbors: duplicate rows raise") {
    DataMatrix data;
    data.values.resize(4, 2);
    data.values << 0, 0, 1, 1, 0, 0, 2, 2;
    CHECK_THROWS_AS(nearest_neighbors(data, 2), DuplicateRows);
}

TEST_CASE("nearest_neighbors: k >= n raises") {
    CHECK_THROWS_AS(nearest_neighbors(line_points(), 3), KTooLarge);
}

TEST_CASE("nearest_neighbors: 100 seeded 3-D points match brute-force oracle") {
    auto data = random_points(100, 3, 42);
    auto table = nearest_neighbors(data, 5);
    auto oracle = brute_force_knn(data.values, 5);
    CHECK(tables_equal(table, oracle));
}

TEST_CASE("nearest_neighbors: vp-tree path equals scan path") {
    auto data = random_points(500, 4, 7);
    auto scan = nearest_neighbors(data, 6, NnMethod::BruteForce);
    auto tree = nearest_neighbors(data, 6, NnMethod::VpTree);
    CHECK(tables_equal(scan, tree));
}

TEST_CASE("nearest_neighbors: tie-break prefers the lower row index") {
    DataMatrix data;
    data.values.resize(4, 1);
    data.values << 0.0, -1.0, 1.0, 5.0;   // rows 1 and 2 equidistant from row 0
    auto table = nearest_neighbors(data, 2, NnMethod::BruteForce);
    CHECK(table.indices(0, 0) == 1);
    CHECK(table.indices(0, 1) == 2);
    auto tree = nearest_neighbors(data, 2, NnMethod::VpTree);
    CHECK(tables_equal(table, tree));
}

TEST_CASE("nearest_neighbors: invariances") {
    auto data = random_points(80, 3, 11);
    auto base = nearest_neighbors(data, 4);

    SUBCASE("translation leaves the table unchanged up to fp noise in distances") {
        DataMatrix shifted = data;
        shifted.values.array() += 1000.0;
        auto table = nearest_neighbors(shifted, 4);
        CHECK(table.indices == base.indices);
    }

    SUBCASE("row permutation relabels the table") {
        // reverse the rows
        DataMatrix rev = data;
        const int n = static_cast<int>(data.values.rows());
        for (int i = 0; i < n; ++i) rev.values.row(i) = data.values.row(n - 1 - i);
        auto table = nearest_neighbors(rev, 4);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 4; ++j) {
                CHECK(table.indices(i, j) == n - 1 - base.indices(n - 1 - i, j));
                CHECK(table.distances(i, j) == base.distances(n - 1 - i, j));
            }
        }
    }

    SUBCASE("distances are non-decreasing along each row") {
        for (int i = 0; i < base.distances.rows(); ++i) {
            for (int j = 1; j < base.k; ++j) {
                CHECK(base.distances(i, j - 1) <= base.distances(i, j));
            }
        }
        CHECK((base.distances.col(0).array() > 0.0).all());
    }
}

TEST_CASE("mu_ratios: hand geometry") {
    auto table = nearest_neighbors(line_points(), 2);
    auto mu = mu_ratios(table);
    CHECK(mu.values[1] == 2.0);
    CHECK(mu.values[0] == 3.0);   // point 0: NN 1 at 1, then 3 at 3
}

TEST_CASE("mu_ratios: exact tie between r1 and r2 raises") {
    DataMatrix data;
    data.values.resize(3, 1);
    data.values << 0.0, 1.0, 2.0;   // middle point equidistant to both ends
    auto table = nearest_neighbors(data, 2);
    CHECK_THROWS_AS(mu_ratios(table), DegenerateRatio);
}

TEST_CASE("mu_ratios: 1000 seeded 2-D points match the brute-force oracle") {
    auto data = random_points(1000, 2, 99);
    auto mu = mu_ratios(nearest_neighbors(data, 2));
    auto oracle = brute_force_knn(data.values, 2);
    for (int i = 0; i < 1000; ++i) {
        CHECK(mu.values[i] == oracle.distances(i, 1) / oracle.distances(i, 0));
        CHECK(mu.values[i] > 1.0);
    }
}

TEST_CASE("mu_ratios: invariant under global scaling") {
    auto data = random_points(200, 3, 5);
    auto mu = mu_ratios(nearest_neighbors(data, 2));
    DataMatrix scaled = data;
    scaled.values *= 4.0;   // power of two: distances scale exactly
    auto mu_scaled = mu_ratios(nearest_neighbors(scaled, 2));
    for (std::size_t i = 0; i < mu.size(); ++i) CHECK(mu.values[i] == mu_scaled.values[i]);
}

TEST_CASE("neighbor_graph: q=1 maps each point to its first NN") {
    auto data = random_points(20, 2, 3);
    auto table = nearest_neighbors(data, 3);
    auto g = neighbor_graph(table, 1);
    for (int i = 0; i < 20; ++i) {
        REQUIRE(g.out[i].size() == 1);
        CHECK(g.out[i][0] == table.indices(i, 0));
    }
}

TEST_CASE("neighbor_graph: q=k equals the full table") {
    auto data = random_points(20, 2, 3);
    auto table = nearest_neighbors(data, 3);
    auto g = neighbor_graph(table, 3);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(g.out[i][j] == table.indices(i, j));
    }
}

TEST_CASE("neighbor_graph: q > k raises; in-lists mirror out-lists") {
    auto data = random_points(50, 3, 8);
    auto table = nearest_neighbors(data, 5);
    CHECK_THROWS_AS(neighbor_graph(table, 6), QTooLarge);

    auto g = neighbor_graph(table, 3);
    auto oracle = brute_force_knn(data.values, 3);
    std::size_t in_edges = 0;
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(g.out[i][j] == oracle.indices(i, j));
        in_edges += g.in[i].size();
        for (int j : g.in[i]) {
            CHECK(std::find(g.out[j].begin(), g.out[j].end(), i) != g.out[j].end());
        }
    }
    CHECK(in_edges == 50u * 3u);
}
