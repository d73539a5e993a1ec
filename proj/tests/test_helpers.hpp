#pragma once

#include <algorithm>
#include <vector>

#include "mid/geometry.hpp"
#include "mid/rng.hpp"

namespace test_helpers {

/// Independent O(n^2) all-pairs k-NN oracle, ties by lower row index.
inline mid::geometry::NeighborTable brute_force_knn(const Eigen::MatrixXd& x, int k) {
    const int n = static_cast<int>(x.rows());
    mid::geometry::NeighborTable table;
    table.k = k;
    table.indices.resize(n, k);
    table.distances.resize(n, k);
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> all;
        for (int j = 0; j < n; ++j) {
            if (j != i) all.emplace_back((x.row(i) - x.row(j)).norm(), j);
        }
        std::sort(all.begin(), all.end());
        for (int j = 0; j < k; ++j) {
            table.distances(i, j) = all[j].first;
            table.indices(i, j) = all[j].second;
        }
    }
    return table;
}

inline mid::geometry::DataMatrix random_points(int n, int dim, std::uint64_t seed) {
    mid::Rng rng(seed);
    mid::geometry::DataMatrix data;
    data.values.resize(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) data.values(i, j) = rng.uniform01();
    }
    return data;
}

}  // namespace test_helpers
