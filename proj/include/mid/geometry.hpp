#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mid/errors.hpp"

namespace mid::geometry {

/// Observations in rows, nominal dimensions in columns.
struct DataMatrix {
    Eigen::MatrixXd values;             // n x D
    std::vector<std::string> row_ids;   // size n, unique; generated when empty

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }

    /// Enforces n >= 3, D >= 1, finite values, unique row ids. Fills row_ids
    /// with "r0".."r{n-1}" when empty.
    void validate();
};

/// Per-point ordered nearest neighbours: indices and Euclidean distances,
/// both n x k, distances increasing along each row.
struct NeighborTable {
    int k = 0;
    Eigen::MatrixXi indices;
    Eigen::MatrixXd distances;
};

/// Second-to-first neighbour distance ratios, one per observation. Every
/// entry lies in (1, inf).
struct RatioVector {
    std::vector<double> values;
    std::size_t size() const { return values.size(); }
};

/// Directed q-nearest-neighbour adjacency. `in` lists the reverse edges
/// (j in in[i] iff i in out[j]) needed by the local-homogeneity factor.
struct NeighborGraph {
    int q = 0;
    std::vector<std::vector<int>> out;
    std::vector<std::vector<int>> in;
};

enum class NnMethod { Auto, BruteForce, VpTree };

/// Exact Euclidean k-NN for every row; ties broken by lower row index.
/// Auto uses a full pairwise scan up to 10^4 rows and a vantage-point tree
/// above that; both paths return identical tables.
/// Throws DuplicateRows on any zero pairwise distance, KTooLarge if k >= n.
NeighborTable nearest_neighbors(const DataMatrix& data, int k,
                                NnMethod method = NnMethod::Auto);

/// mu_i = r_{i,2} / r_{i,1}. Throws DegenerateRatio when the two distances
/// coincide exactly (mu = 1 is outside the open Pareto support).
RatioVector mu_ratios(const NeighborTable& table);

/// First q columns of the table as a directed adjacency. Throws QTooLarge.
NeighborGraph neighbor_graph(const NeighborTable& table, int q);

}  // namespace mid::geometry
