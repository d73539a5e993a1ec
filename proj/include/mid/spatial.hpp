#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mid/errors.hpp"

namespace mid::spatial {

/// Non-negative weights with a zero diagonal; every row must have at least
/// one positive entry. Row symmetry is not required (directed k-NN weights
/// are used as-is).
struct SpatialWeights {
    Eigen::MatrixXd w;
    std::vector<std::string> ids;   // aligned to rows; may be empty

    int n() const { return static_cast<int>(w.rows()); }
    double w_sum() const { return w.sum(); }
    void validate() const;
};

struct MoranResult {
    double I = 0.0;
    double p_value = 1.0;
    int n_perm = 0;
};

/// I = (N/W) * sum_ij w_ij (x_i - xbar)(x_j - xbar) / sum_i (x_i - xbar)^2.
/// Throws ZeroVariance when all values are equal.
double morans_i(std::span<const double> values, const SpatialWeights& weights);

/// One-sided permutation test for positive autocorrelation:
/// p = (1 + #{I* >= I_obs}) / (1 + n_perm), seeded and deterministic.
MoranResult moran_permutation_test(std::span<const double> values,
                                   const SpatialWeights& weights, int n_perm,
                                   std::uint64_t seed);

/// Binary directed k-NN weights from (lat, lon) degree coordinates using
/// haversine great-circle distance; ties broken by lower row index. Every
/// row is non-empty by construction.
SpatialWeights build_knn_weights(const std::vector<std::pair<double, double>>& centroids,
                                 int k, std::vector<std::string> ids = {});

/// Two-sample Kolmogorov-Smirnov: D = sup |F_a - F_b| (exact over ties),
/// p-value from the asymptotic Kolmogorov series with the effective-n
/// factor. Returns (statistic, p_value). Throws EmptySample.
std::pair<double, double> ks_two_sample(std::span<const double> a,
                                        std::span<const double> b);

double haversine_km(double lat1, double lon1, double lat2, double lon2);

}  // namespace mid::spatial
