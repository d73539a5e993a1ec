#include "mid/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mid/rng.hpp"

namespace mid::spatial {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

double moran_numerator(std::span<const double> values, const Eigen::MatrixXd& w,
                       double mean) {
    const int n = static_cast<int>(values.size());
    double num = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (w(i, j) != 0.0) num += w(i, j) * (values[i] - mean) * (values[j] - mean);
        }
    }
    return num;
}

}  // namespace

void SpatialWeights::validate() const {
    if (w.rows() != w.cols()) throw Error("weights matrix must be square");
    if (w.rows() < 2) throw Error("weights need at least 2 rows");
    for (int i = 0; i < n(); ++i) {
        if (w(i, i) != 0.0) throw Error("weights diagonal must be zero");
        bool has_neighbor = false;
        for (int j = 0; j < n(); ++j) {
            if (w(i, j) < 0.0) throw Error("weights must be non-negative");
            if (w(i, j) > 0.0) has_neighbor = true;
        }
        if (!has_neighbor)
            throw Error("row " + std::to_string(i) + " has no neighbour");
    }
    if (!ids.empty() && static_cast<int>(ids.size()) != n())
        throw DimensionMismatch("ids length does not match weights size");
}

double morans_i(std::span<const double> values, const SpatialWeights& weights) {
    weights.validate();
    const int n = static_cast<int>(values.size());
    if (n != weights.n()) throw DimensionMismatch("values length does not match weights");
    for (double v : values) {
        if (!std::isfinite(v)) throw Error("values must be finite");
    }
    // a constant field is detected by value, not by the accumulated sum of
    // squares, which can be a rounding-dust non-zero
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) throw ZeroVariance();
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double denom = 0.0;
    for (double v : values) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw ZeroVariance();
    double num = moran_numerator(values, weights.w, mean);
    return (static_cast<double>(n) / weights.w_sum()) * num / denom;
}

MoranResult moran_permutation_test(std::span<const double> values,
                                   const SpatialWeights& weights, int n_perm,
                                   std::uint64_t seed) {
    if (n_perm < 1) throw Error("n_perm must be >= 1");
    const double observed = morans_i(values, weights);

    Rng rng(seed);
    std::vector<double> shuffled(values.begin(), values.end());
    int at_least = 0;
    for (int p = 0; p < n_perm; ++p) {
        rng.shuffle(shuffled);
        if (morans_i(shuffled, weights) >= observed) ++at_least;
    }

    MoranResult out;
    out.I = observed;
    out.n_perm = n_perm;
    out.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + n_perm);
    return out;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    auto rad = [](double deg) { return deg * M_PI / 180.0; };
    double dlat = rad(lat2 - lat1), dlon = rad(lon2 - lon1);
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(rad(lat1)) * std::cos(rad(lat2)) * std::sin(dlon / 2) *
                   std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

SpatialWeights build_knn_weights(const std::vector<std::pair<double, double>>& centroids,
                                 int k, std::vector<std::string> ids) {
    const int n = static_cast<int>(centroids.size());
    if (k < 1) throw Error("k must be >= 1");
    if (n <= k) throw KTooLarge(k, n);

    SpatialWeights out;
    out.w = Eigen::MatrixXd::Zero(n, n);
    out.ids = std::move(ids);
    std::vector<std::pair<double, int>> dists;
    for (int i = 0; i < n; ++i) {
        dists.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.emplace_back(haversine_km(centroids[i].first, centroids[i].second,
                                            centroids[j].first, centroids[j].second),
                               j);
        }
        // duplicate centroids are legal here; the index tie-break decides
        std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
        for (int j = 0; j < k; ++j) out.w(i, dists[j].second) = 1.0;
    }
    return out;
}

std::pair<double, double> ks_two_sample(std::span<const double> a,
                                        std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptySample();
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    double d_stat = 0.0;
    std::size_t ia = 0, ib = 0;
    // merged sweep over jump points; ties advance both ECDFs before comparing
    while (ia < sa.size() && ib < sb.size()) {
        double x = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] == x) ++ia;
        while (ib < sb.size() && sb[ib] == x) ++ib;
        d_stat = std::max(d_stat, std::abs(ia / na - ib / nb));
    }
    d_stat = std::max(d_stat, std::abs(1.0 - static_cast<double>(ib) / nb));
    d_stat = std::max(d_stat, std::abs(static_cast<double>(ia) / na - 1.0));

    double ne = na * nb / (na + nb);
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d_stat;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    p = std::clamp(p, 0.0, 1.0);
    return {d_stat, p};
}

}  // namespace mid::spatial
