#include "mid/twonn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/gamma.hpp>

namespace mid::twonn {

IdEstimate twonn_mle(const geometry::RatioVector& ratios, double ci_level,
                     double nominal_dim) {
    const std::size_t n = ratios.size();
    if (n < 2) throw EmptyInput("twonn_mle needs at least 2 ratios");
    if (ci_level <= 0.0 || ci_level >= 1.0) throw Error("ci_level must be in (0,1)");

    double log_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mu = ratios.values[i];
        if (!(mu > 1.0)) throw NonParetoSupport(i, mu);
        log_sum += std::log(mu);
    }

    IdEstimate est;
    est.d_hat = static_cast<double>(n) / log_sum;
    est.ci_level = ci_level;
    est.n_used = n;

    // d * S ~ Gamma(n, 1), so the interval for d is the central quantile pair
    // of Gamma(shape n, rate S).
    boost::math::gamma_distribution<double> dist(static_cast<double>(n), 1.0 / log_sum);
    est.ci_low = boost::math::quantile(dist, (1.0 - ci_level) / 2.0);
    est.ci_high = boost::math::quantile(dist, (1.0 + ci_level) / 2.0);
    est.above_nominal = nominal_dim > 0.0 && est.d_hat > nominal_dim;
    return est;
}

geometry::RatioVector twonn_discard_fraction(const geometry::RatioVector& ratios,
                                             double fraction) {
    if (fraction < 0.0 || fraction >= 1.0) throw Error("fraction must be in [0,1)");
    const std::size_t n = ratios.size();
    std::size_t drop =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-12));
    if (drop == 0) return ratios;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // largest first; equal values drop in reverse input order
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ratios.values[a] > ratios.values[b];
    });
    std::vector<bool> dropped(n, false);
    for (std::size_t i = 0; i < drop; ++i) dropped[order[i]] = true;

    geometry::RatioVector out;
    out.values.reserve(n - drop);
    for (std::size_t i = 0; i < n; ++i) {
        if (!dropped[i]) out.values.push_back(ratios.values[i]);
    }
    return out;
}

}  // namespace mid::twonn
