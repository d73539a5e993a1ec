#pragma once

#include "mid/geometry.hpp"

namespace mid::twonn {

/// Single-manifold intrinsic-dimension estimate with an exact interval.
struct IdEstimate {
    double d_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double ci_level = 0.95;
    std::size_t n_used = 0;
    /// Set when d_hat exceeds the nominal dimension supplied by the caller;
    /// the estimate is reported as-is, never clamped.
    bool above_nominal = false;
};

/// Pareto shape MLE d = n / sum(log mu_i) with the exact interval from
/// sum(log mu_i) ~ Gamma(n, d): bounds are quantiles of Gamma(n, rate S).
/// nominal_dim = 0 means "unknown" and leaves above_nominal false.
/// Throws EmptyInput (n < 2) and NonParetoSupport (any mu <= 1).
IdEstimate twonn_mle(const geometry::RatioVector& ratios, double ci_level = 0.95,
                     double nominal_dim = 0.0);

/// Removes the floor(fraction * n) largest ratios (stable: equal values drop
/// in reverse input order), preserving survivor order.
geometry::RatioVector twonn_discard_fraction(const geometry::RatioVector& ratios,
                                             double fraction);

}  // namespace mid::twonn
