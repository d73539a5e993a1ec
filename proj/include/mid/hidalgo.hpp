#pragma once

#include <cstdint>

#include "mid/geometry.hpp"
#include "mid/rng.hpp"

namespace mid::hidalgo {

/// Sampler configuration. d_max = 0 is a sentinel replaced by the nominal
/// dimension of the data at fit time.
struct HidalgoConfig {
    int L = 6;                // max mixture components
    double alpha = 0.05;      // Dirichlet concentration per component
    double a_d = 1.0;         // Gamma prior shape on each component ID
    double b_d = 1.0;         // Gamma prior rate
    double zeta = 0.75;       // neighbour label-agreement probability
    int q = 3;                // neighbourhood size
    int nsim = 25000;         // retained iterations
    int burnin = 1000;        // discarded iterations
    std::uint64_t seed = 0;
    double d_max = 0.0;       // upper truncation for sampled IDs

    void validate() const;    // throws ConfigInvalid
};

/// One Gibbs state: component IDs d (length L), weights pi on the simplex,
/// and 1-based membership labels c (length n).
struct ChainState {
    std::vector<double> d;
    std::vector<double> pi;
    std::vector<int> c;
};

/// The three output matrices of a run, post burn-in.
struct McmcTraces {
    Eigen::MatrixXi labels;    // nsim x n, entries in {1..L}
    Eigen::MatrixXd weights;   // nsim x L, rows on the simplex
    Eigen::MatrixXd ids;       // nsim x L
    HidalgoConfig config_echo;

    int nsim() const { return static_cast<int>(labels.rows()); }
    int n() const { return static_cast<int>(labels.cols()); }
    int L() const { return static_cast<int>(ids.cols()); }
};

/// Gibbs sampler over (c, d, pi) under the mixture-of-Pareto likelihood with
/// the local-homogeneity factor.
///
/// Per-component randomness (the categorical inverse-CDF walk, the Gamma
/// draws for d, the Dirichlet gammas for pi) is consumed in a canonical
/// component order sorted by (d, pi) rather than by slot index, so relabeling
/// the components of the initial state yields the identically relabeled chain
/// from the same seed stream.
class HidalgoSampler {
public:
    HidalgoSampler(const geometry::DataMatrix& data, const HidalgoConfig& config);
    HidalgoSampler(geometry::RatioVector ratios, geometry::NeighborGraph graph,
                   HidalgoConfig config);

    ChainState init_state(Rng& rng) const;

    /// One full sweep: c (sequential in row order), then d, then pi.
    void sweep(ChainState& state, Rng& rng) const;

    /// c_i | rest ~ Cat over l with unnormalised mass
    ///   pi_l * d_l * mu_i^-(d_l+1) * zeta^m_i(l) * (1-zeta)^(q + r_i - m_i(l))
    /// where m_i(l) counts label agreements over directed edges touching i.
    void sample_c(ChainState& state, Rng& rng) const;

    /// d_l | rest ~ Gamma(a_d + n_l, b_d + sum_{c_i=l} log mu_i), truncated
    /// at d_max by rejection (cap 100, then the bound). Empty components draw
    /// from the prior.
    void sample_d(ChainState& state, Rng& rng) const;

    /// pi | rest ~ Dirichlet(alpha + n_1, ..., alpha + n_L).
    void sample_pi(ChainState& state, Rng& rng) const;

    /// Unnormalised log masses of the c_i conditional given the current
    /// state; exposed for direct checks of the categorical weights.
    std::vector<double> label_log_masses(const ChainState& state, int i) const;

    /// Deterministically assigns every observation to its modal component
    /// under the current mixture density pi_l * d_l * mu_i^-(d_l+1),
    /// ignoring the neighbourhood factor. Applied once at the burn-in
    /// hold-to-quench transition so the coupling locks onto the mixture's
    /// modal segmentation instead of one sampled sweep's noise.
    void argmax_labels(ChainState& state) const;

    /// Pareto log likelihood of the data under the state's labelling,
    /// sum_i log d_{c_i} - (d_{c_i} + 1) log mu_i. Scores burn-in restarts:
    /// the priors and the homogeneity factor are deliberately excluded, since
    /// under strong coupling they reward global consensus regardless of how
    /// well the segmentation explains the observed ratios.
    double log_likelihood(const ChainState& state) const;

    /// Overrides the agreement probability used by sample_c and
    /// log_posterior. hidalgo_fit anneals this during burn-in (hold at 1/2,
    /// where the coupling cancels and the plain mixture can segment the data,
    /// then quench to the configured value); retained sweeps always use the
    /// configured zeta.
    void set_zeta(double zeta);

    /// Overrides the Dirichlet concentration used by sample_pi. hidalgo_fit
    /// flattens a sparse alpha to 1 during the burn-in hold so the
    /// rich-get-richer weight dynamics cannot starve a component before the
    /// likelihood has segmented the data; retained sweeps always use the
    /// configured alpha.
    void set_alpha(double alpha);

    const HidalgoConfig& config() const { return config_; }
    const geometry::RatioVector& ratios() const { return ratios_; }
    int n() const { return static_cast<int>(ratios_.size()); }

private:
    std::vector<int> canonical_order(const ChainState& state) const;
    double truncated_gamma(double shape, double rate, Rng& rng) const;

    HidalgoConfig config_;
    geometry::RatioVector ratios_;
    geometry::NeighborGraph graph_;
    std::vector<double> log_mu_;
};

/// Full seeded run: burn-in discarded, nsim states retained.
/// Throws ConfigInvalid and propagates geometry errors.
McmcTraces hidalgo_fit(const geometry::DataMatrix& data, const HidalgoConfig& config);

}  // namespace mid::hidalgo
