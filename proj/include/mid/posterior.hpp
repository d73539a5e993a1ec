#pragma once

#include "mid/hidalgo.hpp"

namespace mid::posterior {

/// Pairwise proportions of iterations in which two observations share a
/// component. Symmetric, unit diagonal, entries in [0, 1].
struct CoClusteringMatrix {
    Eigen::MatrixXd p;
    int n() const { return static_cast<int>(p.rows()); }
};

/// Hard clustering with contiguous 1-based labels, clusters numbered by
/// decreasing size (ties by smallest member index).
struct Partition {
    std::vector<int> labels;
    int K = 0;
    double vi_score = 0.0;
};

/// Observation-indexed ID chains: column i holds d_{c_i^(t)} across
/// iterations, immune to component label switching.
struct ObservationIdChains {
    Eigen::MatrixXd chains;        // nsim x n
    std::vector<double> medians;   // per observation
};

struct ClusterIdSummary {
    int cluster = 0;
    int size = 0;
    // pooled over the member observation chains
    double mean = 0.0, median = 0.0, ci_low = 0.0, ci_high = 0.0;
    // conditional on the per-iteration majority component of the cluster
    double component_mean = 0.0, component_median = 0.0;
};

CoClusteringMatrix co_clustering(const hidalgo::McmcTraces& traces);

/// Expected-VI surrogate of a candidate partition against the PCM:
///   sum_i [ log2 |C(i)| + log2 sum_j p_ij - 2 log2 sum_{j in C(i)} p_ij ].
double vi_objective(const CoClusteringMatrix& pcm, const std::vector<int>& labels);

/// Candidate minimising the objective; ties broken by fewer clusters, then
/// first occurrence. Throws EmptyCandidates.
Partition vi_partition(const CoClusteringMatrix& pcm,
                       const std::vector<std::vector<int>>& candidates);

/// vi_partition over the deduplicated sampled label vectors of the traces.
Partition vi_partition_from_traces(const CoClusteringMatrix& pcm,
                                   const hidalgo::McmcTraces& traces);

/// chains[t][i] = ids[t][labels[t][i]]. Throws LabelOutOfRange.
ObservationIdChains remap_observation_chains(const hidalgo::McmcTraces& traces);

/// Per-cluster posterior ID statistics: pooled over member chains plus the
/// majority-component conditional chain. ci_level is the central credible
/// mass (default 90%).
std::vector<ClusterIdSummary> cluster_id_summary(const Partition& partition,
                                                 const ObservationIdChains& chains,
                                                 const hidalgo::McmcTraces& traces,
                                                 double ci_level = 0.90);

/// Variation of information between two hard clusterings, in bits.
double vi_distance(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace mid::posterior
