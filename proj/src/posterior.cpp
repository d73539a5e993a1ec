#include "mid/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace mid::posterior {

namespace {

double sorted_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double exact_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

/// Renumber clusters by decreasing size, ties by smallest member index.
Partition canonicalize(const std::vector<int>& labels, double score) {
    std::map<int, std::vector<int>> clusters;
    for (std::size_t i = 0; i < labels.size(); ++i)
        clusters[labels[i]].push_back(static_cast<int>(i));

    std::vector<const std::vector<int>*> ordered;
    for (const auto& [label, members] : clusters) ordered.push_back(&members);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const std::vector<int>* a, const std::vector<int>* b) {
                         if (a->size() != b->size()) return a->size() > b->size();
                         return a->front() < b->front();
                     });

    Partition out;
    out.labels.resize(labels.size());
    out.K = static_cast<int>(ordered.size());
    out.vi_score = score;
    for (int k = 0; k < out.K; ++k) {
        for (int i : *ordered[k]) out.labels[i] = k + 1;
    }
    return out;
}

}  // namespace

CoClusteringMatrix co_clustering(const hidalgo::McmcTraces& traces) {
    const int nsim = traces.nsim(), n = traces.n();
    if (nsim < 1) throw EmptyInput("co_clustering needs at least one iteration");
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
    for (int t = 0; t < nsim; ++t) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (traces.labels(t, i) == traces.labels(t, j)) {
                    ++counts(i, j);
                }
            }
        }
    }
    CoClusteringMatrix out;
    out.p.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.p(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double v = static_cast<double>(counts(i, j)) / static_cast<double>(nsim);
            out.p(i, j) = v;
            out.p(j, i) = v;
        }
    }
    return out;
}

double vi_objective(const CoClusteringMatrix& pcm, const std::vector<int>& labels) {
    const int n = pcm.n();
    if (static_cast<int>(labels.size()) != n)
        throw DimensionMismatch("candidate length does not match PCM size");

    std::map<int, double> cluster_size;
    for (int l : labels) cluster_size[l] += 1.0;

    Eigen::VectorXd row_sums = pcm.p.rowwise().sum();
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
        double in_cluster = 0.0;
        for (int j = 0; j < n; ++j) {
            if (labels[j] == labels[i]) in_cluster += pcm.p(i, j);
        }
        obj += std::log2(cluster_size[labels[i]]) + std::log2(row_sums(i)) -
               2.0 * std::log2(in_cluster);
    }
    return obj;
}

Partition vi_partition(const CoClusteringMatrix& pcm,
                       const std::vector<std::vector<int>>& candidates) {
    if (candidates.empty()) throw EmptyCandidates();

    auto n_clusters = [](const std::vector<int>& labels) {
        return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
    };

    std::size_t best = 0;
    double best_obj = vi_objective(pcm, candidates[0]);
    int best_k = n_clusters(candidates[0]);
    for (std::size_t c = 1; c < candidates.size(); ++c) {
        double obj = vi_objective(pcm, candidates[c]);
        int k = n_clusters(candidates[c]);
        if (obj < best_obj || (obj == best_obj && k < best_k)) {
            best = c;
            best_obj = obj;
            best_k = k;
        }
    }
    return canonicalize(candidates[best], best_obj);
}

Partition vi_partition_from_traces(const CoClusteringMatrix& pcm,
                                   const hidalgo::McmcTraces& traces) {
    std::vector<std::vector<int>> candidates;
    std::set<std::vector<int>> seen;
    for (int t = 0; t < traces.nsim(); ++t) {
        std::vector<int> row(traces.n());
        for (int i = 0; i < traces.n(); ++i) row[i] = traces.labels(t, i);
        if (seen.insert(row).second) candidates.push_back(std::move(row));
    }
    return vi_partition(pcm, candidates);
}

ObservationIdChains remap_observation_chains(const hidalgo::McmcTraces& traces) {
    const int nsim = traces.nsim(), n = traces.n(), L = traces.L();
    ObservationIdChains out;
    out.chains.resize(nsim, n);
    for (int t = 0; t < nsim; ++t) {
        for (int i = 0; i < n; ++i) {
            int label = traces.labels(t, i);
            if (label < 1 || label > L) throw LabelOutOfRange(label, L);
            out.chains(t, i) = traces.ids(t, label - 1);
        }
    }
    out.medians.resize(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> col(out.chains.col(i).data(),
                                out.chains.col(i).data() + nsim);
        out.medians[i] = exact_median(std::move(col));
    }
    return out;
}

std::vector<ClusterIdSummary> cluster_id_summary(const Partition& partition,
                                                 const ObservationIdChains& chains,
                                                 const hidalgo::McmcTraces& traces,
                                                 double ci_level) {
    const int n = static_cast<int>(partition.labels.size());
    const int nsim = static_cast<int>(chains.chains.rows());
    if (chains.chains.cols() != n || traces.n() != n)
        throw DimensionMismatch("partition, chains and traces disagree on n");

    std::vector<ClusterIdSummary> out;
    for (int k = 1; k <= partition.K; ++k) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i) {
            if (partition.labels[i] == k) members.push_back(i);
        }

        std::vector<double> pooled;
        pooled.reserve(members.size() * nsim);
        for (int i : members) {
            for (int t = 0; t < nsim; ++t) pooled.push_back(chains.chains(t, i));
        }

        // chain of the per-iteration majority component of this cluster
        std::vector<double> comp_chain(nsim);
        for (int t = 0; t < nsim; ++t) {
            std::vector<int> counts(traces.L(), 0);
            for (int i : members) ++counts[traces.labels(t, i) - 1];
            int majority =
                static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                 counts.begin());
            comp_chain[t] = traces.ids(t, majority);
        }

        ClusterIdSummary s;
        s.cluster = k;
        s.size = static_cast<int>(members.size());
        s.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) /
                 static_cast<double>(pooled.size());
        s.median = exact_median(pooled);
        s.ci_low = sorted_quantile(pooled, (1.0 - ci_level) / 2.0);
        s.ci_high = sorted_quantile(pooled, (1.0 + ci_level) / 2.0);
        s.component_mean = std::accumulate(comp_chain.begin(), comp_chain.end(), 0.0) /
                           static_cast<double>(nsim);
        s.component_median = exact_median(comp_chain);
        out.push_back(s);
    }
    return out;
}

double vi_distance(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("partitions differ in length");
    const double n = static_cast<double>(a.size());
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        pab[{a[i], b[i]}] += 1.0;
    }
    double h_a = 0.0, h_b = 0.0, mi = 0.0;
    for (const auto& [label, cnt] : pa) h_a -= (cnt / n) * std::log2(cnt / n);
    for (const auto& [label, cnt] : pb) h_b -= (cnt / n) * std::log2(cnt / n);
    for (const auto& [labels, cnt] : pab) {
        double joint = cnt / n;
        mi += joint * std::log2(joint / ((pa[labels.first] / n) * (pb[labels.second] / n)));
    }
    return h_a + h_b - 2.0 * mi;
}

}  // namespace mid::posterior
