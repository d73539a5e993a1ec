#include "mid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace mid::geometry {

namespace {

constexpr Eigen::Index kBruteForceLimit = 10000;

int thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MANIFOLD_ID_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return static_cast<int>(hw);
}

/// Runs fn(row) for every row in [0, n); partitioning by contiguous blocks so
/// results do not depend on the thread count.
void parallel_rows(Eigen::Index n, const std::function<void(Eigen::Index)>& fn) {
    int nthreads = std::min<Eigen::Index>(thread_budget(), n);
    if (nthreads <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    Eigen::Index chunk = (n + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        Eigen::Index lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (Eigen::Index i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct Candidate {
    double dist;
    int index;
    // tie-break: lower row index wins
    bool operator<(const Candidate& o) const {
        return dist < o.dist || (dist == o.dist && index < o.index);
    }
};

void brute_force_row(const Eigen::MatrixXd& x, Eigen::Index i, int k,
                     std::vector<Candidate>& scratch,
                     Eigen::MatrixXi& indices, Eigen::MatrixXd& distances) {
    const Eigen::Index n = x.rows();
    scratch.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double d2 = (x.row(i) - x.row(j)).squaredNorm();
        scratch.push_back({d2, static_cast<int>(j)});
    }
    std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end());
    for (int j = 0; j < k; ++j) {
        if (scratch[j].dist == 0.0) {
            throw DuplicateRows(std::min<std::size_t>(i, scratch[j].index),
                                std::max<std::size_t>(i, scratch[j].index));
        }
        indices(i, j) = scratch[j].index;
        distances(i, j) = std::sqrt(scratch[j].dist);
    }
}

// Exact vantage-point tree over row indices. Vantage point is the first index
// of the node's range; the range is split at the median distance.
class VpTree {
public:
    VpTree(const Eigen::MatrixXd& x) : x_(x) {
        items_.resize(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) items_[i] = static_cast<int>(i);
        root_ = build(0, static_cast<int>(items_.size()));
    }

    /// k best neighbours of row `query` (self excluded), ties by lower index.
    void search(int query, int k, std::vector<Candidate>& out) const {
        out.clear();
        search_node(root_, query, k, out);
        std::sort(out.begin(), out.end());
    }

private:
    struct Node {
        int vantage = -1;
        double threshold = 0.0;
        int inside = -1, outside = -1;
    };

    double dist(int a, int b) const { return (x_.row(a) - x_.row(b)).norm(); }

    int build(int lo, int hi) {
        if (lo >= hi) return -1;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        nodes_[id].vantage = items_[lo];
        if (hi - lo > 1) {
            int v = items_[lo];
            int mid_pos = lo + 1 + (hi - lo - 1) / 2;
            std::nth_element(items_.begin() + lo + 1, items_.begin() + mid_pos,
                             items_.begin() + hi, [&](int a, int b) {
                                 double da = dist(v, a), db = dist(v, b);
                                 return da < db || (da == db && a < b);
                             });
            double thr = dist(v, items_[mid_pos]);
            int inside = build_range(lo + 1, mid_pos + 1);
            int outside = build_range(mid_pos + 1, hi);
            nodes_[id].threshold = thr;
            nodes_[id].inside = inside;
            nodes_[id].outside = outside;
        }
        return id;
    }

    int build_range(int lo, int hi) { return build(lo, hi); }

    void consider(int query, int cand, int k, std::vector<Candidate>& best) const {
        if (cand == query) return;
        Candidate c{dist(query, cand), cand};
        if (static_cast<int>(best.size()) < k) {
            best.push_back(c);
            std::push_heap(best.begin(), best.end());
        } else if (c < best.front()) {
            std::pop_heap(best.begin(), best.end());
            best.back() = c;
            std::push_heap(best.begin(), best.end());
        }
    }

    double tau(int k, const std::vector<Candidate>& best) const {
        return static_cast<int>(best.size()) < k
                   ? std::numeric_limits<double>::infinity()
                   : best.front().dist;
    }

    void search_node(int id, int query, int k, std::vector<Candidate>& best) const {
        if (id < 0) return;
        const Node& node = nodes_[id];
        double d = dist(query, node.vantage);
        consider(query, node.vantage, k, best);
        if (node.inside < 0 && node.outside < 0) return;
        // Non-strict bounds: a candidate at exactly tau may still win its
        // index tie-break, so equality must not prune.
        if (d < node.threshold) {
            if (d - tau(k, best) <= node.threshold)
                search_node(node.inside, query, k, best);
            if (d + tau(k, best) >= node.threshold)
                search_node(node.outside, query, k, best);
        } else {
            if (d + tau(k, best) >= node.threshold)
                search_node(node.outside, query, k, best);
            if (d - tau(k, best) <= node.threshold)
                search_node(node.inside, query, k, best);
        }
    }

    const Eigen::MatrixXd& x_;
    std::vector<int> items_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace

void DataMatrix::validate() {
    if (n() < 3) throw Error("DataMatrix requires at least 3 rows");
    if (dim() < 1) throw Error("DataMatrix requires at least 1 column");
    if (!values.allFinite()) throw Error("DataMatrix contains non-finite values");
    if (row_ids.empty()) {
        row_ids.resize(n());
        for (Eigen::Index i = 0; i < n(); ++i) row_ids[i] = "r" + std::to_string(i);
    }
    if (static_cast<Eigen::Index>(row_ids.size()) != n())
        throw Error("row_ids length does not match row count");
    std::set<std::string> seen(row_ids.begin(), row_ids.end());
    if (static_cast<Eigen::Index>(seen.size()) != n())
        throw Error("row_ids are not unique");
}

NeighborTable nearest_neighbors(const DataMatrix& data, int k, NnMethod method) {
    const Eigen::Index n = data.n();
    if (k < 1) throw Error("k must be >= 1");
    if (k >= n) throw KTooLarge(k, n);

    NeighborTable table;
    table.k = k;
    table.indices.resize(n, k);
    table.distances.resize(n, k);

    bool brute = method == NnMethod::BruteForce ||
                 (method == NnMethod::Auto && n <= kBruteForceLimit);

    std::exception_ptr err;
    std::mutex err_mutex;
    if (brute) {
        parallel_rows(n, [&](Eigen::Index i) {
            thread_local std::vector<Candidate> scratch;
            try {
                brute_force_row(data.values, i, k, scratch, table.indices, table.distances);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        });
    } else {
        VpTree tree(data.values);
        parallel_rows(n, [&](Eigen::Index i) {
            thread_local std::vector<Candidate> best;
            try {
                tree.search(static_cast<int>(i), k, best);
                for (int j = 0; j < k; ++j) {
                    if (best[j].dist == 0.0) {
                        throw DuplicateRows(std::min<std::size_t>(i, best[j].index),
                                            std::max<std::size_t>(i, best[j].index));
                    }
                    table.indices(i, j) = best[j].index;
                    table.distances(i, j) = best[j].dist;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        });
    }
    if (err) std::rethrow_exception(err);
    return table;
}

RatioVector mu_ratios(const NeighborTable& table) {
    if (table.k < 2) throw Error("mu_ratios needs a table with k >= 2");
    const Eigen::Index n = table.distances.rows();
    RatioVector out;
    out.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double r1 = table.distances(i, 0), r2 = table.distances(i, 1);
        if (r2 == r1) throw DegenerateRatio(i);
        out.values[i] = r2 / r1;
    }
    return out;
}

NeighborGraph neighbor_graph(const NeighborTable& table, int q) {
    if (q < 1) throw Error("q must be >= 1");
    if (q > table.k) throw QTooLarge(q, table.k);
    const Eigen::Index n = table.indices.rows();
    NeighborGraph g;
    g.q = q;
    g.out.resize(n);
    g.in.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g.out[i].resize(q);
        for (int j = 0; j < q; ++j) g.out[i][j] = table.indices(i, j);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j : g.out[i]) g.in[j].push_back(static_cast<int>(i));
    }
    return g;
}

}  // namespace mid::geometry
