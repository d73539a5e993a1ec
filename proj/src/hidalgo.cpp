#include "mid/hidalgo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mid::hidalgo {

void HidalgoConfig::validate() const {
    if (L < 1) throw ConfigInvalid("L must be >= 1");
    if (!(alpha > 0.0)) throw ConfigInvalid("alpha must be positive");
    if (!(a_d > 0.0) || !(b_d > 0.0)) throw ConfigInvalid("a_d and b_d must be positive");
    // zeta == 0.5 is allowed as the neutral anchor where the neighbourhood
    // factor cancels and the plain mixture is recovered
    if (!(zeta >= 0.5) || !(zeta < 1.0)) throw ConfigInvalid("zeta must lie in [0.5, 1)");
    if (q < 1) throw ConfigInvalid("q must be >= 1");
    if (nsim < 1) throw ConfigInvalid("nsim must be >= 1");
    if (burnin < 0) throw ConfigInvalid("burnin must be >= 0");
    if (!(d_max > 0.0)) throw ConfigInvalid("d_max must be positive");
}

HidalgoSampler::HidalgoSampler(const geometry::DataMatrix& data,
                               const HidalgoConfig& config)
    : config_(config) {
    geometry::DataMatrix checked = data;
    checked.validate();
    if (config_.d_max == 0.0) config_.d_max = static_cast<double>(checked.dim());
    config_.validate();
    if (checked.n() <= config_.L)
        throw ConfigInvalid("need more observations than mixture components");
    auto table = geometry::nearest_neighbors(checked, std::max(2, config_.q));
    ratios_ = geometry::mu_ratios(table);
    graph_ = geometry::neighbor_graph(table, config_.q);
    log_mu_.resize(ratios_.size());
    for (std::size_t i = 0; i < ratios_.size(); ++i)
        log_mu_[i] = std::log(ratios_.values[i]);
}

HidalgoSampler::HidalgoSampler(geometry::RatioVector ratios,
                               geometry::NeighborGraph graph, HidalgoConfig config)
    : config_(config), ratios_(std::move(ratios)), graph_(std::move(graph)) {
    if (config_.d_max == 0.0) config_.d_max = std::numeric_limits<double>::infinity();
    config_.validate();
    log_mu_.resize(ratios_.size());
    for (std::size_t i = 0; i < ratios_.size(); ++i) {
        if (!(ratios_.values[i] > 1.0)) throw NonParetoSupport(i, ratios_.values[i]);
        log_mu_[i] = std::log(ratios_.values[i]);
    }
}

void HidalgoSampler::set_zeta(double zeta) {
    if (!(zeta >= 0.5) || !(zeta < 1.0)) throw ConfigInvalid("zeta must lie in [0.5, 1)");
    config_.zeta = zeta;
}

void HidalgoSampler::set_alpha(double alpha) {
    if (!(alpha > 0.0)) throw ConfigInvalid("alpha must be positive");
    config_.alpha = alpha;
}

std::vector<int> HidalgoSampler::canonical_order(const ChainState& state) const {
    std::vector<int> order(config_.L);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (state.d[a] != state.d[b]) return state.d[a] > state.d[b];
        if (state.pi[a] != state.pi[b]) return state.pi[a] > state.pi[b];
        return a < b;
    });
    return order;
}

double HidalgoSampler::truncated_gamma(double shape, double rate, Rng& rng) const {
    for (int attempt = 0; attempt < 100; ++attempt) {
        double x = rng.gamma(shape, rate);
        if (x > 0.0 && x <= config_.d_max) return x;
    }
    return config_.d_max;
}

ChainState HidalgoSampler::init_state(Rng& rng) const {
    const int L = config_.L;
    ChainState state;
    state.c.resize(n());
    for (int i = 0; i < n(); ++i)
        state.c[i] = static_cast<int>(rng.uniform_index(L)) + 1;
    state.d.resize(L);
    for (int l = 0; l < L; ++l)
        state.d[l] = truncated_gamma(config_.a_d, config_.b_d, rng);
    // uniform weights rather than a prior draw: a sparse Dirichlet sample is
    // nearly degenerate and would funnel every label into one component on
    // the first sweep before the likelihood has any say
    state.pi.assign(L, 1.0 / L);
    return state;
}

std::vector<double> HidalgoSampler::label_log_masses(const ChainState& state,
                                                     int i) const {
    const int L = config_.L;
    const double log_zeta = std::log(config_.zeta);
    const double log_one_minus = std::log1p(-config_.zeta);
    const int total_edges = config_.q + static_cast<int>(graph_.in[i].size());

    std::vector<int> agree(L, 0);
    for (int j : graph_.out[i]) ++agree[state.c[j] - 1];
    for (int j : graph_.in[i]) ++agree[state.c[j] - 1];

    std::vector<double> lm(L);
    for (int l = 0; l < L; ++l) {
        lm[l] = std::log(state.pi[l]) + std::log(state.d[l]) -
                (state.d[l] + 1.0) * log_mu_[i] + agree[l] * log_zeta +
                (total_edges - agree[l]) * log_one_minus;
    }
    return lm;
}

void HidalgoSampler::argmax_labels(ChainState& state) const {
    const std::vector<int> order = canonical_order(state);
    for (int i = 0; i < n(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        int chosen = order.front();
        for (int l : order) {
            // mixture density only; ties resolve to the first canonical slot
            const double lm = std::log(state.pi[l]) + std::log(state.d[l]) -
                              (state.d[l] + 1.0) * log_mu_[i];
            if (lm > best) {
                best = lm;
                chosen = l;
            }
        }
        state.c[i] = chosen + 1;
    }
}

double HidalgoSampler::log_likelihood(const ChainState& state) const {
    double ll = 0.0;
    for (int i = 0; i < n(); ++i) {
        const int l = state.c[i] - 1;
        ll += std::log(state.d[l]) - (state.d[l] + 1.0) * log_mu_[i];
    }
    return ll;
}

void HidalgoSampler::sample_c(ChainState& state, Rng& rng) const {
    const std::vector<int> order = canonical_order(state);
    for (int i = 0; i < n(); ++i) {
        std::vector<double> lm = label_log_masses(state, i);
        double max_lm = *std::max_element(lm.begin(), lm.end());
        std::vector<double> w(config_.L);
        for (int l = 0; l < config_.L; ++l) w[l] = std::exp(lm[l] - max_lm);
        // accumulate in canonical order so the walk is label-independent
        double total = 0.0;
        for (int l : order) total += w[l];
        double u = rng.uniform01() * total;
        double acc = 0.0;
        int chosen = order.back();
        for (int l : order) {
            acc += w[l];
            if (u < acc) {
                chosen = l;
                break;
            }
        }
        state.c[i] = chosen + 1;
    }
}

void HidalgoSampler::sample_d(ChainState& state, Rng& rng) const {
    const std::vector<int> order = canonical_order(state);
    std::vector<int> counts(config_.L, 0);
    std::vector<double> log_sums(config_.L, 0.0);
    for (int i = 0; i < n(); ++i) {
        ++counts[state.c[i] - 1];
        log_sums[state.c[i] - 1] += log_mu_[i];
    }
    for (int l : order) {
        state.d[l] = truncated_gamma(config_.a_d + counts[l],
                                     config_.b_d + log_sums[l], rng);
    }
}

void HidalgoSampler::sample_pi(ChainState& state, Rng& rng) const {
    const std::vector<int> order = canonical_order(state);
    std::vector<int> counts(config_.L, 0);
    for (int label : state.c) ++counts[label - 1];
    std::vector<double> g(config_.L);
    double total = 0.0;
    for (int l : order) {
        g[l] = rng.gamma(config_.alpha + counts[l], 1.0);
        total += g[l];
    }
    for (int l = 0; l < config_.L; ++l) state.pi[l] = g[l] / total;
}

void HidalgoSampler::sweep(ChainState& state, Rng& rng) const {
    sample_c(state, rng);
    sample_d(state, rng);
    sample_pi(state, rng);
}

McmcTraces hidalgo_fit(const geometry::DataMatrix& data, const HidalgoConfig& config) {
    HidalgoSampler sampler(data, config);
    const HidalgoConfig& cfg = sampler.config();
    const int n = sampler.n();

    Rng rng(cfg.seed);
    const double zeta_target = cfg.zeta;   // cfg aliases the sampler's config
    ChainState state = sampler.init_state(rng);
    if (cfg.burnin > 0) {
        // Annealed multi-restart burn-in. A random start under strong label
        // coupling tends to freeze into global consensus, and a gradual zeta
        // ramp does not help: any sustained intermediate coupling erodes the
        // minority component before like-labelled neighbourhoods exist. What
        // does work is letting the plain mixture (zeta = 1/2, where the
        // homogeneity factor cancels) segment the data first and then
        // quenching straight to the target coupling, which locks in whichever
        // local pluralities the mixture found. A single quench can still lock
        // a bad draw, so the burn-in budget is split across a few independent
        // hold-and-quench restarts and the end state with the highest data
        // likelihood wins.
        // The mixture needs a couple hundred sweeps to segment, so restarts
        // are only added once the budget affords ~500 sweeps apiece.
        const int restarts = std::clamp(cfg.burnin / 500, 1, 4);
        const int span = cfg.burnin / restarts;
        const int hold = span * 3 / 5;
        // the hold also flattens a sparse alpha: the rich-get-richer weight
        // dynamics would otherwise starve a minor component before the
        // likelihood has had a chance to claim it
        const double alpha_target = cfg.alpha;
        const double alpha_hold = std::max(alpha_target, 1.0);
        double best_lp = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r) {
            ChainState trial = r == 0 ? state : sampler.init_state(rng);
            sampler.set_zeta(0.5);
            sampler.set_alpha(alpha_hold);
            for (int t = 0; t < hold; ++t) sampler.sweep(trial, rng);
            // deterministic relabel at the lock-in moment: the quench freezes
            // whatever plurality each neighbourhood happens to hold, so start
            // it from the per-point modal assignment rather than one sampled
            // sweep's noise
            sampler.argmax_labels(trial);
            sampler.set_zeta(zeta_target);
            sampler.set_alpha(alpha_target);
            for (int t = hold; t < span; ++t) sampler.sweep(trial, rng);
            const double lp = sampler.log_likelihood(trial);
            if (lp > best_lp) {
                best_lp = lp;
                state = trial;
            }
        }
    }
    sampler.set_zeta(zeta_target);

    McmcTraces traces;
    traces.config_echo = cfg;
    traces.labels.resize(cfg.nsim, n);
    traces.weights.resize(cfg.nsim, cfg.L);
    traces.ids.resize(cfg.nsim, cfg.L);
    for (int t = 0; t < cfg.nsim; ++t) {
        sampler.sweep(state, rng);
        for (int i = 0; i < n; ++i) traces.labels(t, i) = state.c[i];
        for (int l = 0; l < cfg.L; ++l) {
            traces.weights(t, l) = state.pi[l];
            traces.ids(t, l) = state.d[l];
        }
    }
    return traces;
}

}  // namespace mid::hidalgo
