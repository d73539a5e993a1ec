#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mid {

/// Seeded random stream with hand-rolled distributions.
///
/// The engine is std::mt19937_64, whose bit stream is fully specified by the
/// standard, and every distribution below is implemented here rather than via
/// std::*_distribution, so a given seed produces the same draws on every
/// platform. Each draw consumes a documented number of engine words:
///   uniform01 / uniform01_open : 1
///   normal                     : 2
///   gamma                      : variable (rejection), +1 uniform when shape < 1
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1p-53;
    }

    /// Uniform on (0, 1); never returns an exact endpoint.
    double uniform01_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    /// Uniform index in {0, ..., n-1}.
    std::size_t uniform_index(std::size_t n) {
        std::size_t i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Standard normal via Box-Muller (two uniforms per draw, no cache).
    double normal() {
        double u1 = uniform01_open();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Gamma(shape, rate) via Marsaglia-Tsang; shape < 1 boosted through
    /// Gamma(shape+1) and a power of an extra uniform.
    double gamma(double shape, double rate) {
        if (shape < 1.0) {
            double u = uniform01_open();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform01_open();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v / rate;
            }
        }
    }

    /// Pareto(scale 1, shape) via inverse CDF.
    double pareto(double shape) {
        return std::pow(uniform01_open(), -1.0 / shape);
    }

    std::vector<double> dirichlet(std::span<const double> alpha) {
        std::vector<double> g(alpha.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            g[i] = gamma(alpha[i], 1.0);
            sum += g[i];
        }
        for (double& v : g) v /= sum;
        return g;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derive a child seed from a parent seed and a stage tag (FNV-1a over
    /// the tag, then splitmix64). Used to give each pipeline stage its own
    /// documented stream.
    static std::uint64_t derive(std::uint64_t seed, std::string_view tag) {
        std::uint64_t h = 1469598103934665603ULL;
        for (char ch : tag) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ULL;
        }
        return splitmix64(seed ^ h);
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mid
