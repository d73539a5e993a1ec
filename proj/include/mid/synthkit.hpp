#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mid/geometry.hpp"

namespace mid::synthkit {

enum class ManifoldKind { UniformHypercube, IsotropicGaussian };

/// A flat d_true-dimensional manifold embedded in embed_D ambient dimensions.
struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::UniformHypercube;
    int d_true = 1;
    int n = 3;
    int embed_D = 1;
    std::vector<double> offset;   // length embed_D, or empty for zeros
    std::uint64_t seed = 0;
};

/// n points whose first d_true coordinates are sampled per `kind` and whose
/// remaining coordinates are constant, all shifted by `offset`. Deterministic
/// under the spec seed.
geometry::DataMatrix sample_manifold(const ManifoldSpec& spec);

struct LabeledData {
    geometry::DataMatrix data;
    std::vector<int> labels;   // 1-based group per row
};

/// Concatenates samples from each spec, spacing group j by j * separation
/// along the first ambient axis. Throws DimensionMismatch if the ambient
/// dimensions differ.
LabeledData mix_manifolds(std::span<const ManifoldSpec> specs, double separation);

}  // namespace mid::synthkit
