#include "mid/synthkit.hpp"

#include "mid/rng.hpp"

namespace mid::synthkit {

namespace {

void check_spec(const ManifoldSpec& spec) {
    if (spec.d_true < 1 || spec.d_true > spec.embed_D)
        throw Error("manifold spec requires 1 <= d_true <= embed_D");
    if (spec.n < 3) throw Error("manifold spec requires n >= 3");
    if (!spec.offset.empty() &&
        static_cast<int>(spec.offset.size()) != spec.embed_D)
        throw DimensionMismatch("offset length must equal embed_D");
}

}  // namespace

geometry::DataMatrix sample_manifold(const ManifoldSpec& spec) {
    check_spec(spec);
    Rng rng(spec.seed);
    geometry::DataMatrix out;
    out.values = Eigen::MatrixXd::Zero(spec.n, spec.embed_D);
    // row-major draw order: all intrinsic coordinates of point i before i+1
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.d_true; ++j) {
            out.values(i, j) = spec.kind == ManifoldKind::UniformHypercube
                                   ? rng.uniform01()
                                   : rng.normal();
        }
    }
    if (!spec.offset.empty()) {
        for (int j = 0; j < spec.embed_D; ++j) {
            out.values.col(j).array() += spec.offset[j];
        }
    }
    out.row_ids.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) out.row_ids[i] = "s" + std::to_string(i);
    return out;
}

LabeledData mix_manifolds(std::span<const ManifoldSpec> specs, double separation) {
    if (specs.empty()) throw EmptyInput("mix_manifolds needs at least one spec");
    const int D = specs[0].embed_D;
    int total = 0;
    for (const auto& s : specs) {
        if (s.embed_D != D) throw DimensionMismatch("all specs must share embed_D");
        total += s.n;
    }

    LabeledData out;
    out.data.values.resize(total, D);
    out.data.row_ids.resize(total);
    out.labels.resize(total);
    int row = 0;
    for (std::size_t g = 0; g < specs.size(); ++g) {
        ManifoldSpec shifted = specs[g];
        if (shifted.offset.empty()) shifted.offset.assign(D, 0.0);
        shifted.offset[0] += separation * static_cast<double>(g);
        geometry::DataMatrix part = sample_manifold(shifted);
        for (int i = 0; i < shifted.n; ++i, ++row) {
            out.data.values.row(row) = part.values.row(i);
            out.data.row_ids[row] = "g" + std::to_string(g + 1) + "_" + std::to_string(i);
            out.labels[row] = static_cast<int>(g) + 1;
        }
    }
    return out;
}

}  // namespace mid::synthkit
