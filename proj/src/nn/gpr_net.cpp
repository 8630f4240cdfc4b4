#include "gpr/nn/gpr_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gpr::nn {

GprNet::GprNet(const NetSpec& spec) : GprNet(spec, Config()) {}

GprNet::GprNet(const NetSpec& spec, const Config& config)
    : spec_(spec), config_(config),
      params_(Architecture::GprNet, spec.width_multiplier, spec.seed) {
    if (spec.architecture != Architecture::GprNet)
        throw std::invalid_argument("GprNet: wrong architecture tag");
    if (config.input_points == 0)
        throw std::invalid_argument("GprNet: input_points must be positive");

    constexpr std::size_t kFeatureWidths[3] = {256, 128, 64};
    std::size_t point_dim = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t j = kFeatureWidths[s];
        subnet_dims_[s] = {spec.scaled(j / 4), spec.scaled(j / 2), spec.scaled(j)};
        point_dim += subnet_dims_[s][2];
        std::size_t in = 3;
        for (std::size_t l = 0; l < 3; ++l) {
            const std::string p =
                "enc" + std::to_string(s) + ".fc" + std::to_string(l);
            params_.add_he(p + ".w", {in, subnet_dims_[s][l]}, in);
            params_.add_zeros(p + ".b", {subnet_dims_[s][l]});
            in = subnet_dims_[s][l];
        }
    }
    fused_dim_ = 2 * point_dim;  // per-point features plus pooled globals

    params_.add_he("fuse.w", {fused_dim_, fused_dim_}, fused_dim_);
    params_.add_zeros("fuse.b", {fused_dim_});

    seed_count_ = fused_dim_;
    const std::size_t s1 = seed_count_ / 2;
    const std::size_t s2 = seed_count_ - s1;
    params_.add_he("dec.fc.w", {fused_dim_, 3 * s1}, fused_dim_);
    params_.add_zeros("dec.fc.b", {3 * s1});
    params_.add_he("dec.mlp1.w", {fused_dim_, fused_dim_}, fused_dim_);
    params_.add_zeros("dec.mlp1.b", {fused_dim_});
    params_.add_he("dec.mlp2.w", {fused_dim_, 3 * s2}, fused_dim_);
    params_.add_zeros("dec.mlp2.b", {3 * s2});
}

Tape::Id GprNet::build(Tape& tape, const Tensor& input) {
    if (input.shape.size() != 2 || input.dim(1) != 3)
        throw std::invalid_argument("GprNet: input must be [C,3]");
    if (input.dim(0) != config_.input_points)
        throw std::invalid_argument("GprNet: wrong input cardinality (expected " +
                                    std::to_string(config_.input_points) + ", got " +
                                    std::to_string(input.dim(0)) + ")");
    const std::size_t rows = input.dim(0);

    auto pw = [&](const std::string& name) {
        ParamStore::Entry* e = params_.find(name);
        return tape.leaf(e->value, &e->grad);
    };

    const Tape::Id x = tape.leaf(input);
    std::vector<Tape::Id> point_feats, global_feats;
    for (std::size_t s = 0; s < 3; ++s) {
        Tape::Id v = x;
        for (std::size_t l = 0; l < 3; ++l) {
            const std::string p =
                "enc" + std::to_string(s) + ".fc" + std::to_string(l);
            v = tape.relu(tape.dense_rows(v, pw(p + ".w"), pw(p + ".b")));
        }
        point_feats.push_back(v);
        global_feats.push_back(tape.broadcast_rows(tape.maxpool_rows(v), rows));
    }

    std::vector<Tape::Id> parts = point_feats;
    parts.insert(parts.end(), global_feats.begin(), global_feats.end());
    Tape::Id fused = tape.concat_cols(parts);
    fused = tape.relu(tape.dense_rows(fused, pw("fuse.w"), pw("fuse.b")));

    const Tape::Id global = tape.maxpool_rows(fused);  // [1, fused_dim]

    const std::size_t s1 = seed_count_ / 2;
    const std::size_t s2 = seed_count_ - s1;
    const Tape::Id fc_seeds = tape.reshape(
        tape.dense_rows(global, pw("dec.fc.w"), pw("dec.fc.b")), {s1, 3});
    Tape::Id mlp = tape.relu(tape.dense_rows(global, pw("dec.mlp1.w"), pw("dec.mlp1.b")));
    const Tape::Id mlp_seeds =
        tape.reshape(tape.dense_rows(mlp, pw("dec.mlp2.w"), pw("dec.mlp2.b")), {s2, 3});

    const Tape::Id seeds = tape.concat_rows({fc_seeds, mlp_seeds});
    return tape.fold_grid(seeds, config_.fold_step);
}

Tensor GprNet::to_tensor(const PointCloud& cloud) {
    Tensor t = Tensor::zeros({cloud.size(), 3});
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        t.data[i * 3 + 0] = cloud.points[i].x;
        t.data[i * 3 + 1] = cloud.points[i].y;
        t.data[i * 3 + 2] = cloud.points[i].z;
    }
    return t;
}

PointCloud GprNet::to_cloud(const Tensor& t) {
    if (t.shape.size() != 2 || t.dim(1) != 3)
        throw std::invalid_argument("GprNet: tensor must be [*,3]");
    PointCloud out;
    out.points.reserve(t.dim(0));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        out.points.push_back(
            {t.data[i * 3 + 0], t.data[i * 3 + 1], t.data[i * 3 + 2]});
    return out;
}

PointCloud GprNet::forward(const PointCloud& sparse) {
    Tape tape;
    const Tape::Id out = build(tape, to_tensor(sparse));
    const Tensor& dense = tape.value(out);
    for (double v : dense.data)
        if (!std::isfinite(v))
            throw std::runtime_error("GprNet: non-finite activation");
    return to_cloud(dense);
}

}  // namespace gpr::nn
