#ifndef GPR_NN_GPR_NET_HPP
#define GPR_NN_GPR_NET_HPP

#include "gpr/nn/params.hpp"
#include "gpr/nn/tape.hpp"
#include "gpr/types.hpp"

namespace gpr::nn {

/**
 * @brief Sparse-to-dense pipe completion network.
 *
 * Three shared per-point MLP stacks (feature widths 256/128/64 scaled by
 * the width multiplier) are max-pooled into global features, re-broadcast
 * and concatenated with the per-point features, and fused by one more MLP.
 * The decoder concatenates a fully-connected branch and an MLP branch into
 * seed coordinates; each seed folds out a 3x3 local grid patch, emitting
 * 9 points per seed (896*9 = 8064 points at full width).
 */
class GprNet {
public:
    struct Config {
        std::size_t input_points = 1500;
        double fold_step = 0.05;  // local patch spacing in normalized units
    };

    explicit GprNet(const NetSpec& spec);
    GprNet(const NetSpec& spec, const Config& config);

    /// Builds the forward graph; input is [C,3]. Returns the dense [9S,3] node.
    Tape::Id build(Tape& tape, const Tensor& input);

    /// Forward pass; the cloud must contain exactly config.input_points points.
    PointCloud forward(const PointCloud& sparse);

    std::size_t output_points() const { return seed_count_ * 9; }
    std::size_t seed_count() const { return seed_count_; }

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const Config& config() const { return config_; }
    const NetSpec& spec() const { return spec_; }

    static Tensor to_tensor(const PointCloud& cloud);
    static PointCloud to_cloud(const Tensor& t);

private:
    NetSpec spec_;
    Config config_;
    ParamStore params_;
    std::array<std::array<std::size_t, 3>, 3> subnet_dims_;  // per subnet: layer widths
    std::size_t fused_dim_;   // concatenated per-point + global feature width
    std::size_t seed_count_;  // rows of the folded seed map
};

}  // namespace gpr::nn

#endif  // GPR_NN_GPR_NET_HPP
