#ifndef GPR_NN_MIGRATION_NET_HPP
#define GPR_NN_MIGRATION_NET_HPP

#include <array>

#include "gpr/migration.hpp"
#include "gpr/nn/params.hpp"
#include "gpr/nn/tape.hpp"

namespace gpr::nn {

/**
 * @brief B-scan interpretation network.
 *
 * Three independent extractors (conv-conv-maxpool with kernels 8/4/2, one
 * per sparse-BP channel, each upsampled back to the input size) feed a
 * concatenated feature map into four spatial-preserving decoder groups
 * (1x1 conv, 3x3 conv, transposed conv) with skip connections from the
 * extractor outputs; a 1x1 head plus sigmoid yields per-pixel foreground
 * probability.
 */
class MigrationNet {
public:
    explicit MigrationNet(const NetSpec& spec);

    /// Builds the forward graph on a tape; channels are [1,H,W] tensors with
    /// H and W divisible by 8. Returns the probability node ([1,H,W]).
    Tape::Id build(Tape& tape, const std::array<Tensor, 3>& channels);

    /// Convenience forward pass returning probabilities as an image.
    MigrationImage forward(const StackedBpInput& input);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const NetSpec& spec() const { return spec_; }

    static std::array<Tensor, 3> to_tensors(const StackedBpInput& input);

private:
    NetSpec spec_;
    ParamStore params_;
    std::size_t c_;                    // extractor feature width
    std::array<std::size_t, 4> dec_;   // decoder output widths per group
};

/// Nearest-neighbor spatial downsampling of the stacked channels (the
/// optional input-scale knob; factor 1 is the identity).
StackedBpInput downsample_input(const StackedBpInput& input, std::size_t factor);

}  // namespace gpr::nn

#endif  // GPR_NN_MIGRATION_NET_HPP
