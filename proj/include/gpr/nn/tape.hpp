#ifndef GPR_NN_TAPE_HPP
#define GPR_NN_TAPE_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "gpr/nn/tensor.hpp"

namespace gpr::nn {

/**
 * @brief Reverse-mode differentiation tape over a fixed operator set.
 *
 * Nodes are created in topological order by the builder calls; backward()
 * walks them in reverse. The op set is exactly what the two networks need:
 * 1x1/3x3 convolution, transposed convolution, max-pooling with argmax
 * routing, nearest upsampling, concatenation, ReLU, sigmoid, shared
 * per-point dense layers, global max-pool over points, the folding grid,
 * and the three losses.
 *
 * Image tensors are [channels, height, width]; point tensors are [rows, features].
 */
class Tape {
public:
    using Id = std::size_t;

    /// Piecewise-linear branch decisions (maxpool argmaxes, ReLU activity)
    /// recorded during one forward build. A finite-difference probe replays
    /// them so it differentiates the same smooth branch the backward pass
    /// differentiates; see the chamfer loss for the same treatment of its
    /// nearest-neighbor assignment.
    struct RoutingTrace {
        std::vector<std::vector<std::size_t>> pools;
        std::vector<std::vector<char>> relu_masks;
    };

    /// Records branch decisions of subsequent ops into `trace`.
    void capture_routing(RoutingTrace* trace);
    /// Replays previously captured branch decisions (build order must match).
    void replay_routing(const RoutingTrace* trace);

    /// Leaf node. When grad_sink is given, backward() accumulates the leaf
    /// gradient into it (used to bind parameters).
    Id leaf(const Tensor& value, Tensor* grad_sink = nullptr);

    // --- image ops (x: [C,H,W]) ---------------------------------------
    Id conv2d(Id x, Id w, Id b);            // w: [Cout,Cin,k,k], k in {1,3}, stride 1, same pad
    Id conv2d_transpose(Id x, Id w, Id b);  // w: [Cin,Cout,3,3], stride 1, same pad
    Id maxpool2d(Id x, std::size_t k);      // kernel k, stride k
    Id upsample_nearest2d(Id x, std::size_t k);
    Id concat_channels(const std::vector<Id>& xs);

    // --- pointwise ------------------------------------------------------
    Id relu(Id x);
    Id sigmoid(Id x);  // clamped to [1e-12, 1 - 1e-12] against saturation

    // --- point-set ops (x: [R,F]) ----------------------------------------
    Id dense_rows(Id x, Id w, Id b);  // [R,Fin] x [Fin,Fout] + [Fout]
    Id maxpool_rows(Id x);            // [R,F] -> [1,F], argmax routed
    Id broadcast_rows(Id g, std::size_t rows);  // [1,F] -> [R,F]
    Id concat_cols(const std::vector<Id>& xs);
    Id concat_rows(const std::vector<Id>& xs);
    Id reshape(Id x, std::vector<std::size_t> shape);
    /// [S,3] -> [9S,3]: each seed emits a 3x3 grid patch offset in x/y.
    Id fold_grid(Id seeds, double step);

    // --- losses (scalar [1] outputs) --------------------------------------
    Id structure_loss(Id pred, const Tensor& truth, double c);
    Id cross_entropy_loss(Id pred, const Tensor& truth, double w0, double w1);
    Id chamfer_loss(Id pred, const Tensor& truth);  // pred/truth: [*,3]
    Id add_scaled(Id a, Id b, double ca, double cb);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    const Tensor& grad(Id id) const { return nodes_[id].grad; }

    /// Seeds d(root)/d(root) = 1 (root must be scalar) and propagates to all
    /// leaves, accumulating into bound gradient sinks.
    void backward(Id root);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void()> back;  // empty for leaves
        Tensor* sink = nullptr;
    };

    Id push(Tensor value, std::function<void()> back = {}, Tensor* sink = nullptr);

    std::vector<std::size_t> routed_pool(const Tensor& x,
                                         std::vector<std::size_t> fresh);
    std::vector<char> routed_mask(const Tensor& x, std::vector<char> fresh);

    std::vector<Node> nodes_;
    RoutingTrace* capture_ = nullptr;
    const RoutingTrace* replay_ = nullptr;
    std::size_t replay_pool_cursor_ = 0;
    std::size_t replay_mask_cursor_ = 0;
};

}  // namespace gpr::nn

#endif  // GPR_NN_TAPE_HPP
