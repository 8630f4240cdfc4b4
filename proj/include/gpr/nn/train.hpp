#ifndef GPR_NN_TRAIN_HPP
#define GPR_NN_TRAIN_HPP

#include <functional>
#include <utility>
#include <vector>

#include "gpr/nn/gpr_net.hpp"
#include "gpr/nn/migration_net.hpp"
#include "gpr/nn/params.hpp"

namespace gpr::nn {

struct TrainConfig {
    double lr = 5e-6;
    double momentum = 0.9;
    double weight_decay = 1e-8;
    double lambda_struct = 0.1;
    double lambda_ce = 0.9;
    double structure_c = 9e-4;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;

    TrainConfig() = default;
    TrainConfig(double lr_, double momentum_, double weight_decay_,
                double lambda_struct_, double lambda_ce_, std::size_t iters,
                std::uint64_t seed_);
};

/// Classic momentum SGD with decoupled weight decay.
class SgdOptimizer {
public:
    explicit SgdOptimizer(const TrainConfig& cfg) : cfg_(cfg) {}
    void step(ParamStore& params) const;

private:
    TrainConfig cfg_;
};

struct TrainResult {
    std::vector<double> loss_curve;  // one entry per iteration
};

/// Called after each iteration; returning true stops training early.
using StopCallback = std::function<bool(std::size_t iteration, double loss)>;

struct MigrationSample {
    std::array<Tensor, 3> channels;  // [1,H,W] each
    Tensor target;                   // [1,H,W] binary
};

MigrationSample make_migration_sample(const StackedBpInput& input,
                                      const CrossSectionMask& target);

/// SGD over the joint (structure + cross-entropy) loss, cycling through the
/// samples one per iteration. Deterministic; throws on divergence (NaN loss)
/// with the iteration index.
TrainResult train_migration_net(MigrationNet& net,
                                const std::vector<MigrationSample>& samples,
                                const TrainConfig& cfg,
                                const StopCallback& stop = {});

/// SGD over the Chamfer loss against a fixed target cloud.
TrainResult train_gpr_net(GprNet& net, const PointCloud& input,
                          const PointCloud& target, const TrainConfig& cfg,
                          const StopCallback& stop = {});

// --- gradient checking -------------------------------------------------

/**
 * @brief Compares analytic parameter gradients against central finite
 * differences (h on a random subset of parameters); returns the maximum
 * relative error.
 *
 * `with_grad(true)` must populate param grads and return the loss;
 * `with_grad(false)` must return the loss only, evaluated at the current
 * (possibly perturbed) parameters.
 */
double max_grad_check_error(ParamStore& params,
                            const std::function<double(bool with_grad)>& eval,
                            std::size_t subset_size = 64, double h = 1e-4,
                            std::uint64_t seed = 0);

/// Grad check of the joint loss through MigrationNet on one sample.
double grad_check_migration_net(MigrationNet& net, const MigrationSample& sample,
                                const TrainConfig& cfg, std::uint64_t seed = 0);

/// Grad check of the Chamfer loss through GprNet; the nearest-neighbor
/// assignment is held fixed at the evaluation point.
double grad_check_gpr_net(GprNet& net, const PointCloud& input,
                          const PointCloud& target, std::uint64_t seed = 0);

}  // namespace gpr::nn

#endif  // GPR_NN_TRAIN_HPP
