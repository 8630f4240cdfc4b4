#include "gpr/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include "gpr/nn/losses.hpp"

namespace gpr::nn {

TrainConfig::TrainConfig(double lr_, double momentum_, double weight_decay_,
                         double lambda_struct_, double lambda_ce_,
                         std::size_t iters, std::uint64_t seed_)
    : lr(lr_), momentum(momentum_), weight_decay(weight_decay_),
      lambda_struct(lambda_struct_), lambda_ce(lambda_ce_), iterations(iters),
      seed(seed_) {
    if (lr < 0.0) throw std::invalid_argument("TrainConfig: lr must be non-negative");
    if (std::abs(lambda_struct + lambda_ce - 1.0) > 1e-12)
        throw std::invalid_argument("TrainConfig: loss weights must sum to 1");
}

void SgdOptimizer::step(ParamStore& params) const {
    for (std::size_t e = 0; e < params.entry_count(); ++e) {
        ParamStore::Entry& entry = params.entry(e);
        for (std::size_t i = 0; i < entry.value.data.size(); ++i) {
            double& v = entry.velocity.data[i];
            v = cfg_.momentum * v + entry.grad.data[i];
            entry.value.data[i] -= cfg_.lr * v;
            entry.value.data[i] -= cfg_.lr * cfg_.weight_decay * entry.value.data[i];
        }
    }
}

MigrationSample make_migration_sample(const StackedBpInput& input,
                                      const CrossSectionMask& target) {
    MigrationSample s;
    s.channels = MigrationNet::to_tensors(input);
    s.target = Tensor::zeros({1, target.rows, target.cols});
    for (std::size_t i = 0; i < target.data.size(); ++i)
        s.target.data[i] = target.data[i] ? 1.0 : 0.0;
    return s;
}

namespace {

void check_divergence(double loss, std::size_t iter) {
    if (!std::isfinite(loss))
        throw std::runtime_error("training diverged (non-finite loss) at iteration " +
                                 std::to_string(iter));
}

void check_forward_finite(const Tensor& out, std::size_t iter) {
    for (double v : out.data)
        if (!std::isfinite(v)) check_divergence(v, iter);
}

}  // namespace

TrainResult train_migration_net(MigrationNet& net,
                                const std::vector<MigrationSample>& samples,
                                const TrainConfig& cfg, const StopCallback& stop) {
    if (samples.empty())
        throw std::invalid_argument("train_migration_net: empty dataset");
    SgdOptimizer opt(cfg);
    TrainResult result;
    result.loss_curve.reserve(cfg.iterations);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const MigrationSample& sample = samples[it % samples.size()];
        net.params().zero_grads();
        Tape tape;
        const Tape::Id prob = net.build(tape, sample.channels);
        check_forward_finite(tape.value(prob), it);
        const Tape::Id ls = tape.structure_loss(prob, sample.target, cfg.structure_c);
        const Tape::Id lce = tape.cross_entropy_loss(prob, sample.target, 1.0, 1.0);
        const Tape::Id loss = tape.add_scaled(ls, lce, cfg.lambda_struct, cfg.lambda_ce);
        const double value = tape.value(loss).data[0];
        check_divergence(value, it);
        tape.backward(loss);
        opt.step(net.params());
        result.loss_curve.push_back(value);
        if (stop && stop(it, value)) break;
    }
    return result;
}

TrainResult train_gpr_net(GprNet& net, const PointCloud& input,
                          const PointCloud& target, const TrainConfig& cfg,
                          const StopCallback& stop) {
    if (input.empty() || target.empty())
        throw std::invalid_argument("train_gpr_net: empty clouds");
    const Tensor input_t = GprNet::to_tensor(input);
    const Tensor target_t = GprNet::to_tensor(target);
    SgdOptimizer opt(cfg);
    TrainResult result;
    result.loss_curve.reserve(cfg.iterations);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        net.params().zero_grads();
        Tape tape;
        const Tape::Id dense = net.build(tape, input_t);
        check_forward_finite(tape.value(dense), it);
        const Tape::Id loss = tape.chamfer_loss(dense, target_t);
        const double value = tape.value(loss).data[0];
        check_divergence(value, it);
        tape.backward(loss);
        opt.step(net.params());
        result.loss_curve.push_back(value);
        if (stop && stop(it, value)) break;
    }
    return result;
}

double max_grad_check_error(ParamStore& params,
                            const std::function<double(bool with_grad)>& eval,
                            std::size_t subset_size, double h,
                            std::uint64_t seed) {
    params.zero_grads();
    eval(true);

    // Snapshot analytic gradients, then probe a random parameter subset.
    struct Pick {
        std::size_t entry;
        std::size_t index;
        double analytic;
    };
    std::vector<Pick> picks;
    const std::size_t total = params.total_params();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dist(0, total - 1);
    const std::size_t want = std::min(subset_size, total);
    std::vector<bool> taken(total, false);
    while (picks.size() < want) {
        std::size_t flat = dist(rng);
        if (taken[flat]) continue;
        taken[flat] = true;
        std::size_t e = 0;
        std::size_t offset = flat;
        while (offset >= params.entry(e).value.numel()) {
            offset -= params.entry(e).value.numel();
            ++e;
        }
        picks.push_back({e, offset, params.entry(e).grad.data[offset]});
    }

    double max_rel = 0.0;
    for (const Pick& p : picks) {
        double& slot = params.entry(p.entry).value.data[p.index];
        const double original = slot;
        slot = original + h;
        const double f_plus = eval(false);
        slot = original - h;
        const double f_minus = eval(false);
        slot = original;
        const double fd = (f_plus - f_minus) / (2.0 * h);
        if (!std::isfinite(fd) || !std::isfinite(p.analytic))
            throw std::runtime_error("grad check: non-finite gradient");
        const double denom = std::max({std::abs(fd), std::abs(p.analytic), 1e-4});
        max_rel = std::max(max_rel, std::abs(fd - p.analytic) / denom);
    }
    return max_rel;
}

double grad_check_migration_net(MigrationNet& net, const MigrationSample& sample,
                                const TrainConfig& cfg, std::uint64_t seed) {
    // The probes replay the argmax/activity routing captured at the nominal
    // point so the difference quotient tracks the branch the backward pass
    // differentiates.
    auto trace = std::make_shared<Tape::RoutingTrace>();
    auto eval = [&, trace](bool with_grad) {
        Tape tape;
        if (with_grad) {
            *trace = {};
            tape.capture_routing(trace.get());
        } else {
            tape.replay_routing(trace.get());
        }
        const Tape::Id prob = net.build(tape, sample.channels);
        const Tape::Id ls = tape.structure_loss(prob, sample.target, cfg.structure_c);
        const Tape::Id lce = tape.cross_entropy_loss(prob, sample.target, 1.0, 1.0);
        const Tape::Id loss = tape.add_scaled(ls, lce, cfg.lambda_struct, cfg.lambda_ce);
        if (with_grad) tape.backward(loss);
        return tape.value(loss).data[0];
    };
    return max_grad_check_error(net.params(), eval, 64, 1e-4, seed);
}

double grad_check_gpr_net(GprNet& net, const PointCloud& input,
                          const PointCloud& target, std::uint64_t seed) {
    const Tensor input_t = GprNet::to_tensor(input);
    const Tensor target_t = GprNet::to_tensor(target);

    // Both the nearest-neighbor assignment and the pool/ReLU routing are
    // frozen at the evaluation point so the finite-difference oracle probes
    // the smooth branch the backward pass differentiates.
    Tape tape0;
    const Tape::Id dense0 = net.build(tape0, input_t);
    const auto assign =
        chamfer_assignments(tape0.value(dense0).data, target_t.data);

    auto trace = std::make_shared<Tape::RoutingTrace>();
    auto eval = [&, trace](bool with_grad) {
        Tape tape;
        if (with_grad) {
            *trace = {};
            tape.capture_routing(trace.get());
        } else {
            tape.replay_routing(trace.get());
        }
        const Tape::Id dense = net.build(tape, input_t);
        if (with_grad) {
            const Tape::Id loss = tape.chamfer_loss(dense, target_t);
            tape.backward(loss);
            return tape.value(loss).data[0];
        }
        return chamfer_fixed(tape.value(dense).data, target_t.data, assign.first,
                             assign.second);
    };
    return max_grad_check_error(net.params(), eval, 64, 1e-4, seed);
}

}  // namespace gpr::nn
