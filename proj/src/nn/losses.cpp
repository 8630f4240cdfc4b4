#include "gpr/nn/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpr::nn {

double structure_loss(const std::vector<double>& pred,
                      const std::vector<double>& truth, double c) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("structure_loss: dimension mismatch");
    if (c <= 0.0) throw std::invalid_argument("structure_loss: C must be positive");
    const double n = static_cast<double>(pred.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        mx += pred[i];
        my += truth[i];
    }
    mx /= n;
    my /= n;
    double vxx = 0.0, vyy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double ax = pred[i] - mx;
        const double ay = truth[i] - my;
        vxx += ax * ax;
        vyy += ay * ay;
        cov += ax * ay;
    }
    vxx /= (n - 1.0);
    vyy /= (n - 1.0);
    cov /= (n - 1.0);
    return 1.0 - (cov + c) / (std::sqrt(vxx) * std::sqrt(vyy) + c);
}

double cross_entropy_loss(const std::vector<double>& pred,
                          const std::vector<double>& truth, double w0,
                          double w1) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("cross_entropy_loss: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred[i];
        if (!(p > 0.0 && p < 1.0))
            throw std::domain_error("cross_entropy_loss: predictions must lie in (0,1)");
        acc += w1 * truth[i] * std::log(p) + w0 * (1.0 - truth[i]) * std::log(1.0 - p);
    }
    return -acc / static_cast<double>(pred.size());
}

double joint_loss(const std::vector<double>& pred,
                  const std::vector<double>& truth, double lambda_struct,
                  double lambda_ce, double c, double w0, double w1) {
    if (std::abs(lambda_struct + lambda_ce - 1.0) > 1e-12)
        throw std::invalid_argument("joint_loss: loss weights must sum to 1");
    return lambda_struct * structure_loss(pred, truth, c) +
           lambda_ce * cross_entropy_loss(pred, truth, w0, w1);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
chamfer_assignments(const std::vector<double>& pred_xyz,
                    const std::vector<double>& truth_xyz) {
    if (pred_xyz.size() % 3 != 0 || truth_xyz.size() % 3 != 0 ||
        pred_xyz.empty() || truth_xyz.empty())
        throw std::invalid_argument("chamfer_assignments: clouds must be non-empty [*,3]");
    const std::size_t np = pred_xyz.size() / 3;
    const std::size_t nt = truth_xyz.size() / 3;
    auto d2 = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t d = 0; d < 3; ++d) {
            const double diff = pred_xyz[i * 3 + d] - truth_xyz[j * 3 + d];
            acc += diff * diff;
        }
        return acc;
    };
    std::vector<std::size_t> pt(np, 0), tp(nt, 0);
    for (std::size_t i = 0; i < np; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nt; ++j) {
            const double v = d2(i, j);
            if (v < best) {
                best = v;
                pt[i] = j;
            }
        }
    }
    for (std::size_t j = 0; j < nt; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < np; ++i) {
            const double v = d2(i, j);
            if (v < best) {
                best = v;
                tp[j] = i;
            }
        }
    }
    return {pt, tp};
}

double chamfer_fixed(const std::vector<double>& pred_xyz,
                     const std::vector<double>& truth_xyz,
                     const std::vector<std::size_t>& nearest_pred_to_truth,
                     const std::vector<std::size_t>& nearest_truth_to_pred) {
    const std::size_t np = pred_xyz.size() / 3;
    const std::size_t nt = truth_xyz.size() / 3;
    auto dist = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t d = 0; d < 3; ++d) {
            const double diff = pred_xyz[i * 3 + d] - truth_xyz[j * 3 + d];
            acc += diff * diff;
        }
        return std::sqrt(acc);
    };
    double sum_p = 0.0;
    for (std::size_t i = 0; i < np; ++i) sum_p += dist(i, nearest_pred_to_truth[i]);
    double sum_t = 0.0;
    for (std::size_t j = 0; j < nt; ++j) sum_t += dist(nearest_truth_to_pred[j], j);
    return sum_p / static_cast<double>(np) + sum_t / static_cast<double>(nt);
}

}  // namespace gpr::nn
