#ifndef GPR_NN_LOSSES_HPP
#define GPR_NN_LOSSES_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace gpr::nn {

/**
 * Plain (non-differentiated) loss evaluations. The tape mirrors these; unit
 * tests cross-check the two paths against each other.
 */

/// 1 - (cov + C) / (sx*sy + C): zero when pred equals truth, larger than one
/// for anti-correlated pairs. Unbiased (n-1) statistics.
double structure_loss(const std::vector<double>& pred,
                      const std::vector<double>& truth, double c = 9e-4);

/// Weighted binary cross-entropy, -mean(w1*y*log p + w0*(1-y)*log(1-p)).
/// Throws when a prediction leaves the open interval (0,1).
double cross_entropy_loss(const std::vector<double>& pred,
                          const std::vector<double>& truth, double w0 = 1.0,
                          double w1 = 1.0);

/// lambda_struct * structure + lambda_ce * cross-entropy; the weights must
/// sum to one.
double joint_loss(const std::vector<double>& pred,
                  const std::vector<double>& truth, double lambda_struct = 0.1,
                  double lambda_ce = 0.9, double c = 9e-4, double w0 = 1.0,
                  double w1 = 1.0);

/// Chamfer with the nearest-neighbor assignment frozen to the given pairs;
/// used by the finite-difference gradient oracle.
double chamfer_fixed(const std::vector<double>& pred_xyz,
                     const std::vector<double>& truth_xyz,
                     const std::vector<std::size_t>& nearest_pred_to_truth,
                     const std::vector<std::size_t>& nearest_truth_to_pred);

/// Nearest-neighbor assignments in both directions between [*,3] clouds.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
chamfer_assignments(const std::vector<double>& pred_xyz,
                    const std::vector<double>& truth_xyz);

}  // namespace gpr::nn

#endif  // GPR_NN_LOSSES_HPP
