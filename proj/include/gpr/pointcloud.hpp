#ifndef GPR_POINTCLOUD_HPP
#define GPR_POINTCLOUD_HPP

#include <vector>

#include "gpr/types.hpp"

namespace gpr {

/**
 * @brief Lifts cross-section masks into 3D: each foreground pixel maps to
 * the interpolated scan pose at its column with depth -(origin_z + j*dz).
 * Clouds from all masks are concatenated.
 *
 * Depth rows are already metric (dz = v*dt/2 inherited from the migration
 * grid), so no velocity is needed here.
 */
PointCloud register_masks(const std::vector<CrossSectionMask>& masks,
                          const std::vector<std::vector<Pose>>& poses_per_mask);

/**
 * @brief Iterative farthest point sampling: greedily grows a subset by
 * adding the point with maximal distance to the chosen set; ties break to
 * the lowest index.
 */
PointCloud ifps(const PointCloud& cloud, std::size_t k,
                std::size_t start_index = 0);

/// Two-term Chamfer distance: mean nearest-neighbor distance in both
/// directions (unsquared L2 norms).
double chamfer_distance(const PointCloud& a, const PointCloud& b);

struct EmdResult {
    double value = 0.0;
    bool exact = true;  // false when the auction approximation was used

    operator double() const { return value; }
};

/**
 * @brief Earth Mover's Distance: average pairwise distance under a
 * minimum-cost one-to-one assignment. Exact (Hungarian) up to 256 points,
 * auction approximation above. Unequal clouds are padded by repeating
 * nearest points of the smaller cloud.
 */
EmdResult emd(const PointCloud& pred, const PointCloud& truth);

/// Difference of the two clouds' mean distance to their own centroid.
double l1_centroid(const PointCloud& pred, const PointCloud& truth);

}  // namespace gpr

#endif  // GPR_POINTCLOUD_HPP
