#ifndef GPR_MIGRATION_HPP
#define GPR_MIGRATION_HPP

#include <array>
#include <vector>

#include "gpr/types.hpp"

namespace gpr {

/// 2D grid geometry of a migration plane (rows: depth, cols: along-scan).
struct GridSpec {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double dx = 0.0;
    double dz = 0.0;
    double origin_x = 0.0;
    double origin_z = 0.0;

    /// Grid matching the B-scan itself: M rows at dz = v*dt/2, one column
    /// per trace at the nominal spacing.
    static GridSpec for_bscan(const BScan& bscan, double v);

    MigrationImage make_image() const;
};

/// Scan-line frame: origin at the first pose, unit direction to the last.
struct ScanFrame {
    Vec3 origin;
    Vec3 direction;

    static ScanFrame from_poses(const std::vector<Pose>& poses);
    double lateral_of(const Vec3& p) const { return (p - origin).dot(direction); }
};

/**
 * @brief Splits a B-scan into q = ceil(N/window) windows of exactly
 * `window` traces with evenly spaced starts (overlap allowed); a B-scan
 * with N <= window yields one window, itself.
 */
std::vector<BScan> crop_bscan(const BScan& bscan, std::size_t window = 1024);

/// Start offsets used by crop_bscan, exposed for window bookkeeping.
std::vector<std::size_t> crop_offsets(std::size_t n, std::size_t window);

/// Evenly spaced trace subset, first and last always included.
std::vector<std::size_t> sparse_sample_indices(std::size_t n, std::size_t n_hat);
BScan sparse_sample(const BScan& bscan, std::size_t n_hat);

/**
 * @brief Back projection of one trace: each sample deposits |a_j| onto the
 * grid cells within half a cell of the circle of radius v*t_j/2 centered at
 * the trace position on the surface. Accumulation is additive.
 */
void back_project_trace(const AScan& trace, const Pose& pose, double v,
                        const ScanFrame& frame, MigrationImage& target);

/// Full-resolution BP: every trace back-projected, fixed trace-index order.
MigrationImage back_project_all(const BScan& bscan, double v,
                                const GridSpec& grid);

/**
 * @brief Sparse-stacked multi-resolution BP input: one max-normalized
 * channel per sampling resolution {256, 128, 64} (clamped to the window's
 * trace count).
 */
struct StackedBpInput {
    std::array<MigrationImage, 3> channels;
    std::size_t window_begin = 0;
    std::size_t window_end = 0;
};

StackedBpInput aggregate_bp(const BScan& window, double v, const GridSpec& grid);

/// Per-column envelope of the analytic signal along the depth axis.
MigrationImage hilbert_envelope(const MigrationImage& img);

/// Scales a non-negative image by its maximum into [0, 1] (zero image unchanged).
MigrationImage max_normalize(const MigrationImage& img);

/// Strictly-greater-than thresholding of a [0, 1] image.
CrossSectionMask binarize(const MigrationImage& img, double threshold = 0.45);

// --- 2D metrics ------------------------------------------------------------

double iou(const CrossSectionMask& pred, const CrossSectionMask& truth);
double pixel_accuracy(const CrossSectionMask& pred, const CrossSectionMask& truth);
double mse(const MigrationImage& x, const MigrationImage& y);
double rmse_image(const MigrationImage& x, const MigrationImage& y);

/// 10*log10(sum Y^2 / sum (X-Y)^2), X the noisy image, Y the reference.
double snr_db(const MigrationImage& x, const MigrationImage& y);

/// Whole-image SSIM with unbiased variance/covariance.
double ssim(const MigrationImage& x, const MigrationImage& y,
            double c1 = 1e-4, double c2 = 9e-4);

/// Mask lifted to a {0, 1}-valued image (for the continuous metrics).
MigrationImage mask_to_image(const CrossSectionMask& mask);

}  // namespace gpr

#endif  // GPR_MIGRATION_HPP
