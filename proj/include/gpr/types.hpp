#ifndef GPR_TYPES_HPP
#define GPR_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpr/geometry.hpp"

namespace gpr {

/**
 * @brief Single radar trace: reflected amplitude vs. two-way travel time.
 *
 * Sample j corresponds to travel time t0 + j*dt. All units SI (seconds).
 * Immutable after construction; construction validates the invariants.
 */
struct AScan {
    std::vector<double> samples;  // dimensionless amplitude, length M >= 2
    double dt = 0.0;              // seconds per sample
    double t0 = 0.0;              // time-zero offset, seconds

    AScan() = default;
    AScan(std::vector<double> s, double dt_s, double t0_s);

    std::size_t size() const { return samples.size(); }
    double time_of(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
};

/**
 * @brief Planar robot pose: position in meters, yaw in radians.
 *
 * The robot operates on flat terrain, so z is carried along but the pose
 * algebra is planar. Heading is stored wrapped to (-pi, pi].
 */
struct Pose {
    Vec3 position;
    double heading = 0.0;    // yaw, radians, in (-pi, pi]
    double timestamp = 0.0;  // seconds

    Pose() = default;
    Pose(const Vec3& pos, double yaw, double t);
};

/**
 * @brief Ensemble of A-scans along a scan line, one pose per trace.
 */
struct BScan {
    std::vector<AScan> traces;
    std::vector<Pose> poses;
    double spacing = 0.0;  // nominal inter-trace distance, meters

    BScan() = default;
    BScan(std::vector<AScan> tr, std::vector<Pose> po, double sp);

    std::size_t trace_count() const { return traces.size(); }
    std::size_t samples_per_trace() const { return traces.empty() ? 0 : traces.front().size(); }
    double dt() const { return traces.front().dt; }
    double t0() const { return traces.front().t0; }
};

enum class PipeMaterial { PEC, PVC, Copper };

std::string to_string(PipeMaterial m);
PipeMaterial pipe_material_from_string(const std::string& s);

/**
 * @brief Buried cylinder: a finite-length pipe given by axis anchor,
 * unit direction, radius and length.
 */
struct PipeSpec {
    Vec3 anchor;     // a point on the axis (one end), meters
    Vec3 direction;  // unit vector along the axis
    double radius = 0.0;
    double length = 0.0;
    PipeMaterial material = PipeMaterial::PEC;

    PipeSpec() = default;
    PipeSpec(const Vec3& a, const Vec3& dir, double r, double len,
             PipeMaterial m = PipeMaterial::PEC);

    Vec3 axis_start() const { return anchor; }
    Vec3 axis_end() const { return anchor + direction * length; }

    /// Distance from a point to the axis segment.
    double distance_to_axis(const Vec3& p) const;
    /// Distance from a point to the cylinder lateral surface, clamped >= 0.
    double distance_to_surface(const Vec3& p) const;
    /// True when the point lies inside the (finite) cylinder.
    bool contains(const Vec3& p) const;
};

/**
 * @brief Simulated concrete slab with buried pipes.
 *
 * Slab coordinates: x in [0, dims.x] (length), y in [0, dims.y] (width),
 * z in [-dims.z, 0] (thickness), with z = 0 the survey surface.
 */
struct SlabModel {
    Vec3 dims;                        // length x width x thickness, meters
    double rel_permittivity = 1.0;    // eps_r >= 1
    double conductivity = 0.0;        // S/m
    double rel_permeability = 1.0;
    std::vector<PipeSpec> pipes;

    SlabModel() = default;
    SlabModel(const Vec3& d, double eps_r, double sigma, double mu_r,
              std::vector<PipeSpec> p);
};

/**
 * @brief 2D energy map over a vertical slice: rows are depth, columns are
 * positions along the scan line.
 *
 * Pixel (row j, col i) covers depth origin_z + j*dz and lateral offset
 * origin_x + i*dx (both measured in meters, depth positive downward).
 * Back-projection output is non-negative by construction; the container
 * itself also carries corrupted (possibly signed) grayscale data for the
 * noise-robustness harness, so only finiteness is enforced here.
 */
struct MigrationImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double dx = 0.0;  // meters per column
    double dz = 0.0;  // meters per row
    double origin_x = 0.0;
    double origin_z = 0.0;
    std::vector<double> data;  // row-major, rows*cols

    MigrationImage() = default;
    MigrationImage(std::size_t r, std::size_t c, double dx_m, double dz_m,
                   double ox = 0.0, double oz = 0.0);

    double& at(std::size_t j, std::size_t i) { return data[j * cols + i]; }
    double at(std::size_t j, std::size_t i) const { return data[j * cols + i]; }

    void validate_finite() const;
};

/**
 * @brief Binary interpretation of one B-scan plane (1 = pipe cross-section).
 */
struct CrossSectionMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double dx = 0.0;
    double dz = 0.0;
    double origin_x = 0.0;
    double origin_z = 0.0;
    std::vector<std::uint8_t> data;  // row-major, values in {0, 1}

    CrossSectionMask() = default;
    CrossSectionMask(std::size_t r, std::size_t c, double dx_m, double dz_m,
                     double ox = 0.0, double oz = 0.0);

    std::uint8_t& at(std::size_t j, std::size_t i) { return data[j * cols + i]; }
    std::uint8_t at(std::size_t j, std::size_t i) const { return data[j * cols + i]; }

    std::size_t foreground_count() const;
};

struct PointCloud {
    std::vector<Vec3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts);

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct NormalizeResult {
    PointCloud cloud;
    Vec3 center;  // per-axis mean of the input
    Vec3 scale;   // per-axis sample standard deviation of the input
};

/**
 * @brief Shifts and scales a cloud to zero mean and unit sample variance
 * per axis (unbiased, n-1 divisor). Returns the inverse transform.
 *
 * Throws when an axis is degenerate (zero variance), naming the axis.
 */
NormalizeResult normalize_cloud(const PointCloud& cloud);

/// Inverse of normalize_cloud: p * scale + center, componentwise.
PointCloud denormalize_cloud(const PointCloud& cloud, const Vec3& center,
                             const Vec3& scale);

}  // namespace gpr

#endif  // GPR_TYPES_HPP
