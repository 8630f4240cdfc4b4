#ifndef GPR_FORWARD_HPP
#define GPR_FORWARD_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpr/types.hpp"

namespace gpr {

/**
 * @brief Antenna and acquisition parameters for the synthetic survey.
 *
 * Defaults follow the 2 GHz ground-coupled setup: 5 cm Tx/Rx offset,
 * 5 ns time window, 5 mm trace spacing.
 */
struct AntennaConfig {
    double center_frequency = 2e9;   // Hz
    double tx_rx_offset = 0.05;      // meters (collapsed to a midpoint)
    double time_window = 5e-9;       // seconds
    double trace_spacing = 0.005;    // meters
    std::size_t samples_per_trace = 256;

    AntennaConfig() = default;
    AntennaConfig(double fc, double offset, double window, double spacing,
                  std::size_t m);

    double dt() const { return time_window / static_cast<double>(samples_per_trace); }
};

enum class NoiseKind { Gaussian, SaltPepper, Speckle };

std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double level = 0.0;  // variance (gaussian/speckle) or density (salt & pepper)
    std::uint64_t seed = 0;

    NoiseSpec() = default;
    NoiseSpec(NoiseKind k, double lvl, std::uint64_t s);
};

/// Ray-model physics knobs: conductivity attenuation and the spreading floor.
struct ForwardModelParams {
    double attenuation_np_per_m = 2.0;
    double min_spreading_distance = 0.01;  // meters
};

/// EM wave velocity in the slab medium, c / sqrt(eps_r).
double wave_velocity(const SlabModel& slab);

/// Ricker wavelet (second derivative of a Gaussian), unit peak at tau = 0.
double ricker(double tau, double center_frequency);

/**
 * @brief Ray/hyperbola forward model: one trace per pose, each pipe
 * contributing a Ricker wavelet at its two-way travel time with geometric
 * spreading and exponential attenuation. Pipes beyond the time window
 * contribute nothing.
 */
BScan synthesize_bscan(const SlabModel& slab, const AntennaConfig& antenna,
                       const std::vector<Pose>& poses,
                       const ForwardModelParams& model = {});

/**
 * @brief Rasterizes the exact pipe cross-sections in the vertical plane
 * under a (straight) scan line: a pixel is foreground when its 3D point
 * lies inside some pipe. Perpendicular pipes give circles of radius r,
 * oblique ones ellipses with semi-major r/|cos(gamma)|.
 */
CrossSectionMask ground_truth_mask(const SlabModel& slab,
                                   const std::vector<Pose>& scan_line,
                                   const AntennaConfig& antenna, double dx,
                                   double dz);

/**
 * @brief Seeded uniform sampling of the pipe lateral surfaces, allocated
 * to pipes proportionally to surface area.
 */
PointCloud ground_truth_cloud(const SlabModel& slab, std::size_t count = 8096,
                              std::uint64_t seed = 0);

/// Seeded image corruption: additive Gaussian, salt & pepper, or speckle.
MigrationImage corrupt_image(const MigrationImage& img, const NoiseSpec& spec);

/// Same corruption harness applied to every trace sample of a B-scan.
BScan corrupt_bscan(const BScan& bscan, const NoiseSpec& spec);

/// Seeded per-coordinate Gaussian jitter for (normalized) point clouds.
PointCloud corrupt_cloud(const PointCloud& cloud, double stddev,
                         std::uint64_t seed = 0);

}  // namespace gpr

#endif  // GPR_FORWARD_HPP
