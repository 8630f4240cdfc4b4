#include "gpr/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gpr {

AntennaConfig::AntennaConfig(double fc, double offset, double window,
                             double spacing, std::size_t m)
    : center_frequency(fc), tx_rx_offset(offset), time_window(window),
      trace_spacing(spacing), samples_per_trace(m) {
    if (fc <= 0.0 || offset <= 0.0 || window <= 0.0 || spacing <= 0.0)
        throw std::invalid_argument("AntennaConfig: parameters must be positive");
    if (m < 16)
        throw std::invalid_argument("AntennaConfig: need at least 16 samples per trace");
}

std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::SaltPepper: return "salt_pepper";
        case NoiseKind::Speckle: return "speckle";
    }
    return "gaussian";
}

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseKind::Gaussian;
    if (s == "salt_pepper" || s == "salt&pepper") return NoiseKind::SaltPepper;
    if (s == "speckle") return NoiseKind::Speckle;
    throw std::invalid_argument("unknown noise kind: " + s);
}

NoiseSpec::NoiseSpec(NoiseKind k, double lvl, std::uint64_t s)
    : kind(k), level(lvl), seed(s) {
    if (lvl < 0.0 || lvl > 1.0)
        throw std::invalid_argument("NoiseSpec: level must be in [0, 1]");
}

double wave_velocity(const SlabModel& slab) {
    return kSpeedOfLight / std::sqrt(slab.rel_permittivity);
}

double ricker(double tau, double center_frequency) {
    const double u = kPi * center_frequency * tau;
    const double u2 = u * u;
    return (1.0 - 2.0 * u2) * std::exp(-u2);
}

BScan synthesize_bscan(const SlabModel& slab, const AntennaConfig& antenna,
                       const std::vector<Pose>& poses,
                       const ForwardModelParams& model) {
    if (poses.empty())
        throw std::invalid_argument("synthesize_bscan: no poses");
    const double v = wave_velocity(slab);
    if (antenna.time_window < 2.0 * slab.dims.z / v)
        throw std::invalid_argument(
            "synthesize_bscan: time window shorter than the slab two-way travel time");
    for (const Pose& p : poses)
        if (std::abs(p.position.z) > 1e-9)
            throw std::invalid_argument("synthesize_bscan: poses must lie on the slab surface (z = 0)");
    for (const PipeSpec& pipe : slab.pipes) {
        const double rim = pipe.radius *
            std::sqrt(std::max(0.0, 1.0 - pipe.direction.z * pipe.direction.z));
        if (std::max(pipe.axis_start().z, pipe.axis_end().z) + rim > 1e-12)
            throw std::invalid_argument("synthesize_bscan: pipe intersects the slab surface");
    }

    const std::size_t m = antenna.samples_per_trace;
    const double dt = antenna.dt();
    const double max_range = v * antenna.time_window / 2.0;

    std::vector<AScan> traces;
    traces.reserve(poses.size());
    for (const Pose& pose : poses) {
        std::vector<double> samples(m, 0.0);
        for (const PipeSpec& pipe : slab.pipes) {
            const double d = pipe.distance_to_surface(pose.position);
            if (d > max_range) continue;
            const double t_center = 2.0 * d / v;
            const double amp = std::exp(-model.attenuation_np_per_m * d) /
                               std::max(d, model.min_spreading_distance);
            for (std::size_t j = 0; j < m; ++j) {
                const double tau = static_cast<double>(j) * dt - t_center;
                samples[j] += amp * ricker(tau, antenna.center_frequency);
            }
        }
        traces.emplace_back(std::move(samples), dt, 0.0);
    }
    return BScan(std::move(traces), poses, antenna.trace_spacing);
}

CrossSectionMask ground_truth_mask(const SlabModel& slab,
                                   const std::vector<Pose>& scan_line,
                                   const AntennaConfig& antenna, double dx,
                                   double dz) {
    if (scan_line.size() < 2)
        throw std::invalid_argument("ground_truth_mask: need at least 2 poses");
    if (dx <= 0.0 || dz <= 0.0)
        throw std::invalid_argument("ground_truth_mask: cell size must be positive");

    const Vec3 p0 = scan_line.front().position;
    const Vec3 span = scan_line.back().position - p0;
    const double extent = span.norm();
    if (extent <= 0.0)
        throw std::invalid_argument("ground_truth_mask: scan line has zero extent");
    const Vec3 u = span / extent;
    for (const Pose& p : scan_line) {
        const Vec3 rel = p.position - p0;
        const double along = rel.dot(u);
        if ((rel - u * along).norm() >= dx)
            throw std::invalid_argument("ground_truth_mask: scan line is not straight");
    }

    const double v = wave_velocity(slab);
    const double depth_range = v * antenna.time_window / 2.0;
    const std::size_t rows =
        static_cast<std::size_t>(std::llround(depth_range / dz));
    const std::size_t cols =
        static_cast<std::size_t>(std::llround(extent / dx)) + 1;

    CrossSectionMask mask(std::max<std::size_t>(rows, 1), cols, dx, dz);
    for (std::size_t j = 0; j < mask.rows; ++j) {
        const double depth = static_cast<double>(j) * dz;
        for (std::size_t i = 0; i < mask.cols; ++i) {
            const double along = static_cast<double>(i) * dx;
            const Vec3 p{p0.x + u.x * along, p0.y + u.y * along, -depth};
            for (const PipeSpec& pipe : slab.pipes) {
                if (pipe.contains(p)) {
                    mask.at(j, i) = 1;
                    break;
                }
            }
        }
    }
    return mask;
}

PointCloud ground_truth_cloud(const SlabModel& slab, std::size_t count,
                              std::uint64_t seed) {
    if (slab.pipes.empty())
        throw std::invalid_argument("ground_truth_cloud: slab has no pipes");
    if (count == 0)
        throw std::invalid_argument("ground_truth_cloud: count must be positive");

    // Largest-remainder apportionment by lateral surface area.
    std::vector<double> areas;
    double total = 0.0;
    for (const PipeSpec& p : slab.pipes) {
        areas.push_back(2.0 * kPi * p.radius * p.length);
        total += areas.back();
    }
    std::vector<std::size_t> alloc(areas.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < areas.size(); ++k) {
        const double share = static_cast<double>(count) * areas[k] / total;
        alloc[k] = static_cast<std::size_t>(std::floor(share));
        assigned += alloc[k];
        remainders.push_back({share - std::floor(share), k});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; assigned < count; ++r, ++assigned)
        alloc[remainders[r % remainders.size()].second] += 1;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PointCloud cloud;
    cloud.points.reserve(count);
    for (std::size_t k = 0; k < slab.pipes.size(); ++k) {
        const PipeSpec& pipe = slab.pipes[k];
        // Orthonormal frame perpendicular to the axis.
        const Vec3 a = pipe.direction;
        Vec3 ref = std::abs(a.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        const Vec3 e1 = a.cross(ref).normalized();
        const Vec3 e2 = a.cross(e1);
        for (std::size_t n = 0; n < alloc[k]; ++n) {
            const double s = unit(rng) * pipe.length;
            const double phi = unit(rng) * 2.0 * kPi;
            cloud.points.push_back(pipe.anchor + a * s +
                                   (e1 * std::cos(phi) + e2 * std::sin(phi)) * pipe.radius);
        }
    }
    return cloud;
}

namespace {

template <typename Access>
void corrupt_samples(std::size_t n, Access&& value, const NoiseSpec& spec) {
    if (spec.level == 0.0) return;
    std::mt19937_64 rng(spec.seed);
    switch (spec.kind) {
        case NoiseKind::Gaussian: {
            std::normal_distribution<double> g(0.0, std::sqrt(spec.level));
            for (std::size_t i = 0; i < n; ++i) value(i) += g(rng);
            break;
        }
        case NoiseKind::SaltPepper: {
            double lo = value(0), hi = value(0);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, value(i));
                hi = std::max(hi, value(i));
            }
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double select = unit(rng);
                const double which = unit(rng);  // separate draw keeps damage nested across levels
                if (select < spec.level) value(i) = (which < 0.5) ? lo : hi;
            }
            break;
        }
        case NoiseKind::Speckle: {
            std::normal_distribution<double> g(0.0, std::sqrt(spec.level));
            for (std::size_t i = 0; i < n; ++i) value(i) *= 1.0 + g(rng);
            break;
        }
    }
}

}  // namespace

MigrationImage corrupt_image(const MigrationImage& img, const NoiseSpec& spec) {
    MigrationImage out = img;
    corrupt_samples(out.data.size(), [&](std::size_t i) -> double& { return out.data[i]; },
                    spec);
    return out;
}

BScan corrupt_bscan(const BScan& bscan, const NoiseSpec& spec) {
    BScan out = bscan;
    const std::size_t m = out.samples_per_trace();
    const std::size_t n = out.trace_count() * m;
    corrupt_samples(n,
                    [&](std::size_t i) -> double& {
                        return out.traces[i / m].samples[i % m];
                    },
                    spec);
    return out;
}

PointCloud corrupt_cloud(const PointCloud& cloud, double stddev,
                         std::uint64_t seed) {
    if (stddev < 0.0)
        throw std::invalid_argument("corrupt_cloud: stddev must be non-negative");
    if (stddev == 0.0) return cloud;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, stddev);
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points)
        out.points.push_back({p.x + g(rng), p.y + g(rng), p.z + g(rng)});
    return out;
}

}  // namespace gpr
