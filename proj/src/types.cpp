#include "gpr/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

AScan::AScan(std::vector<double> s, double dt_s, double t0_s)
    : samples(std::move(s)), dt(dt_s), t0(t0_s) {
    require(samples.size() >= 2, "AScan: need at least 2 samples");
    require(dt > 0.0, "AScan: dt must be positive");
    require(std::isfinite(t0), "AScan: t0 must be finite");
    for (double v : samples)
        require(std::isfinite(v), "AScan: samples must be finite");
}

Pose::Pose(const Vec3& pos, double yaw, double t)
    : position(pos), heading(wrap_angle(yaw)), timestamp(t) {
    require(pos.is_finite(), "Pose: position must be finite");
    require(std::isfinite(yaw), "Pose: heading must be finite");
    require(std::isfinite(t), "Pose: timestamp must be finite");
}

BScan::BScan(std::vector<AScan> tr, std::vector<Pose> po, double sp)
    : traces(std::move(tr)), poses(std::move(po)), spacing(sp) {
    require(!traces.empty(), "BScan: need at least one trace");
    if (traces.size() != poses.size())
        throw std::invalid_argument("BScan: trace count != pose count");
    require(spacing > 0.0, "BScan: spacing must be positive");
    const std::size_t m = traces.front().size();
    const double d = traces.front().dt;
    const double z = traces.front().t0;
    for (const AScan& a : traces) {
        require(a.size() == m, "BScan: traces must share sample count");
        require(a.dt == d, "BScan: traces must share dt");
        require(a.t0 == z, "BScan: traces must share t0");
    }
}

std::string to_string(PipeMaterial m) {
    switch (m) {
        case PipeMaterial::PEC: return "PEC";
        case PipeMaterial::PVC: return "PVC";
        case PipeMaterial::Copper: return "copper";
    }
    return "PEC";
}

PipeMaterial pipe_material_from_string(const std::string& s) {
    if (s == "PEC" || s == "pec") return PipeMaterial::PEC;
    if (s == "PVC" || s == "pvc") return PipeMaterial::PVC;
    if (s == "copper" || s == "Copper") return PipeMaterial::Copper;
    throw std::invalid_argument("unknown pipe material: " + s);
}

PipeSpec::PipeSpec(const Vec3& a, const Vec3& dir, double r, double len,
                   PipeMaterial m)
    : anchor(a), direction(dir.normalized()), radius(r), length(len), material(m) {
    require(a.is_finite(), "PipeSpec: anchor must be finite");
    require(r > 0.0, "PipeSpec: radius must be positive");
    require(len > 0.0, "PipeSpec: length must be positive");
}

double PipeSpec::distance_to_axis(const Vec3& p) const {
    const Vec3 rel = p - anchor;
    const double s = std::clamp(rel.dot(direction), 0.0, length);
    return (rel - direction * s).norm();
}

double PipeSpec::distance_to_surface(const Vec3& p) const {
    return std::max(distance_to_axis(p) - radius, 0.0);
}

bool PipeSpec::contains(const Vec3& p) const {
    const Vec3 rel = p - anchor;
    const double s = rel.dot(direction);
    if (s < 0.0 || s > length) return false;
    return (rel - direction * s).squared_norm() <= radius * radius;
}

namespace {

// Axis-aligned extent of a cylinder along dimension d: the axis segment
// endpoints padded by r*sqrt(1 - a_d^2), the exact radial reach of the rim.
bool pipe_inside_box(const PipeSpec& pipe, const Vec3& dims) {
    const Vec3 e0 = pipe.axis_start();
    const Vec3 e1 = pipe.axis_end();
    const double lo[3] = {0.0, 0.0, -dims.z};
    const double hi[3] = {dims.x, dims.y, 0.0};
    const double a[3] = {pipe.direction.x, pipe.direction.y, pipe.direction.z};
    const double p0[3] = {e0.x, e0.y, e0.z};
    const double p1[3] = {e1.x, e1.y, e1.z};
    constexpr double eps = 1e-9;
    for (int d = 0; d < 3; ++d) {
        const double reach =
            pipe.radius * std::sqrt(std::max(0.0, 1.0 - a[d] * a[d]));
        if (std::min(p0[d], p1[d]) - reach < lo[d] - eps) return false;
        if (std::max(p0[d], p1[d]) + reach > hi[d] + eps) return false;
    }
    return true;
}

}  // namespace

SlabModel::SlabModel(const Vec3& d, double eps_r, double sigma, double mu_r,
                     std::vector<PipeSpec> p)
    : dims(d), rel_permittivity(eps_r), conductivity(sigma),
      rel_permeability(mu_r), pipes(std::move(p)) {
    require(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
            "SlabModel: dims must be positive");
    require(eps_r >= 1.0, "SlabModel: rel_permittivity must be >= 1");
    require(sigma >= 0.0, "SlabModel: conductivity must be non-negative");
    require(mu_r > 0.0, "SlabModel: rel_permeability must be positive");
    for (const PipeSpec& pipe : pipes) {
        if (!pipe_inside_box(pipe, dims))
            throw std::invalid_argument("SlabModel: pipe extends outside slab dims");
    }
}

MigrationImage::MigrationImage(std::size_t r, std::size_t c, double dx_m,
                               double dz_m, double ox, double oz)
    : rows(r), cols(c), dx(dx_m), dz(dz_m), origin_x(ox), origin_z(oz),
      data(r * c, 0.0) {
    require(r > 0 && c > 0, "MigrationImage: empty grid");
    require(dx_m > 0.0 && dz_m > 0.0, "MigrationImage: cell size must be positive");
}

void MigrationImage::validate_finite() const {
    for (double v : data)
        if (!std::isfinite(v))
            throw std::runtime_error("MigrationImage: non-finite entry");
}

CrossSectionMask::CrossSectionMask(std::size_t r, std::size_t c, double dx_m,
                                   double dz_m, double ox, double oz)
    : rows(r), cols(c), dx(dx_m), dz(dz_m), origin_x(ox), origin_z(oz),
      data(r * c, 0) {
    require(r > 0 && c > 0, "CrossSectionMask: empty grid");
    require(dx_m > 0.0 && dz_m > 0.0, "CrossSectionMask: cell size must be positive");
}

std::size_t CrossSectionMask::foreground_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
}

PointCloud::PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {
    for (const Vec3& p : points)
        require(p.is_finite(), "PointCloud: points must be finite");
}

NormalizeResult normalize_cloud(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n < 2) throw std::invalid_argument("normalize_cloud: need >= 2 points");

    Vec3 mean;
    for (const Vec3& p : cloud.points) mean += p;
    mean = mean / static_cast<double>(n);

    Vec3 var;
    for (const Vec3& p : cloud.points) {
        const Vec3 d = p - mean;
        var.x += d.x * d.x;
        var.y += d.y * d.y;
        var.z += d.z * d.z;
    }
    var = var / static_cast<double>(n - 1);

    const char* axis_names[3] = {"x", "y", "z"};
    const double vars[3] = {var.x, var.y, var.z};
    for (int a = 0; a < 3; ++a) {
        if (vars[a] <= 0.0)
            throw std::invalid_argument(
                std::string("normalize_cloud: degenerate axis ") + axis_names[a]);
    }

    const Vec3 scale{std::sqrt(var.x), std::sqrt(var.y), std::sqrt(var.z)};
    NormalizeResult out;
    out.center = mean;
    out.scale = scale;
    out.cloud.points.reserve(n);
    for (const Vec3& p : cloud.points)
        out.cloud.points.push_back({(p.x - mean.x) / scale.x,
                                    (p.y - mean.y) / scale.y,
                                    (p.z - mean.z) / scale.z});
    return out;
}

PointCloud denormalize_cloud(const PointCloud& cloud, const Vec3& center,
                             const Vec3& scale) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points)
        out.points.push_back({p.x * scale.x + center.x, p.y * scale.y + center.y,
                              p.z * scale.z + center.z});
    return out;
}

}  // namespace gpr
