#include "gpr/robot.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace gpr {

RobotGeometry::RobotGeometry(double r, double l1_m, double l2_m, double alpha)
    : wheel_radius(r), l1(l1_m), l2(l2_m), roller_angle(alpha) {
    if (r <= 0.0 || l1_m <= 0.0 || l2_m <= 0.0)
        throw std::invalid_argument("RobotGeometry: dimensions must be positive");
    const double t = std::tan(alpha);
    if (!std::isfinite(t) || t == 0.0)
        throw std::invalid_argument("RobotGeometry: tan(roller_angle) must be finite and nonzero");
}

WheelCommand::WheelCommand(double w1, double w2, double w3, double w4)
    : w{w1, w2, w3, w4} {
    for (double v : w)
        if (!std::isfinite(v))
            throw std::invalid_argument("WheelCommand: wheel speeds must be finite");
}

BodyVelocity body_velocity(const RobotGeometry& geom, const WheelCommand& cmd) {
    const double r4 = geom.wheel_radius / 4.0;
    const auto& w = cmd.w;
    BodyVelocity out;
    out.vx = r4 * (w[0] + w[1] + w[2] + w[3]);
    out.vy = r4 * (-w[0] + w[1] - w[2] + w[3]);
    out.omega = geom.wheel_radius /
                (4.0 * (geom.l2 * std::tan(geom.roller_angle) + geom.l1)) *
                (-w[0] + w[1] + w[2] - w[3]);
    return out;
}

Pose integrate_pose(const Pose& pose, double vx, double vy, double omega,
                    double dt) {
    if (dt <= 0.0) throw std::invalid_argument("integrate_pose: dt must be positive");
    const double theta = pose.heading + omega * dt;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Vec3 p = pose.position;
    p.x += vx * c * dt - vy * s * dt;
    p.y += vx * s * dt + vy * c * dt;
    return Pose(p, theta, pose.timestamp + dt);
}

SurveyPlan::SurveyPlan(double w, double l, double res, double v)
    : width(w), length(l), grid_resolution(res), speed(v) {
    if (w <= 0.0 || l <= 0.0) throw std::invalid_argument("SurveyPlan: area must be positive");
    if (res <= 0.0 || res > std::min(w, l))
        throw std::invalid_argument("SurveyPlan: grid_resolution must be in (0, min(width, length)]");
    if (v <= 0.0) throw std::invalid_argument("SurveyPlan: speed must be positive");
}

std::vector<Pose> plan_zigzag(const SurveyPlan& plan) {
    const std::size_t passes =
        static_cast<std::size_t>(std::floor(plan.width / plan.grid_resolution + 1e-9)) + 1;
    std::vector<Pose> waypoints;
    waypoints.reserve(2 * passes);
    double t = 0.0;
    for (std::size_t p = 0; p < passes; ++p) {
        const double offset = std::min(static_cast<double>(p) * plan.grid_resolution, plan.width);
        const bool forward = (p % 2 == 0);
        const double x0 = forward ? 0.0 : plan.length;
        const double x1 = forward ? plan.length : 0.0;
        if (p > 0) t += plan.grid_resolution / plan.speed;  // sideways step
        waypoints.emplace_back(Vec3{x0, offset, 0.0}, 0.0, t);
        t += plan.length / plan.speed;
        waypoints.emplace_back(Vec3{x1, offset, 0.0}, 0.0, t);
    }
    return waypoints;
}

std::vector<Pose> tag_gpr_with_pose(const std::vector<double>& gpr_timestamps,
                                    const std::vector<Pose>& pose_stream) {
    if (pose_stream.size() < 2)
        throw std::invalid_argument("tag_gpr_with_pose: need at least 2 poses");
    for (std::size_t i = 1; i < pose_stream.size(); ++i)
        if (pose_stream[i].timestamp <= pose_stream[i - 1].timestamp)
            throw std::invalid_argument("tag_gpr_with_pose: pose timestamps must be strictly increasing");

    std::vector<Pose> tags;
    tags.reserve(gpr_timestamps.size());
    for (std::size_t k = 0; k < gpr_timestamps.size(); ++k) {
        const double t = gpr_timestamps[k];
        if (t < pose_stream.front().timestamp || t > pose_stream.back().timestamp)
            throw std::out_of_range("tag_gpr_with_pose: GPR timestamp " +
                                    std::to_string(k) + " outside pose span");
        // last interval with t_lo <= t
        auto it = std::upper_bound(pose_stream.begin(), pose_stream.end(), t,
                                   [](double v, const Pose& p) { return v < p.timestamp; });
        std::size_t hi = static_cast<std::size_t>(it - pose_stream.begin());
        if (hi == 0) hi = 1;
        if (hi == pose_stream.size()) hi = pose_stream.size() - 1;
        const Pose& a = pose_stream[hi - 1];
        const Pose& b = pose_stream[hi];
        const double alpha = (t - a.timestamp) / (b.timestamp - a.timestamp);
        const Vec3 pos = lerp(a.position, b.position, alpha);
        const double yaw = a.heading + alpha * wrap_angle(b.heading - a.heading);
        tags.emplace_back(pos, yaw, t);
    }
    return tags;
}

double mean_rse(const std::vector<Pose>& truth,
                const std::vector<Pose>& estimate) {
    if (truth.size() != estimate.size() || truth.empty())
        throw std::invalid_argument("mean_rse: sequences must be non-empty and equally long");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        acc += (truth[i].position - estimate[i].position).squared_norm();
    return std::sqrt(acc / static_cast<double>(truth.size()));
}

SurveyResult simulate_survey(const SurveyPlan& plan, double pose_noise_std,
                             double sample_rate_hz, std::uint64_t seed) {
    if (pose_noise_std < 0.0)
        throw std::invalid_argument("simulate_survey: noise std must be non-negative");
    if (sample_rate_hz <= 0.0)
        throw std::invalid_argument("simulate_survey: sample rate must be positive");

    const std::vector<Pose> waypoints = plan_zigzag(plan);
    const double total_time = waypoints.back().timestamp;
    const double dt = 1.0 / sample_rate_hz;
    const std::size_t count = static_cast<std::size_t>(std::floor(total_time / dt)) + 1;

    SurveyResult out;
    out.true_poses.reserve(count);
    out.est_poses.reserve(count);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, pose_noise_std);

    std::size_t seg = 1;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = std::min(static_cast<double>(k) * dt, total_time);
        while (seg + 1 < waypoints.size() && waypoints[seg].timestamp < t) ++seg;
        const Pose& a = waypoints[seg - 1];
        const Pose& b = waypoints[seg];
        const double alpha = (t - a.timestamp) / (b.timestamp - a.timestamp);
        const Vec3 pos = lerp(a.position, b.position, alpha);
        out.true_poses.emplace_back(pos, 0.0, t);
        Vec3 est = pos;
        if (pose_noise_std > 0.0) {
            est.x += noise(rng);
            est.y += noise(rng);
        }
        out.est_poses.emplace_back(est, 0.0, t);
    }
    return out;
}

}  // namespace gpr
