#ifndef GPR_ROBOT_HPP
#define GPR_ROBOT_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "gpr/types.hpp"

namespace gpr {

/**
 * @brief Mecanum-wheel chassis geometry.
 *
 * l1 and l2 are the half-width/half-length lever arms of the wheel layout;
 * the roller angle defaults to 45 degrees.
 */
struct RobotGeometry {
    double wheel_radius = 0.05;       // R, meters
    double l1 = 0.3;                  // meters
    double l2 = 0.4;                  // meters
    double roller_angle = kPi / 4.0;  // alpha, radians

    RobotGeometry() = default;
    RobotGeometry(double r, double l1_m, double l2_m, double alpha = kPi / 4.0);
};

struct WheelCommand {
    std::array<double, 4> w{};  // rad/s, wheels 1..4

    WheelCommand() = default;
    WheelCommand(double w1, double w2, double w3, double w4);
};

struct BodyVelocity {
    double vx = 0.0;     // m/s, chassis frame
    double vy = 0.0;     // m/s, chassis frame
    double omega = 0.0;  // rad/s
};

/// Forward kinematics of the four-mecanum chassis.
BodyVelocity body_velocity(const RobotGeometry& geom, const WheelCommand& cmd);

/// One Euler step of the planar pose update. The heading is advanced first
/// and the new heading rotates the body-frame velocities.
Pose integrate_pose(const Pose& pose, double vx, double vy, double omega,
                    double dt);

struct SurveyPlan {
    double width = 1.0;            // meters, across passes
    double length = 1.0;           // meters, along passes
    double grid_resolution = 0.1;  // meters between passes
    double speed = 0.1;            // m/s

    SurveyPlan() = default;
    SurveyPlan(double w, double l, double res, double v);
};

/**
 * @brief Boustrophedon coverage waypoints: passes along the length axis,
 * stepped across the width axis by grid_resolution, alternating direction.
 *
 * The chassis translates without spinning, so every waypoint keeps heading 0.
 * Timestamps accumulate path length at the commanded speed.
 */
std::vector<Pose> plan_zigzag(const SurveyPlan& plan);

/**
 * @brief Interpolates one pose per GPR timestamp from a denser pose stream.
 *
 * Positions interpolate linearly, headings along the shortest arc. Throws
 * when a GPR timestamp falls outside the pose stream span, naming the index.
 */
std::vector<Pose> tag_gpr_with_pose(const std::vector<double>& gpr_timestamps,
                                    const std::vector<Pose>& pose_stream);

/// Root square error between two equally long position sequences:
/// sqrt(sum ||y_i - yhat_i||^2 / N).
double mean_rse(const std::vector<Pose>& truth,
                const std::vector<Pose>& estimate);

struct SurveyResult {
    std::vector<Pose> true_poses;
    std::vector<Pose> est_poses;
};

/**
 * @brief Samples the zig-zag survey at a fixed rate and corrupts the sampled
 * poses with seeded Gaussian position noise, standing in for the visual
 * positioning stack.
 */
SurveyResult simulate_survey(const SurveyPlan& plan, double pose_noise_std,
                             double sample_rate_hz = 100.0,
                             std::uint64_t seed = 0);

}  // namespace gpr

#endif  // GPR_ROBOT_HPP
