#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gpr/robot.hpp"

using namespace gpr;

TEST_CASE("body_velocity wheel patterns") {
    RobotGeometry geom(0.05, 0.3, 0.4);

    SUBCASE("all wheels forward drives straight") {
        const auto v = body_velocity(geom, WheelCommand(1, 1, 1, 1));
        CHECK(v.vx == doctest::Approx(0.05).epsilon(1e-15));
        CHECK(v.vy == 0.0);
        CHECK(v.omega == 0.0);
    }
    SUBCASE("alternating pattern strafes sideways") {
        const auto v = body_velocity(geom, WheelCommand(-1, 1, -1, 1));
        CHECK(v.vx == 0.0);
        CHECK(v.vy == doctest::Approx(0.05).epsilon(1e-15));
        CHECK(v.omega == 0.0);
    }
    SUBCASE("spin pattern yields 0.05/0.7 rad/s") {
        const auto v = body_velocity(geom, WheelCommand(-1, 1, 1, -1));
        CHECK(v.vx == 0.0);
        CHECK(v.vy == 0.0);
        CHECK(v.omega == doctest::Approx(0.05 / 0.7).epsilon(1e-12));
    }
}

TEST_CASE("kinematic null space: equal wheel speeds give vy = omega = 0 exactly") {
    RobotGeometry geom(0.07, 0.25, 0.31);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 50; ++i) {
        const double w = u(rng);
        const auto v = body_velocity(geom, WheelCommand(w, w, w, w));
        CHECK(v.vy == 0.0);
        CHECK(v.omega == 0.0);
    }
}

TEST_CASE("integrate_pose examples") {
    SUBCASE("straight step") {
        const Pose p = integrate_pose(Pose({0, 0, 0}, 0, 0), 1.0, 0.0, 0.0, 0.1);
        CHECK(p.position.x == doctest::Approx(0.1));
        CHECK(std::abs(p.position.y) < 1e-15);
        CHECK(p.heading == 0.0);
    }
    SUBCASE("rotated frame") {
        const Pose p = integrate_pose(Pose({0, 0, 0}, kPi / 2, 0), 1.0, 0.0, 0.0, 0.1);
        CHECK(std::abs(p.position.x) < 1e-15);
        CHECK(p.position.y == doctest::Approx(0.1));
        CHECK(p.heading == doctest::Approx(kPi / 2));
    }
    SUBCASE("heading updates before the translation") {
        const Pose p = integrate_pose(Pose({0, 0, 0}, 0, 0), 1.0, 0.0, kPi / 2, 1.0);
        CHECK(p.heading == doctest::Approx(kPi / 2));
        CHECK(std::abs(p.position.x) < 1e-12);
        CHECK(p.position.y == doctest::Approx(1.0));
    }
}

TEST_CASE("integrate_pose matches the hand-substituted update for random tuples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        const double x = u(rng), y = u(rng), th = u(rng);
        const double vx = u(rng), vy = u(rng), om = u(rng);
        const double dt = std::abs(u(rng)) + 0.01;
        const Pose p = integrate_pose(Pose({x, y, 0}, th, 0), vx, vy, om, dt);
        const double th1 = th + om * dt;
        CHECK(std::abs(p.heading - wrap_angle(th1)) < 1e-12);
        CHECK(std::abs(p.position.x -
                       (x + vx * std::cos(th1) * dt - vy * std::sin(th1) * dt)) < 1e-12);
        CHECK(std::abs(p.position.y -
                       (y + vx * std::sin(th1) * dt + vy * std::cos(th1) * dt)) < 1e-12);
    }
}

TEST_CASE("pose integration with omega = 0 composes translations associatively") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const Pose start({u(rng), u(rng), 0}, u(rng), 0);
        const double vx = u(rng), vy = u(rng);
        const double dt1 = std::abs(u(rng)) + 0.01, dt2 = std::abs(u(rng)) + 0.01;
        const Pose two_steps =
            integrate_pose(integrate_pose(start, vx, vy, 0, dt1), vx, vy, 0, dt2);
        const Pose one_step = integrate_pose(start, vx, vy, 0, dt1 + dt2);
        CHECK(std::abs(two_steps.position.x - one_step.position.x) < 1e-12);
        CHECK(std::abs(two_steps.position.y - one_step.position.y) < 1e-12);
    }
}

TEST_CASE("plan_zigzag pass structure") {
    SUBCASE("1m x 1m at 0.25m resolution gives 5 passes") {
        const auto wps = plan_zigzag(SurveyPlan(1.0, 1.0, 0.25, 0.1));
        REQUIRE(wps.size() == 10);  // two waypoints per pass
        for (std::size_t p = 0; p < 5; ++p) {
            CHECK(wps[2 * p].position.y == doctest::Approx(0.25 * p));
            CHECK(wps[2 * p + 1].position.y == doctest::Approx(0.25 * p));
        }
    }
    SUBCASE("resolution equal to width gives the two boundary passes") {
        const auto wps = plan_zigzag(SurveyPlan(0.5, 1.0, 0.5, 0.1));
        REQUIRE(wps.size() == 4);
        CHECK(wps[0].position.y == doctest::Approx(0.0));
        CHECK(wps[3].position.y == doctest::Approx(0.5));
    }
    SUBCASE("consecutive pass offsets differ by exactly the resolution") {
        const auto wps = plan_zigzag(SurveyPlan(0.9, 0.6, 0.2, 0.1));
        for (std::size_t p = 2; p < wps.size(); p += 2)
            CHECK(wps[p].position.y - wps[p - 2].position.y ==
                  doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("waypoints stay inside the survey rectangle") {
        const auto wps = plan_zigzag(SurveyPlan(0.7, 1.3, 0.3, 0.1));
        for (const Pose& w : wps) {
            CHECK(w.position.x >= 0.0);
            CHECK(w.position.x <= 1.3);
            CHECK(w.position.y >= 0.0);
            CHECK(w.position.y <= 0.7);
        }
    }
}

TEST_CASE("tag_gpr_with_pose") {
    std::vector<Pose> stream{Pose({0, 0, 0}, 0, 0.0), Pose({1, 0, 0}, 0, 1.0)};

    SUBCASE("midpoint interpolation") {
        const auto tags = tag_gpr_with_pose({0.5}, stream);
        REQUIRE(tags.size() == 1);
        CHECK(tags[0].position.x == doctest::Approx(0.5));
        CHECK(tags[0].timestamp == 0.5);
    }
    SUBCASE("coincident timestamps pass through") {
        const auto tags = tag_gpr_with_pose({0.0, 1.0}, stream);
        CHECK(tags[0].position.x == doctest::Approx(0.0));
        CHECK(tags[1].position.x == doctest::Approx(1.0));
    }
    SUBCASE("100 Hz against 200 Hz over one second") {
        std::vector<Pose> fast;
        for (int i = 0; i <= 200; ++i)
            fast.emplace_back(Vec3{i * 0.005, 0, 0}, 0.0, i * 0.005);
        std::vector<double> gpr;
        for (int i = 0; i <= 100; ++i) gpr.push_back(i * 0.01);
        const auto tags = tag_gpr_with_pose(gpr, fast);
        REQUIRE(tags.size() == gpr.size());
        for (std::size_t i = 0; i < tags.size(); ++i)
            CHECK(tags[i].timestamp == gpr[i]);
    }
    SUBCASE("out-of-span timestamp names the index") {
        CHECK_THROWS_WITH_AS(tag_gpr_with_pose({0.5, 1.5}, stream),
                             doctest::Contains("timestamp 1"), std::out_of_range);
    }
    SUBCASE("heading interpolates along the shortest arc") {
        std::vector<Pose> turn{Pose({0, 0, 0}, 3.0, 0.0), Pose({1, 0, 0}, -3.0, 1.0)};
        const auto tags = tag_gpr_with_pose({0.5}, turn);
        // midway between +3 and -3 passes through +/-pi, not through zero
        CHECK(std::abs(tags[0].heading) > 3.0);
    }
}

TEST_CASE("mean_rse") {
    std::vector<Pose> a{Pose({0, 0, 0}, 0, 0), Pose({1, 1, 0}, 0, 1)};
    SUBCASE("identical trajectories") { CHECK(mean_rse(a, a) == 0.0); }
    SUBCASE("constant (3,4) offset gives 5") {
        std::vector<Pose> b;
        for (const Pose& p : a)
            b.emplace_back(p.position + Vec3{3, 4, 0}, p.heading, p.timestamp);
        CHECK(mean_rse(a, b) == doctest::Approx(5.0));
    }
    SUBCASE("hand sum for mixed offsets") {
        std::vector<Pose> b{Pose({1, 0, 0}, 0, 0), Pose({1, 2, 0}, 0, 1)};
        CHECK(mean_rse(a, b) == doctest::Approx(1.0));
    }
    SUBCASE("length mismatch throws") {
        std::vector<Pose> shorter{a[0]};
        CHECK_THROWS_AS(mean_rse(a, shorter), std::invalid_argument);
    }
}

TEST_CASE("simulate_survey") {
    const SurveyPlan plan(1.0, 1.0, 0.1, 0.1);

    SUBCASE("zero noise gives zero RSE") {
        const auto r = simulate_survey(plan, 0.0);
        CHECK(mean_rse(r.true_poses, r.est_poses) == 0.0);
    }
    SUBCASE("true poses stay inside the survey rectangle") {
        const auto r = simulate_survey(plan, 0.01, 100.0, 9);
        for (const Pose& p : r.true_poses) {
            CHECK(p.position.x >= -1e-12);
            CHECK(p.position.x <= 1.0 + 1e-12);
            CHECK(p.position.y >= -1e-12);
            CHECK(p.position.y <= 1.0 + 1e-12);
        }
    }
    SUBCASE("reproducible for a fixed seed") {
        const auto r1 = simulate_survey(plan, 0.01, 100.0, 42);
        const auto r2 = simulate_survey(plan, 0.01, 100.0, 42);
        REQUIRE(r1.est_poses.size() == r2.est_poses.size());
        for (std::size_t i = 0; i < r1.est_poses.size(); ++i)
            CHECK(r1.est_poses[i].position.x == r2.est_poses[i].position.x);
    }
    SUBCASE("0.9 cm noise lands in the 2D RSE budget over 1e4 samples") {
        const auto r = simulate_survey(plan, 0.009, 100.0, 1);
        REQUIRE(r.true_poses.size() >= 10000);
        const double rse = mean_rse(r.true_poses, r.est_poses);
        CHECK(rse >= 0.010);
        CHECK(rse <= 0.016);
    }
}
