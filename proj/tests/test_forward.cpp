#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gpr/forward.hpp"

using namespace gpr;

namespace {

std::vector<Pose> straight_scan(double x0, double x1, double y, double spacing) {
    std::vector<Pose> poses;
    const int n = static_cast<int>(std::llround((x1 - x0) / spacing)) + 1;
    for (int i = 0; i < n; ++i)
        poses.emplace_back(Vec3{x0 + i * spacing, y, 0.0}, 0.0, i * 0.01);
    return poses;
}

SlabModel reference_slab(std::vector<PipeSpec> pipes) {
    return SlabModel({0.35, 0.25, 0.25}, 7.0, 0.01, 1.0, std::move(pipes));
}

std::size_t peak_index(const AScan& trace) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < trace.size(); ++j)
        if (std::abs(trace.samples[j]) > std::abs(trace.samples[best])) best = j;
    return best;
}

}  // namespace

TEST_CASE("wave_velocity") {
    CHECK(wave_velocity(SlabModel({1, 1, 1}, 1.0, 0, 1, {})) == doctest::Approx(2.998e8));
    CHECK(wave_velocity(SlabModel({1, 1, 1}, 7.0, 0, 1, {})) ==
          doctest::Approx(2.998e8 / std::sqrt(7.0)));
    CHECK(wave_velocity(SlabModel({1, 1, 1}, 4.0, 0, 1, {})) == 2.998e8 / 2.0);
}

TEST_CASE("synthesize_bscan: slab with no pipes gives all-zero traces") {
    const auto bscan = synthesize_bscan(reference_slab({}), AntennaConfig(),
                                        straight_scan(0, 0.35, 0.125, 0.005));
    for (const AScan& t : bscan.traces)
        for (double v : t.samples) CHECK(v == 0.0);
}

TEST_CASE("synthesize_bscan: wavelet peak at the two-way travel time") {
    // pipe top at 0.10 m depth under the pose
    PipeSpec pipe({0.175, 0.0, -0.105}, {0, 1, 0}, 0.005, 0.25);
    const SlabModel slab = reference_slab({pipe});
    const AntennaConfig antenna;
    const std::vector<Pose> poses{Pose({0.175, 0.125, 0}, 0, 0),
                                  Pose({0.180, 0.125, 0}, 0, 1)};
    const auto bscan = synthesize_bscan(slab, antenna, poses);
    const double v = wave_velocity(slab);
    const double t_expected = 2.0 * 0.10 / v;  // ~1.77 ns
    CHECK(t_expected == doctest::Approx(1.765e-9).epsilon(1e-3));
    const double t_peak = peak_index(bscan.traces[0]) * antenna.dt();
    CHECK(std::abs(t_peak - t_expected) <= antenna.dt());
}

TEST_CASE("synthesize_bscan: lateral offset follows the slant range") {
    // near-zero radius so the surface distance is the axis distance
    PipeSpec pipe({0.175, 0.0, -0.1}, {0, 1, 0}, 1e-6, 0.25);
    const SlabModel slab = reference_slab({pipe});
    const AntennaConfig antenna;
    const std::vector<Pose> poses{Pose({0.075, 0.125, 0}, 0, 0),
                                  Pose({0.080, 0.125, 0}, 0, 1)};
    const auto bscan = synthesize_bscan(slab, antenna, poses);
    const double v = wave_velocity(slab);
    const double slant = std::hypot(0.10, 0.10);
    const double t_expected = 2.0 * slant / v;  // ~2.50 ns
    CHECK(t_expected == doctest::Approx(2.496e-9).epsilon(1e-3));
    const double t_peak = peak_index(bscan.traces[0]) * antenna.dt();
    CHECK(std::abs(t_peak - t_expected) <= antenna.dt());
}

TEST_CASE("synthesize_bscan error paths") {
    const SlabModel slab = reference_slab({});
    CHECK_THROWS_AS(synthesize_bscan(slab, AntennaConfig(), {}), std::invalid_argument);

    // pose off the surface
    CHECK_THROWS_AS(
        synthesize_bscan(slab, AntennaConfig(), {Pose({0.1, 0.1, 0.05}, 0, 0)}),
        std::invalid_argument);

    // a pipe breaching the surface (bypasses the slab validator on purpose)
    SlabModel bad;
    bad.dims = {0.35, 0.25, 0.25};
    bad.rel_permittivity = 7.0;
    bad.rel_permeability = 1.0;
    bad.pipes.push_back(PipeSpec({0.1, 0.0, -0.005}, {0, 1, 0}, 0.01, 0.25));
    CHECK_THROWS_AS(
        synthesize_bscan(bad, AntennaConfig(), straight_scan(0, 0.3, 0.1, 0.005)),
        std::invalid_argument);

    // time window too short for the slab
    AntennaConfig narrow(2e9, 0.05, 1e-9, 0.005, 64);
    CHECK_THROWS_AS(
        synthesize_bscan(slab, narrow, straight_scan(0, 0.3, 0.1, 0.005)),
        std::invalid_argument);
}

TEST_CASE("hyperbola law and apex minimality across ten random slabs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const AntennaConfig antenna;
    for (int trial = 0; trial < 10; ++trial) {
        const double depth = 0.05 + 0.10 * u(rng);
        const double xp = 0.12 + 0.11 * u(rng);
        const double r = 1e-4;
        PipeSpec pipe({xp, 0.0, -depth - r}, {0, 1, 0}, r, 0.25);
        const SlabModel slab = reference_slab({pipe});
        const double v = wave_velocity(slab);
        const auto poses = straight_scan(xp - 0.1, xp + 0.1, 0.125, 0.005);
        const auto bscan = synthesize_bscan(slab, antenna, poses);

        double best_peak_time = 1e9;
        std::size_t best_trace = 0;
        for (std::size_t i = 0; i < bscan.trace_count(); ++i) {
            const double t_peak = peak_index(bscan.traces[i]) * antenna.dt();
            const double dx = bscan.poses[i].position.x - xp;
            const double t_theory = 2.0 * std::sqrt(depth * depth + dx * dx) / v;
            CHECK(std::abs(t_peak - t_theory) <= antenna.dt());
            if (t_peak < best_peak_time) {
                best_peak_time = t_peak;
                best_trace = i;
            }
        }
        // apex: the trace nearest x_p carries the minimal peak time
        double best_dx = 1e9;
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < bscan.trace_count(); ++i) {
            const double dx = std::abs(bscan.poses[i].position.x - xp);
            if (dx < best_dx) {
                best_dx = dx;
                nearest = i;
            }
        }
        const double t_at_nearest = peak_index(bscan.traces[nearest]) * antenna.dt();
        CHECK(t_at_nearest <= best_peak_time + antenna.dt() / 2.0);
        (void)best_trace;
    }
}

TEST_CASE("ground_truth_mask: no pipes gives an all-zero mask") {
    const auto mask = ground_truth_mask(reference_slab({}), straight_scan(0, 0.35, 0.125, 0.005),
                                        AntennaConfig(), 0.005, 0.001);
    CHECK(mask.foreground_count() == 0);
}

TEST_CASE("ground_truth_mask: perpendicular pipe rasterizes to a ~20-row disk") {
    PipeSpec pipe({0.150, 0.0, -0.05}, {0, 1, 0}, 0.01, 0.25);
    const auto mask = ground_truth_mask(reference_slab({pipe}),
                                        straight_scan(0, 0.35, 0.125, 0.001),
                                        AntennaConfig(), 0.001, 0.001);
    std::size_t rows_hit = 0;
    for (std::size_t j = 0; j < mask.rows; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < mask.cols; ++i) any = any || mask.at(j, i);
        rows_hit += any;
    }
    CHECK(rows_hit >= 19);
    CHECK(rows_hit <= 21);
}

TEST_CASE("ground_truth_mask: 45-degree pipe gives a sqrt(2) ellipse") {
    const double s = 1.0 / std::sqrt(2.0);
    PipeSpec pipe({0.05, 0.02, -0.05}, {s, s, 0}, 0.01, 0.2);
    const auto mask = ground_truth_mask(reference_slab({pipe}),
                                        straight_scan(0, 0.35, 0.09, 0.001),
                                        AntennaConfig(), 0.001, 0.001);
    std::size_t row_min = mask.rows, row_max = 0, col_min = mask.cols, col_max = 0;
    for (std::size_t j = 0; j < mask.rows; ++j)
        for (std::size_t i = 0; i < mask.cols; ++i)
            if (mask.at(j, i)) {
                row_min = std::min(row_min, j);
                row_max = std::max(row_max, j);
                col_min = std::min(col_min, i);
                col_max = std::max(col_max, i);
            }
    REQUIRE(row_max >= row_min);
    const double row_span = static_cast<double>(row_max - row_min + 1);
    const double col_span = static_cast<double>(col_max - col_min + 1);
    CHECK(std::abs(col_span - std::sqrt(2.0) * row_span) <= 2.0);
}

TEST_CASE("ground_truth_mask rejects a crooked scan line") {
    auto poses = straight_scan(0, 0.35, 0.125, 0.005);
    poses[3] = Pose({poses[3].position.x, 0.2, 0}, 0, poses[3].timestamp);
    CHECK_THROWS_AS(
        ground_truth_mask(reference_slab({}), poses, AntennaConfig(), 0.005, 0.001),
        std::invalid_argument);
}

TEST_CASE("ground_truth_cloud") {
    SUBCASE("single pipe: every point sits on the lateral surface") {
        PipeSpec pipe({0.05, 0.125, -0.1}, {1, 0, 0}, 0.02, 0.25);
        const SlabModel slab = reference_slab({pipe});
        const auto cloud = ground_truth_cloud(slab, 8096, 3);
        REQUIRE(cloud.size() == 8096);
        for (const Vec3& p : cloud.points)
            CHECK(std::abs(pipe.distance_to_axis(p) - 0.02) < 1e-9);
    }
    SUBCASE("two identical pipes split the budget 4048/4048") {
        PipeSpec a({0.05, 0.06, -0.1}, {1, 0, 0}, 0.01, 0.25);
        PipeSpec b({0.05, 0.19, -0.1}, {1, 0, 0}, 0.01, 0.25);
        const auto cloud = ground_truth_cloud(reference_slab({a, b}), 8096, 5);
        std::size_t near_a = 0, near_b = 0;
        for (const Vec3& p : cloud.points) {
            if (a.distance_to_axis(p) < 0.011) ++near_a;
            if (b.distance_to_axis(p) < 0.011) ++near_b;
        }
        CHECK(near_a >= 4047);
        CHECK(near_a <= 4049);
        CHECK(near_b >= 4047);
        CHECK(near_b <= 4049);
    }
    SUBCASE("all points inside the slab box") {
        PipeSpec pipe({0.05, 0.125, -0.2}, {1, 0, 0}, 0.03, 0.25);
        const SlabModel slab = reference_slab({pipe});
        const auto cloud = ground_truth_cloud(slab, 2000, 8);
        for (const Vec3& p : cloud.points) {
            CHECK(p.x >= -1e-9);
            CHECK(p.x <= 0.35 + 1e-9);
            CHECK(p.y >= -1e-9);
            CHECK(p.y <= 0.25 + 1e-9);
            CHECK(p.z <= 1e-9);
            CHECK(p.z >= -0.25 - 1e-9);
        }
    }
    SUBCASE("no pipes is an error") {
        CHECK_THROWS_AS(ground_truth_cloud(reference_slab({}), 100, 0), std::invalid_argument);
    }
}

TEST_CASE("corrupt_image") {
    MigrationImage img(100, 100, 0.01, 0.01);
    for (std::size_t k = 0; k < img.data.size(); ++k)
        img.data[k] = static_cast<double>(k) / 9999.0;

    SUBCASE("level zero is the identity for all kinds") {
        for (NoiseKind kind : {NoiseKind::Gaussian, NoiseKind::SaltPepper, NoiseKind::Speckle}) {
            const auto out = corrupt_image(img, NoiseSpec(kind, 0.0, 7));
            CHECK(out.data == img.data);
        }
    }
    SUBCASE("salt & pepper density 0.5 corrupts about half the pixels") {
        const auto out = corrupt_image(img, NoiseSpec(NoiseKind::SaltPepper, 0.5, 11));
        std::size_t changed = 0;
        for (std::size_t k = 0; k < img.data.size(); ++k)
            changed += (out.data[k] != img.data[k]);
        CHECK(changed >= 4800);
        CHECK(changed <= 5200);
    }
    SUBCASE("gaussian level on a zero image satisfies the CLT bound") {
        MigrationImage zero(100, 100, 0.01, 0.01);
        const auto out = corrupt_image(zero, NoiseSpec(NoiseKind::Gaussian, 0.05, 23));
        double mean = 0.0;
        for (double v : out.data) mean += v;
        mean /= static_cast<double>(out.data.size());
        CHECK(std::abs(mean) <= 4.0 * std::sqrt(0.05) / 100.0);
    }
    SUBCASE("deterministic under a fixed seed") {
        const auto a = corrupt_image(img, NoiseSpec(NoiseKind::Speckle, 0.2, 99));
        const auto b = corrupt_image(img, NoiseSpec(NoiseKind::Speckle, 0.2, 99));
        CHECK(a.data == b.data);
    }
    SUBCASE("level outside [0,1] is rejected") {
        CHECK_THROWS_AS(NoiseSpec(NoiseKind::Gaussian, 1.5, 0), std::invalid_argument);
    }
}

TEST_CASE("corrupt_cloud") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud cloud;
    for (int i = 0; i < 10000; ++i) cloud.points.push_back({u(rng), u(rng), u(rng)});

    SUBCASE("zero std is the identity") {
        const auto out = corrupt_cloud(cloud, 0.0, 1);
        CHECK(out.size() == cloud.size());
        CHECK(out.points[17].x == cloud.points[17].x);
    }
    SUBCASE("displacement standard deviation tracks the requested level") {
        const auto out = corrupt_cloud(cloud, 0.1, 31);
        REQUIRE(out.size() == cloud.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const Vec3 d = out.points[i] - cloud.points[i];
            acc += d.x * d.x + d.y * d.y + d.z * d.z;
        }
        const double sd = std::sqrt(acc / (3.0 * static_cast<double>(cloud.size())));
        CHECK(sd >= 0.097);
        CHECK(sd <= 0.103);
    }
}

TEST_CASE("corrupt_bscan applies the harness to trace samples") {
    PipeSpec pipe({0.1, 0.0, -0.08}, {0, 1, 0}, 0.01, 0.25);
    const SlabModel slab = reference_slab({pipe});
    const auto bscan =
        synthesize_bscan(slab, AntennaConfig(), straight_scan(0, 0.2, 0.125, 0.005));
    const auto noisy = corrupt_bscan(bscan, NoiseSpec(NoiseKind::Gaussian, 0.1, 4));
    REQUIRE(noisy.trace_count() == bscan.trace_count());
    std::size_t diff = 0;
    for (std::size_t i = 0; i < bscan.trace_count(); ++i)
        for (std::size_t j = 0; j < bscan.samples_per_trace(); ++j)
            diff += noisy.traces[i].samples[j] != bscan.traces[i].samples[j];
    CHECK(diff > bscan.trace_count() * bscan.samples_per_trace() / 2);

    const auto again = corrupt_bscan(bscan, NoiseSpec(NoiseKind::Gaussian, 0.1, 4));
    CHECK(again.traces[3].samples == noisy.traces[3].samples);
}
