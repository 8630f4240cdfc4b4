#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gpr/pointcloud.hpp"

using namespace gpr;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed, double span = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-span, span);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
    return c;
}

double min_pairwise_distance(const PointCloud& c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            best = std::min(best, (c.points[i] - c.points[j]).norm());
    return best;
}

std::vector<Pose> scan_poses(double y, std::size_t n = 5) {
    std::vector<Pose> poses;
    for (std::size_t i = 0; i < n; ++i)
        poses.emplace_back(Vec3{static_cast<double>(i) * 0.01, y, 0.0}, 0.0,
                           static_cast<double>(i));
    return poses;
}

}  // namespace

TEST_CASE("register_masks") {
    SUBCASE("all-zero masks make an empty cloud") {
        CrossSectionMask mask(8, 5, 0.01, 0.005);
        const auto cloud = register_masks({mask, mask}, {scan_poses(0), scan_poses(0.1)});
        CHECK(cloud.empty());
    }
    SUBCASE("single white pixel maps straight down from the pose") {
        CrossSectionMask mask(8, 5, 0.01, 0.005);
        mask.at(3, 0) = 1;
        const auto cloud = register_masks({mask}, {scan_poses(0.2)});
        REQUIRE(cloud.size() == 1);
        CHECK(cloud.points[0].x == doctest::Approx(0.0));
        CHECK(cloud.points[0].y == doctest::Approx(0.2));
        CHECK(cloud.points[0].z == doctest::Approx(-3 * 0.005));
    }
    SUBCASE("point count equals the total foreground count") {
        CrossSectionMask a(6, 5, 0.01, 0.005), b(6, 5, 0.01, 0.005);
        a.at(0, 0) = a.at(2, 3) = a.at(5, 4) = 1;
        b.at(1, 1) = 1;
        const auto cloud = register_masks({a, b}, {scan_poses(0), scan_poses(0.1)});
        CHECK(cloud.size() == a.foreground_count() + b.foreground_count());
    }
    SUBCASE("two parallel scan lines keep their cross-scan separation") {
        CrossSectionMask mask(8, 5, 0.01, 0.005);
        mask.at(4, 1) = mask.at(4, 2) = mask.at(4, 3) = 1;
        const auto c1 = register_masks({mask}, {scan_poses(0.0)});
        const auto c2 = register_masks({mask}, {scan_poses(0.1)});
        Vec3 m1, m2;
        for (const Vec3& p : c1.points) m1 += p;
        for (const Vec3& p : c2.points) m2 += p;
        m1 = m1 / static_cast<double>(c1.size());
        m2 = m2 / static_cast<double>(c2.size());
        CHECK(std::abs((m2 - m1).y - 0.1) < 0.01);
        CHECK(std::abs((m2 - m1).x) < 1e-12);
    }
    SUBCASE("mask/pose mismatch and short pose streams are errors") {
        CrossSectionMask mask(4, 4, 0.01, 0.005);
        CHECK_THROWS_AS(register_masks({mask}, {}), std::invalid_argument);
        CHECK_THROWS_AS(register_masks({mask}, {{Pose({0, 0, 0}, 0, 0)}}),
                        std::invalid_argument);
    }
}

TEST_CASE("ifps") {
    SUBCASE("three points, k = 2: picks the farthest endpoint") {
        PointCloud c({{0, 0, 0}, {0.4, 0, 0}, {1.0, 0, 0}});
        const auto out = ifps(c, 2, 0);
        REQUIRE(out.size() == 2);
        CHECK(out.points[0].x == 0.0);
        CHECK(out.points[1].x == 1.0);
    }
    SUBCASE("k = cloud size returns the whole cloud (as a set)") {
        const auto c = random_cloud(20, 4);
        auto out = ifps(c, 20, 0);
        REQUIRE(out.size() == 20);
        auto key = [](const Vec3& p) { return std::make_tuple(p.x, p.y, p.z); };
        std::vector<std::tuple<double, double, double>> a, b;
        for (const Vec3& p : c.points) a.push_back(key(p));
        for (const Vec3& p : out.points) b.push_back(key(p));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
    SUBCASE("collinear greedy trace") {
        PointCloud c({{0, 0, 0}, {0.25, 0, 0}, {0.5, 0, 0}, {0.75, 0, 0}, {1.0, 0, 0}});
        const auto out = ifps(c, 3, 0);
        REQUIRE(out.size() == 3);
        CHECK(out.points[0].x == 0.0);
        CHECK(out.points[1].x == 1.0);
        CHECK(out.points[2].x == 0.5);
    }
    SUBCASE("matches a brute-force greedy oracle on random clouds") {
        const auto c = random_cloud(40, 77);
        const auto out = ifps(c, 10, 0);
        // oracle: literal greedy re-implementation
        std::vector<std::size_t> chosen{0};
        while (chosen.size() < 10) {
            double best_d = -1.0;
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                double min_d = std::numeric_limits<double>::infinity();
                for (std::size_t k : chosen)
                    min_d = std::min(min_d, (c.points[i] - c.points[k]).squared_norm());
                if (min_d > best_d) {
                    best_d = min_d;
                    best_i = i;
                }
            }
            chosen.push_back(best_i);
        }
        for (std::size_t i = 0; i < 10; ++i) {
            CHECK(out.points[i].x == c.points[chosen[i]].x);
            CHECK(out.points[i].y == c.points[chosen[i]].y);
        }
    }
    SUBCASE("bad arguments") {
        const auto c = random_cloud(5, 1);
        CHECK_THROWS_AS(ifps(c, 6, 0), std::invalid_argument);
        CHECK_THROWS_AS(ifps(c, 2, 5), std::invalid_argument);
        CHECK_THROWS_AS(ifps(PointCloud{}, 1, 0), std::invalid_argument);
    }
    SUBCASE("spread dominance over random subsets") {
        std::mt19937_64 rng(2024);
        for (int trial = 0; trial < 5; ++trial) {
            const auto cloud = random_cloud(1000, 5000 + trial);
            const double ifps_min = min_pairwise_distance(ifps(cloud, 100, 0));
            std::vector<double> random_mins;
            for (int r = 0; r < 100; ++r) {
                std::vector<std::size_t> idx(cloud.size());
                std::iota(idx.begin(), idx.end(), 0);
                std::shuffle(idx.begin(), idx.end(), rng);
                PointCloud sub;
                for (int i = 0; i < 100; ++i) sub.points.push_back(cloud.points[idx[i]]);
                random_mins.push_back(min_pairwise_distance(sub));
            }
            std::nth_element(random_mins.begin(), random_mins.begin() + 50,
                             random_mins.end());
            CHECK(ifps_min >= random_mins[50]);
        }
    }
}

TEST_CASE("chamfer_distance") {
    SUBCASE("identical clouds") {
        const auto c = random_cloud(30, 9);
        CHECK(chamfer_distance(c, c) == 0.0);
    }
    SUBCASE("unit separation, both directions") {
        PointCloud a({{0, 0, 0}});
        PointCloud b({{1, 0, 0}});
        CHECK(chamfer_distance(a, b) == doctest::Approx(2.0));
    }
    SUBCASE("20 vs 30 random points match the exhaustive pairwise oracle") {
        const auto a = random_cloud(20, 10);
        const auto b = random_cloud(30, 11);
        double fwd = 0.0;
        for (const Vec3& p : a.points) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : b.points) best = std::min(best, (p - q).norm());
            fwd += best;
        }
        double bwd = 0.0;
        for (const Vec3& q : b.points) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& p : a.points) best = std::min(best, (p - q).norm());
            bwd += best;
        }
        CHECK(chamfer_distance(a, b) == fwd / 20.0 + bwd / 30.0);
    }
    SUBCASE("the two-term form is symmetric") {
        const auto a = random_cloud(15, 12);
        const auto b = random_cloud(25, 13);
        CHECK(chamfer_distance(a, b) == chamfer_distance(b, a));
    }
    SUBCASE("empty cloud is an error") {
        CHECK_THROWS_AS(chamfer_distance(PointCloud{}, random_cloud(3, 14)),
                        std::invalid_argument);
    }
}

TEST_CASE("emd") {
    SUBCASE("identical clouds") {
        const auto c = random_cloud(12, 15);
        const auto r = emd(c, c);
        CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.exact);
    }
    SUBCASE("singletons") {
        PointCloud a({{0, 0, 0}});
        PointCloud b({{1, 0, 0}});
        CHECK(emd(a, b).value == doctest::Approx(1.0));
    }
    SUBCASE("8 vs 8 random points match the 8! permutation scan") {
        const auto a = random_cloud(8, 16);
        const auto b = random_cloud(8, 17);
        std::vector<std::size_t> perm(8);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < 8; ++i)
                total += (a.points[i] - b.points[perm[i]]).norm();
            best = std::min(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(emd(a, b).value == doctest::Approx(best / 8.0).epsilon(1e-12));
    }
    SUBCASE("assignment cost dominates the one-directional chamfer mean") {
        for (std::uint64_t seed = 30; seed < 40; ++seed) {
            const auto a = random_cloud(24, seed);
            const auto b = random_cloud(24, seed + 100);
            double fwd = 0.0;
            for (const Vec3& p : a.points) {
                double bestd = std::numeric_limits<double>::infinity();
                for (const Vec3& q : b.points) bestd = std::min(bestd, (p - q).norm());
                fwd += bestd;
            }
            CHECK(emd(a, b).value >= fwd / 24.0 - 1e-12);
        }
    }
    SUBCASE("unequal clouds are padded, not rejected") {
        const auto a = random_cloud(5, 18);
        const auto b = random_cloud(9, 19);
        CHECK_NOTHROW(emd(a, b));
        CHECK(emd(a, b).value >= 0.0);
    }
    SUBCASE("large clouds flag the auction approximation") {
        const auto a = random_cloud(300, 20);
        const auto b = random_cloud(300, 21);
        const auto r = emd(a, b);
        CHECK_FALSE(r.exact);
        CHECK(r.value > 0.0);
    }
    SUBCASE("empty cloud is an error") {
        CHECK_THROWS_AS(emd(PointCloud{}, random_cloud(3, 22)), std::invalid_argument);
    }
}

TEST_CASE("l1_centroid") {
    SUBCASE("identical clouds") {
        const auto c = random_cloud(50, 23);
        CHECK(l1_centroid(c, c) == 0.0);
    }
    SUBCASE("unit sphere vs radius-2 sphere differs by about 1") {
        std::mt19937_64 rng(24);
        std::normal_distribution<double> g(0.0, 1.0);
        PointCloud unit, twice;
        for (int i = 0; i < 5000; ++i) {
            Vec3 v{g(rng), g(rng), g(rng)};
            v = v.normalized();
            unit.points.push_back(v);
            twice.points.push_back(v * 2.0);
        }
        CHECK(l1_centroid(unit, twice) == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("translation leaves the value unchanged") {
        const auto a = random_cloud(40, 25);
        PointCloud shifted;
        for (const Vec3& p : a.points) shifted.points.push_back(p + Vec3{5, -3, 2});
        const auto b = random_cloud(40, 26);
        CHECK(std::abs(l1_centroid(a, b) - l1_centroid(shifted, b)) < 1e-12);
    }
}
