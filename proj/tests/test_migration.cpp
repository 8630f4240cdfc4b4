#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gpr/forward.hpp"
#include "gpr/migration.hpp"

using namespace gpr;

namespace {

BScan make_bscan(std::size_t n, std::size_t m = 2, double dt = 1e-10,
                 double spacing = 0.005) {
    std::vector<AScan> traces;
    std::vector<Pose> poses;
    for (std::size_t i = 0; i < n; ++i) {
        traces.emplace_back(std::vector<double>(m, 0.0), dt, 0.0);
        poses.emplace_back(Vec3{static_cast<double>(i) * spacing, 0, 0}, 0.0,
                           static_cast<double>(i) * 0.01);
    }
    return BScan(std::move(traces), std::move(poses), spacing);
}

MigrationImage random_image(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    MigrationImage img(rows, cols, 0.01, 0.01);
    for (double& v : img.data) v = u(rng);
    return img;
}

}  // namespace

TEST_CASE("crop_bscan window counts equal ceil(N/1024)") {
    const std::size_t cases[] = {1, 1023, 1024, 1025, 2048, 2500, 10000};
    for (std::size_t n : cases) {
        const auto windows = crop_bscan(make_bscan(n));
        const std::size_t expected = (n + 1023) / 1024;
        CHECK(windows.size() == expected);
        if (n > 1024)
            for (const BScan& w : windows) CHECK(w.trace_count() == 1024);
    }
}

TEST_CASE("crop_bscan: N = 2048 splits without overlap") {
    const auto offsets = crop_offsets(2048, 1024);
    REQUIRE(offsets.size() == 2);
    CHECK(offsets[0] == 0);
    CHECK(offsets[1] == 1024);
}

TEST_CASE("crop_bscan: N = 2500 windows cover every trace") {
    const auto offsets = crop_offsets(2500, 1024);
    REQUIRE(offsets.size() == 3);
    std::vector<bool> covered(2500, false);
    for (std::size_t start : offsets)
        for (std::size_t i = start; i < start + 1024; ++i) covered[i] = true;
    CHECK(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }));
}

TEST_CASE("sparse_sample") {
    SUBCASE("identity when n_hat = N") {
        const auto idx = sparse_sample_indices(100, 100);
        for (std::size_t i = 0; i < 100; ++i) CHECK(idx[i] == i);
    }
    SUBCASE("64 of 1024: strictly increasing, endpoints included") {
        const auto idx = sparse_sample_indices(1024, 64);
        REQUIRE(idx.size() == 64);
        CHECK(idx.front() == 0);
        CHECK(idx.back() == 1023);
        for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
    }
    SUBCASE("exact output count for assorted sizes") {
        for (std::size_t n_hat : {1u, 2u, 37u, 128u, 256u}) {
            const auto idx = sparse_sample_indices(300, n_hat);
            CHECK(idx.size() == n_hat);
            for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
        }
    }
    SUBCASE("oversampling is an error") {
        CHECK_THROWS_AS(sparse_sample_indices(10, 11), std::invalid_argument);
        CHECK_THROWS_AS(sparse_sample(make_bscan(10), 11), std::invalid_argument);
    }
    SUBCASE("poses are carried along") {
        const auto sampled = sparse_sample(make_bscan(100), 10);
        CHECK(sampled.trace_count() == 10);
        CHECK(sampled.poses.back().position.x == doctest::Approx(99 * 0.005));
    }
}

TEST_CASE("back_project_trace") {
    const double v = 1e8;
    const double dz = 0.005;
    GridSpec grid{60, 81, dz, dz, 0.0, 0.0};
    const ScanFrame frame{{0, 0, 0}, {1, 0, 0}};

    SUBCASE("all-zero trace leaves the target unchanged") {
        MigrationImage img = grid.make_image();
        AScan trace(std::vector<double>(40, 0.0), 1e-10, 0.0);
        back_project_trace(trace, Pose({0.2, 0, 0}, 0, 0), v, frame, img);
        for (double val : img.data) CHECK(val == 0.0);
    }

    SUBCASE("single unit sample deposits a half-cell ring at r = 0.10 m") {
        MigrationImage img = grid.make_image();
        std::vector<double> samples(40, 0.0);
        samples[20] = 1.0;  // r = v*t/2 = 20 * dz = 0.10 m
        back_project_trace(AScan(samples, 1e-10, 0.0), Pose({0.2, 0, 0}, 0, 0), v,
                           frame, img);
        double sum = 0.0;
        const double band = dz / std::sqrt(2.0);
        for (std::size_t j = 0; j < img.rows; ++j) {
            for (std::size_t i = 0; i < img.cols; ++i) {
                if (img.at(j, i) == 0.0) continue;
                const double dist = std::hypot(i * dz - 0.2, j * dz);
                CHECK(std::abs(dist - 0.10) <= band + 1e-12);
                sum += img.at(j, i);
            }
        }
        CHECK(sum > 0.0);
        // brute-force membership: every in-band cell must hold the deposit
        for (std::size_t j = 0; j < img.rows; ++j)
            for (std::size_t i = 0; i < img.cols; ++i) {
                const double dist = std::hypot(i * dz - 0.2, j * dz);
                if (std::abs(dist - 0.10) <= band - 1e-12)
                    CHECK(img.at(j, i) == 1.0);
            }
    }

    SUBCASE("two traces stack on a common scatterer cell") {
        MigrationImage img = grid.make_image();
        // scatterer at (0.15, 0.12): slant from both traces = 0.13 = 26 cells
        std::vector<double> samples(40, 0.0);
        samples[26] = 1.0;
        back_project_trace(AScan(samples, 1e-10, 0.0), Pose({0.1, 0, 0}, 0, 0), v,
                           frame, img);
        back_project_trace(AScan(samples, 1e-10, 0.0), Pose({0.2, 0, 0}, 0, 0), v,
                           frame, img);
        CHECK(img.at(24, 30) == 2.0);  // row 0.12/dz, col 0.15/dz
    }

    SUBCASE("linearity on integer-amplitude traces") {
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<int> amp(0, 5);
        std::vector<double> a(40), b(40), ab(40);
        for (std::size_t j = 0; j < 40; ++j) {
            a[j] = amp(rng);
            b[j] = amp(rng);
            ab[j] = a[j] + b[j];
        }
        MigrationImage img_a = grid.make_image();
        MigrationImage img_b = grid.make_image();
        MigrationImage img_ab = grid.make_image();
        const Pose pose({0.18, 0, 0}, 0, 0);
        back_project_trace(AScan(a, 1e-10, 0.0), pose, v, frame, img_a);
        back_project_trace(AScan(b, 1e-10, 0.0), pose, v, frame, img_b);
        back_project_trace(AScan(ab, 1e-10, 0.0), pose, v, frame, img_ab);
        for (std::size_t k = 0; k < img_ab.data.size(); ++k)
            CHECK(img_ab.data[k] == img_a.data[k] + img_b.data[k]);
    }
}

TEST_CASE("back_project_all merges per-trace accumulators in index order") {
    PipeSpec pipe({0.15, 0.0, -0.08}, {0, 1, 0}, 0.005, 0.25);
    const SlabModel slab({0.35, 0.25, 0.25}, 7.0, 0.01, 1.0, {pipe});
    std::vector<Pose> poses;
    for (int i = 0; i < 30; ++i)
        poses.emplace_back(Vec3{0.05 + i * 0.005, 0.125, 0}, 0.0, i * 0.01);
    const AntennaConfig antenna(2e9, 0.05, 5e-9, 0.005, 64);
    const auto bscan = synthesize_bscan(slab, antenna, poses);
    const double v = wave_velocity(slab);
    const GridSpec grid = GridSpec::for_bscan(bscan, v);

    const MigrationImage direct = back_project_all(bscan, v, grid);

    // per-trace accumulators processed in reverse, merged in index order
    std::vector<MigrationImage> partials;
    const ScanFrame frame = ScanFrame::from_poses(bscan.poses);
    partials.resize(bscan.trace_count(), grid.make_image());
    for (std::size_t i = bscan.trace_count(); i-- > 0;)
        back_project_trace(bscan.traces[i], bscan.poses[i], v, frame, partials[i]);
    MigrationImage merged = grid.make_image();
    for (std::size_t i = 0; i < partials.size(); ++i)
        for (std::size_t k = 0; k < merged.data.size(); ++k)
            merged.data[k] += partials[i].data[k];

    CHECK(merged.data == direct.data);
}

TEST_CASE("aggregate_bp") {
    SUBCASE("zero B-scan yields three zero channels") {
        const auto bscan = make_bscan(80, 32);
        const auto stacked = aggregate_bp(bscan, 1e8, GridSpec::for_bscan(bscan, 1e8));
        for (const auto& ch : stacked.channels)
            for (double v : ch.data) CHECK(v == 0.0);
    }
    SUBCASE("short windows are rejected") {
        const auto bscan = make_bscan(50, 32);
        CHECK_THROWS_AS(aggregate_bp(bscan, 1e8, GridSpec::for_bscan(bscan, 1e8)),
                        std::invalid_argument);
    }
    SUBCASE("single scatterer focuses at the same cell in all channels") {
        PipeSpec pipe({0.175, 0.0, -0.09}, {0, 1, 0}, 0.005, 0.25);
        const SlabModel slab({0.35, 0.25, 0.25}, 7.0, 0.01, 1.0, {pipe});
        std::vector<Pose> poses;
        for (int i = 0; i < 71; ++i)
            poses.emplace_back(Vec3{i * 0.005, 0.125, 0}, 0.0, i * 0.01);
        const AntennaConfig antenna(2e9, 0.05, 5e-9, 0.005, 128);
        const auto bscan = synthesize_bscan(slab, antenna, poses);
        const double v = wave_velocity(slab);
        const auto stacked = aggregate_bp(bscan, v, GridSpec::for_bscan(bscan, v));

        std::array<std::pair<std::size_t, std::size_t>, 3> argmaxes;
        for (std::size_t c = 0; c < 3; ++c) {
            const auto& ch = stacked.channels[c];
            std::size_t best = 0;
            for (std::size_t k = 1; k < ch.data.size(); ++k)
                if (ch.data[k] > ch.data[best]) best = k;
            argmaxes[c] = {best / ch.cols, best % ch.cols};
            CHECK(*std::max_element(ch.data.begin(), ch.data.end()) ==
                  doctest::Approx(1.0));
        }
        for (std::size_t c = 1; c < 3; ++c) {
            CHECK(std::abs(static_cast<long>(argmaxes[c].first) -
                           static_cast<long>(argmaxes[0].first)) <= 1);
            CHECK(std::abs(static_cast<long>(argmaxes[c].second) -
                           static_cast<long>(argmaxes[0].second)) <= 1);
        }
    }
    SUBCASE("channel energy ordering on uniform traces (before normalization)") {
        BScan bscan = make_bscan(300, 32);
        for (AScan& t : bscan.traces) std::fill(t.samples.begin(), t.samples.end(), 1.0);
        const GridSpec grid = GridSpec::for_bscan(bscan, 1e8);
        double sums[3];
        const std::size_t res[3] = {256, 128, 64};
        for (int c = 0; c < 3; ++c) {
            const auto img = back_project_all(sparse_sample(bscan, res[c]), 1e8, grid);
            sums[c] = 0.0;
            for (double v : img.data) sums[c] += v;
        }
        CHECK(sums[0] >= sums[1]);
        CHECK(sums[1] >= sums[2]);
    }
}

TEST_CASE("hilbert_envelope") {
    SUBCASE("cosine columns have unit envelope") {
        MigrationImage img(64, 3, 0.01, 0.01);
        for (std::size_t j = 0; j < 64; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                img.at(j, i) = std::cos(2.0 * kPi * 4.0 * j / 64.0);
        const auto env = hilbert_envelope(img);
        for (double v : env.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("zero image stays zero") {
        const auto env = hilbert_envelope(MigrationImage(16, 4, 0.01, 0.01));
        for (double v : env.data) CHECK(v == 0.0);
    }
    SUBCASE("Ricker column: envelope peaks at the wavelet center, single-lobed") {
        MigrationImage img(256, 1, 0.01, 0.001);
        const double dt = 2e-11, fc = 2e9, center = 128 * dt;
        for (std::size_t j = 0; j < 256; ++j)
            img.at(j, 0) = ricker(j * dt - center, fc);
        const auto env = hilbert_envelope(img);
        std::size_t best = 0;
        for (std::size_t j = 1; j < 256; ++j)
            if (env.at(j, 0) > env.at(best, 0)) best = j;
        CHECK(best == 128);
        // single main lobe: envelope decreases monotonically near the peak
        for (std::size_t j = 128; j < 140; ++j)
            CHECK(env.at(j + 1, 0) <= env.at(j, 0) + 1e-9);
        for (std::size_t j = 128; j > 116; --j)
            CHECK(env.at(j - 1, 0) <= env.at(j, 0) + 1e-9);
    }
}

TEST_CASE("binarize") {
    MigrationImage img(1, 3, 0.01, 0.01);
    img.at(0, 0) = 0.46;
    img.at(0, 1) = 0.45;
    img.at(0, 2) = 0.0;
    const auto mask = binarize(img, 0.45);
    CHECK(mask.at(0, 0) == 1);  // strictly greater than the threshold
    CHECK(mask.at(0, 1) == 0);
    CHECK(mask.at(0, 2) == 0);

    const auto zero_mask = binarize(MigrationImage(4, 4, 0.01, 0.01));
    CHECK(zero_mask.foreground_count() == 0);

    MigrationImage bad(1, 1, 0.01, 0.01);
    bad.at(0, 0) = 1.5;
    CHECK_THROWS_AS(binarize(bad), std::invalid_argument);
}

TEST_CASE("iou") {
    CrossSectionMask a(2, 2, 0.01, 0.01), b(2, 2, 0.01, 0.01);
    SUBCASE("identical non-empty masks") {
        a.at(0, 0) = b.at(0, 0) = 1;
        CHECK(iou(a, b) == 1.0);
    }
    SUBCASE("disjoint masks") {
        a.at(0, 0) = 1;
        b.at(1, 1) = 1;
        CHECK(iou(a, b) == 0.0);
    }
    SUBCASE("two pixels each, one shared") {
        a.at(0, 0) = a.at(0, 1) = 1;
        b.at(0, 1) = b.at(1, 0) = 1;
        CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("both empty counts as 1") { CHECK(iou(a, b) == 1.0); }
    SUBCASE("dimension mismatch") {
        CrossSectionMask c(3, 2, 0.01, 0.01);
        CHECK_THROWS_AS(iou(a, c), std::invalid_argument);
    }
}

TEST_CASE("pixel_accuracy") {
    CrossSectionMask a(2, 2, 0.01, 0.01), b(2, 2, 0.01, 0.01);
    SUBCASE("identical") { CHECK(pixel_accuracy(a, b) == 1.0); }
    SUBCASE("complement") {
        a.data = {1, 1, 1, 1};
        CHECK(pixel_accuracy(a, b) == 0.0);
    }
    SUBCASE("three of four agree") {
        a.data = {1, 0, 0, 0};
        CHECK(pixel_accuracy(a, b) == 0.75);
    }
}

TEST_CASE("mse / rmse") {
    MigrationImage x(2, 2, 0.01, 0.01), y(2, 2, 0.01, 0.01);
    SUBCASE("identical images") {
        CHECK(mse(x, y) == 0.0);
        CHECK(rmse_image(x, y) == 0.0);
    }
    SUBCASE("one pixel differs by 1") {
        x.at(0, 0) = 1.0;
        CHECK(mse(x, y) == 0.25);
        CHECK(rmse_image(x, y) == 0.5);
    }
    SUBCASE("all pixels differ by 2") {
        for (double& v : x.data) v = 2.0;
        CHECK(mse(x, y) == 4.0);
    }
    SUBCASE("rmse^2 equals mse on random pairs") {
        const auto a = random_image(8, 8, 1);
        const auto b = random_image(8, 8, 2);
        CHECK(rmse_image(a, b) * rmse_image(a, b) == doctest::Approx(mse(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("snr_db") {
    SUBCASE("one of 16 unit pixels zeroed gives ~12.04 dB") {
        MigrationImage y(4, 4, 0.01, 0.01);
        for (double& v : y.data) v = 1.0;
        MigrationImage x = y;
        x.at(0, 0) = 0.0;
        CHECK(snr_db(x, y) == doctest::Approx(10.0 * std::log10(16.0)).epsilon(1e-12));
    }
    SUBCASE("equal signal and noise power is 0 dB") {
        MigrationImage y(1, 2, 0.01, 0.01), x(1, 2, 0.01, 0.01);
        y.data = {1.0, 1.0};
        x.data = {2.0, 0.0};  // noise (1,-1), power 2 = signal power
        CHECK(snr_db(x, y) == doctest::Approx(0.0));
    }
    SUBCASE("doubling the noise amplitude costs ~6.02 dB") {
        const auto y = random_image(8, 8, 3);
        auto x1 = y;
        auto x2 = y;
        const auto noise = random_image(8, 8, 4, -0.1, 0.1);
        for (std::size_t k = 0; k < y.data.size(); ++k) {
            x1.data[k] += noise.data[k];
            x2.data[k] += 2.0 * noise.data[k];
        }
        CHECK(snr_db(x1, y) - snr_db(x2, y) ==
              doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
    }
    SUBCASE("identical images are an error (infinite SNR)") {
        const auto y = random_image(4, 4, 5);
        CHECK_THROWS_AS(snr_db(y, y), std::domain_error);
    }
}

TEST_CASE("ssim") {
    SUBCASE("identical non-constant image scores 1") {
        const auto x = random_image(8, 8, 6);
        CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("negated zero-mean image scores negative") {
        auto x = random_image(8, 8, 7, -1.0, 1.0);
        double mean = 0.0;
        for (double v : x.data) mean += v;
        mean /= static_cast<double>(x.data.size());
        for (double& v : x.data) v -= mean;
        auto y = x;
        for (double& v : y.data) v = -v;
        CHECK(ssim(x, y) < 0.0);
    }
    SUBCASE("random 8x8 pair matches an independent one-pass-products oracle") {
        const auto x = random_image(8, 8, 8);
        const auto y = random_image(8, 8, 9);
        const double n = 64.0;
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t k = 0; k < 64; ++k) {
            sx += x.data[k];
            sy += y.data[k];
            sxx += x.data[k] * x.data[k];
            syy += y.data[k] * y.data[k];
            sxy += x.data[k] * y.data[k];
        }
        const double mx = sx / n, my = sy / n;
        const double vx = (sxx - n * mx * mx) / (n - 1);
        const double vy = (syy - n * my * my) / (n - 1);
        const double cov = (sxy - n * mx * my) / (n - 1);
        const double c1 = 1e-4, c2 = 9e-4;
        const double want = ((2 * mx * my + c1) * (2 * cov + c2)) /
                            ((mx * mx + my * my + c1) * (vx + vy + c2));
        CHECK(ssim(x, y, c1, c2) == doctest::Approx(want).epsilon(1e-10));
    }
    SUBCASE("non-positive stabilizers are rejected") {
        const auto x = random_image(4, 4, 10);
        CHECK_THROWS_AS(ssim(x, x, 0.0, 1e-4), std::invalid_argument);
    }
}

TEST_CASE("metric symmetry where the formulas are symmetric") {
    const auto x = random_image(6, 6, 11);
    const auto y = random_image(6, 6, 12);
    CHECK(mse(x, y) == mse(y, x));
    CHECK(rmse_image(x, y) == rmse_image(y, x));
    const auto mx = binarize(max_normalize(x), 0.5);
    const auto my = binarize(max_normalize(y), 0.5);
    CHECK(iou(mx, my) == iou(my, mx));
    CHECK(pixel_accuracy(mx, my) == pixel_accuracy(my, mx));
}

TEST_CASE("max_normalize maps peaks to 1 and keeps zero images intact") {
    auto img = random_image(5, 5, 13, 0.0, 3.0);
    const auto norm = max_normalize(img);
    CHECK(*std::max_element(norm.data.begin(), norm.data.end()) == doctest::Approx(1.0));
    const auto zero = max_normalize(MigrationImage(3, 3, 0.01, 0.01));
    for (double v : zero.data) CHECK(v == 0.0);
}
