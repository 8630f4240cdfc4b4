#include "gpr/migration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gpr/dsp.hpp"

namespace gpr {

GridSpec GridSpec::for_bscan(const BScan& bscan, double v) {
    if (v <= 0.0) throw std::invalid_argument("GridSpec: velocity must be positive");
    GridSpec g;
    g.rows = bscan.samples_per_trace();
    g.cols = bscan.trace_count();
    g.dx = bscan.spacing;
    g.dz = v * bscan.dt() / 2.0;
    g.origin_x = 0.0;
    g.origin_z = v * bscan.t0() / 2.0;
    return g;
}

MigrationImage GridSpec::make_image() const {
    return MigrationImage(rows, cols, dx, dz, origin_x, origin_z);
}

ScanFrame ScanFrame::from_poses(const std::vector<Pose>& poses) {
    if (poses.size() < 2)
        throw std::invalid_argument("ScanFrame: need at least 2 poses");
    const Vec3 span = poses.back().position - poses.front().position;
    return {poses.front().position, span.normalized()};
}

std::vector<std::size_t> crop_offsets(std::size_t n, std::size_t window) {
    if (n == 0) throw std::invalid_argument("crop_offsets: empty B-scan");
    if (window == 0) throw std::invalid_argument("crop_offsets: zero window");
    if (n <= window) return {0};
    const std::size_t q = (n + window - 1) / window;
    std::vector<std::size_t> offsets(q);
    const double span = static_cast<double>(n - window);
    for (std::size_t i = 0; i < q; ++i)
        offsets[i] = static_cast<std::size_t>(
            std::llround(span * static_cast<double>(i) / static_cast<double>(q - 1)));
    return offsets;
}

std::vector<BScan> crop_bscan(const BScan& bscan, std::size_t window) {
    const std::size_t n = bscan.trace_count();
    if (n <= window) return {bscan};
    std::vector<BScan> out;
    for (std::size_t start : crop_offsets(n, window)) {
        std::vector<AScan> traces(bscan.traces.begin() + start,
                                  bscan.traces.begin() + start + window);
        std::vector<Pose> poses(bscan.poses.begin() + start,
                                bscan.poses.begin() + start + window);
        out.emplace_back(std::move(traces), std::move(poses), bscan.spacing);
    }
    return out;
}

std::vector<std::size_t> sparse_sample_indices(std::size_t n, std::size_t n_hat) {
    if (n_hat == 0 || n_hat > n)
        throw std::invalid_argument("sparse_sample: need 0 < n_hat <= N");
    if (n_hat == 1) return {0};
    std::vector<std::size_t> idx(n_hat);
    const double step = static_cast<double>(n - 1) / static_cast<double>(n_hat - 1);
    for (std::size_t i = 0; i < n_hat; ++i)
        idx[i] = static_cast<std::size_t>(std::llround(step * static_cast<double>(i)));
    idx.back() = n - 1;
    return idx;
}

BScan sparse_sample(const BScan& bscan, std::size_t n_hat) {
    const auto idx = sparse_sample_indices(bscan.trace_count(), n_hat);
    std::vector<AScan> traces;
    std::vector<Pose> poses;
    traces.reserve(idx.size());
    poses.reserve(idx.size());
    for (std::size_t i : idx) {
        traces.push_back(bscan.traces[i]);
        poses.push_back(bscan.poses[i]);
    }
    return BScan(std::move(traces), std::move(poses), bscan.spacing);
}

void back_project_trace(const AScan& trace, const Pose& pose, double v,
                        const ScanFrame& frame, MigrationImage& target) {
    if (v <= 0.0) throw std::invalid_argument("back_project_trace: velocity must be positive");
    const double tx = frame.lateral_of(pose.position);
    const double band = target.dz / std::sqrt(2.0);
    const std::size_t m = trace.size();

    for (std::size_t j = 0; j < m; ++j) {
        const double a = std::abs(trace.samples[j]);
        if (a == 0.0) continue;
        const double r = v * trace.time_of(j) / 2.0;
        if (r < 0.0) continue;

        const double x_lo = tx - r - band;
        const double x_hi = tx + r + band;
        const long i_lo = std::max<long>(
            0, static_cast<long>(std::ceil((x_lo - target.origin_x) / target.dx - 1e-12)));
        const long i_hi = std::min<long>(
            static_cast<long>(target.cols) - 1,
            static_cast<long>(std::floor((x_hi - target.origin_x) / target.dx + 1e-12)));

        for (long i = i_lo; i <= i_hi; ++i) {
            const double dxc = target.origin_x + static_cast<double>(i) * target.dx - tx;
            const double outer = (r + band) * (r + band) - dxc * dxc;
            if (outer < 0.0) continue;
            const double d_hi = std::sqrt(outer);
            const double inner = (r - band) * (r - band) - dxc * dxc;
            const double d_lo = (r - band <= 0.0 || inner < 0.0) ? 0.0 : std::sqrt(inner);
            const long j_lo = std::max<long>(
                0, static_cast<long>(std::ceil((d_lo - target.origin_z) / target.dz - 1e-12)));
            const long j_hi = std::min<long>(
                static_cast<long>(target.rows) - 1,
                static_cast<long>(std::floor((d_hi - target.origin_z) / target.dz + 1e-12)));
            for (long jj = j_lo; jj <= j_hi; ++jj) {
                const double depth = target.origin_z + static_cast<double>(jj) * target.dz;
                const double dist = std::sqrt(dxc * dxc + depth * depth);
                if (std::abs(dist - r) <= band)
                    target.at(static_cast<std::size_t>(jj), static_cast<std::size_t>(i)) += a;
            }
        }
    }
}

MigrationImage back_project_all(const BScan& bscan, double v,
                                const GridSpec& grid) {
    MigrationImage img = grid.make_image();
    const ScanFrame frame = bscan.trace_count() >= 2
                                ? ScanFrame::from_poses(bscan.poses)
                                : ScanFrame{bscan.poses.front().position, {1, 0, 0}};
    // Per-trace accumulators merged in trace-index order; the result is
    // bit-identical however the per-trace work is scheduled.
    MigrationImage scratch = grid.make_image();
    for (std::size_t i = 0; i < bscan.trace_count(); ++i) {
        std::fill(scratch.data.begin(), scratch.data.end(), 0.0);
        back_project_trace(bscan.traces[i], bscan.poses[i], v, frame, scratch);
        for (std::size_t k = 0; k < img.data.size(); ++k)
            img.data[k] += scratch.data[k];
    }
    return img;
}

StackedBpInput aggregate_bp(const BScan& window, double v, const GridSpec& grid) {
    const std::size_t n = window.trace_count();
    if (n < 64)
        throw std::invalid_argument("aggregate_bp: window shorter than 64 traces");
    static constexpr std::size_t kResolutions[3] = {256, 128, 64};
    StackedBpInput out;
    out.window_begin = 0;
    out.window_end = n;
    for (int c = 0; c < 3; ++c) {
        const std::size_t n_hat = std::min(kResolutions[c], n);
        const BScan sampled = sparse_sample(window, n_hat);
        out.channels[c] = max_normalize(back_project_all(sampled, v, grid));
    }
    return out;
}

MigrationImage hilbert_envelope(const MigrationImage& img) {
    if (img.rows < 4)
        throw std::invalid_argument("hilbert_envelope: need at least 4 rows");
    MigrationImage out = img;
    std::vector<double> column(img.rows);
    for (std::size_t i = 0; i < img.cols; ++i) {
        for (std::size_t j = 0; j < img.rows; ++j) column[j] = img.at(j, i);
        const std::vector<double> env = dsp::envelope(column);
        for (std::size_t j = 0; j < img.rows; ++j) out.at(j, i) = env[j];
    }
    return out;
}

MigrationImage max_normalize(const MigrationImage& img) {
    double peak = 0.0;
    for (double vv : img.data) peak = std::max(peak, std::abs(vv));
    MigrationImage out = img;
    if (peak > 0.0)
        for (double& vv : out.data) vv /= peak;
    return out;
}

CrossSectionMask binarize(const MigrationImage& img, double threshold) {
    for (double vv : img.data)
        if (!(vv >= 0.0 && vv <= 1.0))
            throw std::invalid_argument("binarize: image must be normalized to [0, 1]");
    CrossSectionMask mask(img.rows, img.cols, img.dx, img.dz, img.origin_x,
                          img.origin_z);
    for (std::size_t k = 0; k < img.data.size(); ++k)
        mask.data[k] = img.data[k] > threshold ? 1 : 0;
    return mask;
}

namespace {

void require_same_dims(std::size_t r1, std::size_t c1, std::size_t r2,
                       std::size_t c2, const char* who) {
    if (r1 != r2 || c1 != c2)
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

double iou(const CrossSectionMask& pred, const CrossSectionMask& truth) {
    require_same_dims(pred.rows, pred.cols, truth.rows, truth.cols, "iou");
    std::size_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < pred.data.size(); ++k) {
        const bool p = pred.data[k] != 0;
        const bool t = truth.data[k] != 0;
        inter += (p && t);
        uni += (p || t);
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double pixel_accuracy(const CrossSectionMask& pred, const CrossSectionMask& truth) {
    require_same_dims(pred.rows, pred.cols, truth.rows, truth.cols, "pixel_accuracy");
    std::size_t match = 0;
    for (std::size_t k = 0; k < pred.data.size(); ++k)
        match += ((pred.data[k] != 0) == (truth.data[k] != 0));
    return static_cast<double>(match) / static_cast<double>(pred.data.size());
}

double mse(const MigrationImage& x, const MigrationImage& y) {
    require_same_dims(x.rows, x.cols, y.rows, y.cols, "mse");
    double acc = 0.0;
    for (std::size_t k = 0; k < x.data.size(); ++k) {
        const double d = x.data[k] - y.data[k];
        acc += d * d;
    }
    return acc / static_cast<double>(x.data.size());
}

double rmse_image(const MigrationImage& x, const MigrationImage& y) {
    return std::sqrt(mse(x, y));
}

double snr_db(const MigrationImage& x, const MigrationImage& y) {
    require_same_dims(x.rows, x.cols, y.rows, y.cols, "snr_db");
    double signal = 0.0, noise = 0.0;
    for (std::size_t k = 0; k < x.data.size(); ++k) {
        signal += y.data[k] * y.data[k];
        const double d = x.data[k] - y.data[k];
        noise += d * d;
    }
    if (noise == 0.0) throw std::domain_error("snr_db: infinite SNR (X equals Y)");
    return 10.0 * std::log10(signal / noise);
}

double ssim(const MigrationImage& x, const MigrationImage& y, double c1,
            double c2) {
    require_same_dims(x.rows, x.cols, y.rows, y.cols, "ssim");
    if (c1 <= 0.0 || c2 <= 0.0)
        throw std::invalid_argument("ssim: stabilizers must be positive");
    const double n = static_cast<double>(x.data.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.data.size(); ++k) {
        mx += x.data[k];
        my += y.data[k];
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t k = 0; k < x.data.size(); ++k) {
        const double ax = x.data[k] - mx;
        const double ay = y.data[k] - my;
        vx += ax * ax;
        vy += ay * ay;
        cov += ax * ay;
    }
    vx /= (n - 1.0);
    vy /= (n - 1.0);
    cov /= (n - 1.0);
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

MigrationImage mask_to_image(const CrossSectionMask& mask) {
    MigrationImage img(mask.rows, mask.cols, mask.dx, mask.dz, mask.origin_x,
                       mask.origin_z);
    for (std::size_t k = 0; k < mask.data.size(); ++k)
        img.data[k] = mask.data[k] ? 1.0 : 0.0;
    return img;
}

}  // namespace gpr
