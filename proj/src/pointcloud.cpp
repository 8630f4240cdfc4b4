#include "gpr/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpr {

PointCloud register_masks(const std::vector<CrossSectionMask>& masks,
                          const std::vector<std::vector<Pose>>& poses_per_mask) {
    if (masks.size() != poses_per_mask.size())
        throw std::invalid_argument("register_masks: mask/pose count mismatch");

    PointCloud cloud;
    for (std::size_t k = 0; k < masks.size(); ++k) {
        const CrossSectionMask& mask = masks[k];
        const std::vector<Pose>& poses = poses_per_mask[k];
        if (poses.size() < 2)
            throw std::invalid_argument("register_masks: need at least 2 poses per mask");
        const double idx_step =
            mask.cols > 1
                ? static_cast<double>(poses.size() - 1) / static_cast<double>(mask.cols - 1)
                : 0.0;
        for (std::size_t j = 0; j < mask.rows; ++j) {
            const double depth = mask.origin_z + static_cast<double>(j) * mask.dz;
            for (std::size_t i = 0; i < mask.cols; ++i) {
                if (!mask.at(j, i)) continue;
                const double f = idx_step * static_cast<double>(i);
                const std::size_t lo =
                    std::min(static_cast<std::size_t>(f), poses.size() - 2);
                const double alpha = f - static_cast<double>(lo);
                const Vec3 pos =
                    lerp(poses[lo].position, poses[lo + 1].position, alpha);
                cloud.points.push_back({pos.x, pos.y, -depth});
            }
        }
    }
    return cloud;
}

PointCloud ifps(const PointCloud& cloud, std::size_t k, std::size_t start_index) {
    const std::size_t n = cloud.size();
    if (n == 0) throw std::invalid_argument("ifps: empty cloud");
    if (k == 0 || k > n) throw std::invalid_argument("ifps: need 0 < k <= cloud size");
    if (start_index >= n) throw std::invalid_argument("ifps: start index out of range");

    PointCloud out;
    out.points.reserve(k);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::size_t current = start_index;
    for (std::size_t picked = 0; picked < k; ++picked) {
        out.points.push_back(cloud.points[current]);
        const Vec3 p = cloud.points[current];
        std::size_t best = 0;
        double best_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = (cloud.points[i] - p).squared_norm();
            if (d2 < min_d2[i]) min_d2[i] = d2;
            if (min_d2[i] > best_d2) {  // strict > keeps the lowest index on ties
                best_d2 = min_d2[i];
                best = i;
            }
        }
        current = best;
    }
    return out;
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("chamfer_distance: empty cloud");
    auto one_way = [](const PointCloud& from, const PointCloud& to) {
        double acc = 0.0;
        for (const Vec3& p : from.points) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : to.points)
                best = std::min(best, (p - q).squared_norm());
            acc += std::sqrt(best);
        }
        return acc / static_cast<double>(from.size());
    };
    return one_way(a, b) + one_way(b, a);
}

namespace {

// Shortest-augmenting-path assignment (Jonker-Volgenant style), exact.
// cost is n x n row-major; returns the minimal total cost.
double solve_assignment(const std::vector<double>& cost, std::size_t n) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0);
    std::vector<std::size_t> way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        while (j0 != 0) {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        }
    }
    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= n; ++j)
        if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + row_to_col[i]];
    return total;
}

// Forward auction with epsilon scaling; approximate for large clouds.
double auction_assignment(const std::vector<double>& cost, std::size_t n) {
    std::vector<double> price(n, 0.0);
    std::vector<long> owner(n, -1);
    std::vector<long> assigned(n, -1);
    double max_cost = 0.0;
    for (double c : cost) max_cost = std::max(max_cost, c);
    double eps = std::max(max_cost / 2.0, 1e-12);
    const double eps_min = std::max(max_cost, 1.0) / (8.0 * static_cast<double>(n));
    while (true) {
        std::fill(owner.begin(), owner.end(), -1);
        std::fill(assigned.begin(), assigned.end(), -1);
        std::vector<std::size_t> queue(n);
        for (std::size_t i = 0; i < n; ++i) queue[i] = i;
        while (!queue.empty()) {
            const std::size_t i = queue.back();
            queue.pop_back();
            // bid on the best-value object (value = -cost - price)
            double best = -std::numeric_limits<double>::infinity();
            double second = best;
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double val = -cost[i * n + j] - price[j];
                if (val > best) {
                    second = best;
                    best = val;
                    best_j = j;
                } else if (val > second) {
                    second = val;
                }
            }
            const double bid = best - second + eps;
            price[best_j] += bid;
            if (owner[best_j] >= 0) {
                assigned[static_cast<std::size_t>(owner[best_j])] = -1;
                queue.push_back(static_cast<std::size_t>(owner[best_j]));
            }
            owner[best_j] = static_cast<long>(i);
            assigned[i] = static_cast<long>(best_j);
        }
        if (eps <= eps_min) break;
        eps /= 4.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        total += cost[i * n + static_cast<std::size_t>(assigned[i])];
    return total;
}

PointCloud pad_to(const PointCloud& small, const PointCloud& large,
                  std::size_t target) {
    PointCloud out = small;
    out.points.reserve(target);
    std::size_t k = 0;
    while (out.points.size() < target) {
        const Vec3& q = large.points[k % large.size()];
        double best = std::numeric_limits<double>::infinity();
        Vec3 best_p = small.points.front();
        for (const Vec3& p : small.points) {
            const double d2 = (p - q).squared_norm();
            if (d2 < best) {
                best = d2;
                best_p = p;
            }
        }
        out.points.push_back(best_p);
        ++k;
    }
    return out;
}

}  // namespace

EmdResult emd(const PointCloud& pred, const PointCloud& truth) {
    if (pred.empty() || truth.empty())
        throw std::invalid_argument("emd: empty cloud");

    const PointCloud* a = &pred;
    const PointCloud* b = &truth;
    PointCloud padded;
    if (a->size() != b->size()) {
        const PointCloud& small = a->size() < b->size() ? *a : *b;
        const PointCloud& large = a->size() < b->size() ? *b : *a;
        padded = pad_to(small, large, large.size());
        a = &padded;
        b = &large;
    }

    const std::size_t n = a->size();
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i * n + j] = (a->points[i] - b->points[j]).norm();

    EmdResult out;
    if (n <= 256) {
        out.value = solve_assignment(cost, n) / static_cast<double>(n);
        out.exact = true;
    } else {
        out.value = auction_assignment(cost, n) / static_cast<double>(n);
        out.exact = false;
    }
    return out;
}

double l1_centroid(const PointCloud& pred, const PointCloud& truth) {
    if (pred.empty() || truth.empty())
        throw std::invalid_argument("l1_centroid: empty cloud");
    auto spread = [](const PointCloud& c) {
        Vec3 centroid;
        for (const Vec3& p : c.points) centroid += p;
        centroid = centroid / static_cast<double>(c.size());
        double acc = 0.0;
        for (const Vec3& p : c.points) acc += (p - centroid).norm();
        return acc / static_cast<double>(c.size());
    };
    return std::abs(spread(pred) - spread(truth));
}

}  // namespace gpr
