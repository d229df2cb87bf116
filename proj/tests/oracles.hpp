#pragma once

// Brute-force reference implementations used only by tests. They share no
// code paths with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mbdf/geometry.hpp"
#include "mbdf/random.hpp"

namespace mbdf::oracle {

// Greedy FPS recomputing every point's distance to the whole chosen set at
// each step: O(N^2 * n).
inline std::vector<std::size_t> fps(const PointCloud& cloud, std::size_t n, std::size_t seed) {
    std::vector<std::size_t> chosen{seed};
    while (chosen.size() < n) {
        std::size_t best = cloud.size();
        double best_d = -1.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            double d = std::numeric_limits<double>::infinity();
            for (auto c : chosen) {
                const auto& a = cloud.points[i];
                const auto& b = cloud.points[c];
                d = std::min(d, std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                                          (a.z - b.z) * (a.z - b.z)));
            }
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        chosen.push_back(best);
    }
    return chosen;
}

// Exhaustive ranking of `candidates` by (score desc, index asc).
inline std::vector<std::size_t> top_by_score(std::vector<std::size_t> candidates,
                                             std::span<const double> scores, std::size_t n) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            const auto a = candidates[i];
            const auto b = candidates[j];
            if (scores[b] > scores[a] || (scores[b] == scores[a] && b < a)) {
                std::swap(candidates[i], candidates[j]);
            }
        }
    }
    candidates.resize(n);
    return candidates;
}

// Containment via the four footprint half-planes built from explicit corners
// plus the vertical slab.
inline bool inside(const Box3D& b, const Point3& p) {
    const double c = std::cos(b.yaw());
    const double s = std::sin(b.yaw());
    // Box axes in (x, z): length direction and width direction.
    const double lx = c, lz = -s;
    const double wx = s, wz = c;
    const double dx = p.x - b.center().x;
    const double dz = p.z - b.center().z;
    const double along_l = dx * lx + dz * lz;
    const double along_w = dx * wx + dz * wz;
    return std::abs(along_l) <= b.l() / 2.0 + 1e-12 && std::abs(along_w) <= b.w() / 2.0 + 1e-12 &&
           std::abs(p.y - b.center().y) <= b.h() / 2.0 + 1e-12;
}

// World position of the local box coordinate (u, v, t) in [-1/2, 1/2]^3.
inline Point3 local_to_world(const Box3D& b, double u, double v, double t) {
    const double c = std::cos(b.yaw());
    const double s = std::sin(b.yaw());
    const double lx = u * b.l();
    const double lz = t * b.w();
    return {b.center().x + c * lx + s * lz, b.center().y + v * b.h(),
            b.center().z - s * lx + c * lz};
}

// Monte-Carlo overlap estimate: jittered stratified samples inside box a,
// counting those that also fall in b. `bev` ignores height.
inline double mc_iou(const Box3D& a, const Box3D& b, bool bev, std::size_t samples, Rng& rng) {
    std::size_t hits = 0;
    std::size_t total = 0;
    if (bev) {
        const auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(samples)));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const double u = (static_cast<double>(i) + rng.uniform()) / k - 0.5;
                const double t = (static_cast<double>(j) + rng.uniform()) / k - 0.5;
                Point3 p = local_to_world(a, u, 0.0, t);
                p.y = b.center().y;
                hits += inside(b, p) ? 1 : 0;
                ++total;
            }
        }
        const double va = a.l() * a.w();
        const double vb = b.l() * b.w();
        const double inter = va * static_cast<double>(hits) / static_cast<double>(total);
        return inter / (va + vb - inter);
    }
    const auto k = static_cast<std::size_t>(std::cbrt(static_cast<double>(samples)));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t m = 0; m < k; ++m) {
                const double u = (static_cast<double>(i) + rng.uniform()) / k - 0.5;
                const double v = (static_cast<double>(j) + rng.uniform()) / k - 0.5;
                const double t = (static_cast<double>(m) + rng.uniform()) / k - 0.5;
                hits += inside(b, local_to_world(a, u, v, t)) ? 1 : 0;
                ++total;
            }
        }
    }
    const double va = a.volume();
    const double vb = b.volume();
    const double inter = va * static_cast<double>(hits) / static_cast<double>(total);
    return inter / (va + vb - inter);
}

// NMS by definition: a box survives iff no surviving box ahead of it in
// (score desc, index asc) order overlaps it beyond the threshold.
template <typename IouFn>
std::vector<std::size_t> nms(std::span<const Box3D> boxes, std::span<const double> scores,
                             double threshold, IouFn iou) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    order = top_by_score(order, scores, order.size());
    std::vector<std::size_t> kept;
    for (auto i : order) {
        bool ok = true;
        for (auto k : kept) ok = ok && !(iou(boxes[k], boxes[i]) > threshold);
        if (ok) kept.push_back(i);
    }
    return kept;
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double extent = 10.0) {
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) {
        c.points.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                            rng.uniform(-extent, extent)});
    }
    return c;
}

inline Box3D random_box(Rng& rng, double spread = 1.5) {
    return {{rng.uniform(-spread, spread), rng.uniform(-0.5, 0.5), rng.uniform(-spread, spread)},
            rng.uniform(0.5, 4.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.5),
            rng.uniform(-3.2, 3.2)};
}

}  // namespace mbdf::oracle
