#include "mbdf/scene.hpp"

#include <cmath>
#include <numbers>

#include "mbdf/errors.hpp"
#include "mbdf/random.hpp"

namespace mbdf {

namespace {

constexpr double kBackgroundHalfHeight = 1.0;

double distance_xz(const Point3& a, const Point3& b) {
    return std::hypot(a.x - b.x, a.z - b.z);
}

}  // namespace

SyntheticScene generate_scene(const SyntheticSceneSpec& spec) {
    if (spec.clusters == 0 || spec.points_per_cluster == 0 || !(spec.cluster_radius > 0.0) ||
        !(spec.background_extent > 0.0)) {
        throw InvalidArgument("scene spec needs positive counts and extents");
    }
    if (!(spec.attention_contrast >= 0.0 && spec.attention_contrast < 1.0)) {
        throw InvalidArgument("attention contrast must lie in [0, 1)");
    }
    const double half = spec.background_extent / 2.0;
    const double margin = 2.0 * spec.cluster_radius;
    if (half <= margin) {
        throw InvalidArgument("background extent too small for the cluster radius");
    }

    Rng rng(spec.seed);
    SyntheticScene scene;
    const double fg_score = 0.5 + spec.attention_contrast / 2.0;
    const double bg_score = 0.5 - spec.attention_contrast / 2.0;

    // Cluster centers, kept apart so boxes never overlap.
    std::vector<Point3> centers;
    const double min_gap = 4.0 * spec.cluster_radius;
    for (std::size_t attempts = 0; centers.size() < spec.clusters; ++attempts) {
        if (attempts > 100000) {
            throw InvalidArgument("cannot place non-overlapping clusters in the extent");
        }
        const Point3 c{rng.uniform(-half + margin, half - margin), 0.0,
                       rng.uniform(margin, spec.background_extent - margin)};
        bool clear = true;
        for (const auto& other : centers) clear = clear && distance_xz(c, other) >= min_gap;
        if (clear) centers.push_back(c);
    }

    const double sigma = spec.cluster_radius / 2.0;
    for (const auto& c : centers) {
        const double side = 2.0 * spec.cluster_radius;
        scene.boxes.emplace_back(c, side, side, side, rng.uniform(-std::numbers::pi, std::numbers::pi));
        for (std::size_t k = 0; k < spec.points_per_cluster; ++k) {
            Point3 p;
            double r2;
            do {
                p = {sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
                r2 = p.x * p.x + p.y * p.y + p.z * p.z;
            } while (r2 > spec.cluster_radius * spec.cluster_radius);
            scene.cloud.points.push_back({c.x + p.x, c.y + p.y, c.z + p.z});
            scene.attention.push_back(fg_score);
            scene.foreground.push_back(true);
        }
    }
    for (std::size_t k = 0; k < spec.background_points; ++k) {
        scene.cloud.points.push_back({rng.uniform(-half, half),
                                      rng.uniform(-kBackgroundHalfHeight, kBackgroundHalfHeight),
                                      rng.uniform(0.0, spec.background_extent)});
        scene.attention.push_back(bg_score);
        scene.foreground.push_back(false);
    }
    scene.cloud.intensity.assign(scene.cloud.size(), 0.0);
    return scene;
}

}  // namespace mbdf
