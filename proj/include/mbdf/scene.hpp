#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mbdf/geometry.hpp"
#include "mbdf/sampling.hpp"

namespace mbdf {

/// Clustered test scene: Gaussian blobs inside ground-truth cubes over a
/// sparse uniform background. Defaults are the standard sampling-study scene.
struct SyntheticSceneSpec {
    std::size_t clusters = 4;
    std::size_t points_per_cluster = 200;
    double cluster_radius = 0.5;
    std::size_t background_points = 800;
    double background_extent = 40.0;
    double attention_contrast = 0.6;
    std::uint64_t seed = 42;
};

struct SyntheticScene {
    PointCloud cloud;  // cluster points first, cluster by cluster, then background
    AttentionScores attention;
    std::vector<bool> foreground;
    std::vector<Box3D> boxes;  // one per cluster
};

/// Background is uniform over x in [-E/2, E/2], z in [0, E], y in [-1, 1].
/// Cluster points are normal with sigma = radius / 2, redrawn until within
/// `radius` of the cluster center; each box is a cube of side 2 * radius with
/// random yaw, so it contains its whole cluster.
SyntheticScene generate_scene(const SyntheticSceneSpec& spec);

}  // namespace mbdf
