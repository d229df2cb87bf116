#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mbdf/geometry.hpp"

namespace mbdf {

/// Per-point attention scores, each in (0, 1).
using AttentionScores = std::vector<double>;

struct SamplerConfig {
    std::size_t n = 1;
    double lambda = 1.0;
    std::size_t seed_index = 0;
};

/// Greedy farthest point sampling from `seed_index`. Returns `n` indices in
/// selection order; distance ties go to the lower index.
std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t n,
                                                 std::size_t seed_index = 0);

/// Number of FPS candidates drawn for a given lambda: ceil(lambda * n),
/// capped at the cloud size.
std::size_t candidate_count(std::size_t cloud_size, std::size_t n, double lambda);

/// Attention-guided hybrid sampling. FPS first draws ceil(lambda * n)
/// well-spread candidates; the n candidates with the highest attention are
/// kept, in descending score order (ties to the lower index).
std::vector<std::size_t> hybrid_sample(const PointCloud& cloud, std::span<const double> attention,
                                       const SamplerConfig& cfg);

struct AadResult {
    std::vector<double> per_point;
    double mean = 0.0;
};

/// Average aggregation distance of the sampled subset: for each sampled point,
/// the mean squared distance to its three nearest sampled neighbours. With
/// `root` set, plain (square-rooted) distances are averaged instead.
AadResult aad(const PointCloud& cloud, std::span<const std::size_t> sampled, bool root = false);

struct SweepRow {
    double lambda = 0.0;
    double mean_aad = 0.0;
    std::vector<std::size_t> sampled;
};

/// One hybrid_sample + aad run per lambda, rows sorted by lambda.
std::vector<SweepRow> lambda_sweep(const PointCloud& cloud, std::span<const double> attention,
                                   std::size_t n, std::span<const double> lambdas,
                                   std::size_t seed_index = 0);

}  // namespace mbdf
