#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mbdf/geometry.hpp"
#include "mbdf/numerics.hpp"

namespace mbdf {

struct Proposal {
    Box3D box;
    double score = 0.0;
};

struct ProposalSelection {
    std::size_t pre_nms_top = 8000;
    double nms_threshold = 0.8;
    std::size_t keep = 64;
};

/// Sort by score (ties to the lower index), keep the top `pre_nms_top`, run
/// NMS, keep the first `keep` survivors.
std::vector<Proposal> select_proposals(std::span<const Proposal> proposals,
                                       const ProposalSelection& cfg = {});

struct RoIPooling {
    double enlarge = 0.2;
    std::size_t n_points = 512;
};

/// Fixed-size stage-2 input for one proposal. Row layout is
/// [x, y, z | image features | point features | fused features]; valid rows
/// come first, the rest are zero.
struct PooledRoI {
    Matrix features;
    std::size_t valid_count = 0;
    std::vector<std::size_t> source_indices;  // one per valid row
};

PooledRoI roi_pooled_fusion(const Proposal& proposal, const PointCloud& cloud,
                            const Matrix& f_image, const Matrix& f_point, const Matrix& f_fused,
                            const RoIPooling& cfg, std::uint64_t seed);

}  // namespace mbdf
