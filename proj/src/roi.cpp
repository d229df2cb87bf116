#include "mbdf/roi.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mbdf/errors.hpp"
#include "mbdf/random.hpp"

namespace mbdf {

std::vector<Proposal> select_proposals(std::span<const Proposal> proposals,
                                       const ProposalSelection& cfg) {
    std::vector<std::size_t> order(proposals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return proposals[a].score > proposals[b].score;
    });
    order.resize(std::min(order.size(), cfg.pre_nms_top));

    std::vector<Box3D> boxes;
    std::vector<double> scores;
    boxes.reserve(order.size());
    scores.reserve(order.size());
    for (auto i : order) {
        boxes.push_back(proposals[i].box);
        scores.push_back(proposals[i].score);
    }
    const auto kept = nms(boxes, scores, cfg.nms_threshold);

    std::vector<Proposal> out;
    for (std::size_t k = 0; k < kept.size() && out.size() < cfg.keep; ++k) {
        out.push_back(proposals[order[kept[k]]]);
    }
    return out;
}

PooledRoI roi_pooled_fusion(const Proposal& proposal, const PointCloud& cloud,
                            const Matrix& f_image, const Matrix& f_point, const Matrix& f_fused,
                            const RoIPooling& cfg, std::uint64_t seed) {
    const std::size_t n = cloud.size();
    if (f_image.rows() != n || f_point.rows() != n || f_fused.rows() != n) {
        throw DimensionMismatch("roi_pooled_fusion: feature rows must equal the " +
                                std::to_string(n) + "-point cloud");
    }
    const Box3D region = enlarge_box(proposal.box, cfg.enlarge);
    std::vector<std::size_t> inside = points_in_box(cloud, region);
    if (inside.size() > cfg.n_points) {
        Rng rng(seed);
        const auto pick = rng.sample_without_replacement(inside.size(), cfg.n_points);
        std::vector<std::size_t> chosen;
        chosen.reserve(pick.size());
        for (auto k : pick) chosen.push_back(inside[k]);
        inside = std::move(chosen);
    }

    const std::size_t ci = f_image.cols();
    const std::size_t cp = f_point.cols();
    const std::size_t cf = f_fused.cols();
    PooledRoI out{Matrix(cfg.n_points, 3 + ci + cp + cf), inside.size(), std::move(inside)};
    for (std::size_t r = 0; r < out.valid_count; ++r) {
        const std::size_t src = out.source_indices[r];
        auto row = out.features.row(r);
        const Point3& p = cloud.points[src];
        row[0] = p.x;
        row[1] = p.y;
        row[2] = p.z;
        auto it = row.begin() + 3;
        it = std::copy(f_image.row(src).begin(), f_image.row(src).end(), it);
        it = std::copy(f_point.row(src).begin(), f_point.row(src).end(), it);
        std::copy(f_fused.row(src).begin(), f_fused.row(src).end(), it);
    }
    return out;
}

}  // namespace mbdf
