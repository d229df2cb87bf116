#include <algorithm>

#include <gtest/gtest.h>

#include "mbdf/errors.hpp"
#include "mbdf/random.hpp"
#include "mbdf/roi.hpp"
#include "oracles.hpp"

namespace mbdf {
namespace {

TEST(SelectProposals, Defaults) {
    const ProposalSelection d;
    EXPECT_EQ(d.pre_nms_top, 8000u);
    EXPECT_EQ(d.nms_threshold, 0.8);
    EXPECT_EQ(d.keep, 64u);
    const RoIPooling r;
    EXPECT_EQ(r.enlarge, 0.2);
    EXPECT_EQ(r.n_points, 512u);
}

TEST(SelectProposals, OverlappingTripleCollapses) {
    const Box3D base({0, 0, 10}, 4, 1.5, 1.6, 0.2);
    const std::vector<Proposal> props{
        {base, 0.7},
        {Box3D({0.05, 0, 10}, 4, 1.5, 1.6, 0.2), 0.9},
        {Box3D({0, 0, 10.02}, 4, 1.5, 1.6, 0.21), 0.8},
    };
    std::vector<Box3D> boxes;
    std::vector<double> scores;
    for (const auto& p : props) {
        boxes.push_back(p.box);
        scores.push_back(p.score);
    }
    const auto expected = oracle::nms(boxes, scores, 0.8, iou_bev);
    ASSERT_EQ(expected, (std::vector<std::size_t>{1}));
    const auto out = select_proposals(props);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].score, 0.9);
    EXPECT_EQ(out[0].box, props[1].box);
}

TEST(SelectProposals, ShortListsPassThroughAndTruncation) {
    Rng rng(3);
    std::vector<Proposal> props;
    for (int i = 0; i < 10; ++i) {
        props.push_back({Box3D({10.0 * i, 0, 0}, 2, 1, 1, 0), rng.uniform()});
    }
    const auto all = select_proposals(props);
    EXPECT_EQ(all.size(), 10u);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end(),
                               [](const Proposal& a, const Proposal& b) { return a.score > b.score; }));
    EXPECT_EQ(select_proposals(props, {8000, 0.8, 4}).size(), 4u);
    EXPECT_EQ(select_proposals(props, {3, 0.8, 64}).size(), 3u);
    EXPECT_TRUE(select_proposals(std::vector<Proposal>{}).empty());
}

PointCloud grid_cloud() {
    PointCloud c;
    for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
            for (int k = -3; k <= 3; ++k) c.points.push_back({0.2 * i, 0.2 * k, 0.2 * j});
        }
    }
    return c;
}

Matrix index_features(std::size_t n, std::size_t cols, double offset) {
    Matrix m(n, cols);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = offset + static_cast<double>(r) + 0.1 * c;
    }
    return m;
}

TEST(RoiPooledFusion, TwoPointPadding) {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {0.3, 0.1, -0.2}, {5, 5, 5}};
    const Matrix fi = index_features(3, 2, 100);
    const Matrix fp = index_features(3, 1, 200);
    const Matrix ff = index_features(3, 3, 300);
    const Proposal p{Box3D({0, 0, 0}, 1, 1, 1, 0), 0.9};
    const PooledRoI out = roi_pooled_fusion(p, cloud, fi, fp, ff, {}, 7);
    EXPECT_EQ(out.features.rows(), 512u);
    EXPECT_EQ(out.features.cols(), 3u + 2 + 1 + 3);
    EXPECT_EQ(out.valid_count, 2u);
    EXPECT_EQ(out.source_indices, (std::vector<std::size_t>{0, 1}));
    const std::vector<double> row1{0.3, 0.1, -0.2, 101, 101.1, 201, 301, 301.1, 301.2};
    for (std::size_t c = 0; c < row1.size(); ++c) EXPECT_DOUBLE_EQ(out.features(1, c), row1[c]);
    for (std::size_t r = 2; r < 512; ++r) {
        for (double v : out.features.row(r)) ASSERT_EQ(v, 0.0);
    }
}

TEST(RoiPooledFusion, MarginDecidesInclusion) {
    // Unit cube; a point 0.05 beyond the +x face.
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {0.55, 0, 0}};
    const Matrix f(2, 1);
    const Proposal p{Box3D({0, 0, 0}, 1, 1, 1, 0), 0.5};
    for (double a : {0.0, 0.05, 0.08, 0.1, 0.2}) {
        const auto out = roi_pooled_fusion(p, cloud, f, f, f, {a, 512}, 1);
        EXPECT_EQ(out.source_indices, points_in_box(cloud, enlarge_box(p.box, a))) << a;
        EXPECT_EQ(out.valid_count, a >= 0.1 ? 2u : 1u) << a;
    }
}

TEST(RoiPooledFusion, OverflowSubsamplingIsSeeded) {
    const PointCloud cloud = grid_cloud();  // 3087 points in a 4 x 1.2 x 4 block
    const std::size_t n = cloud.size();
    const Matrix f = index_features(n, 1, 0);
    const Proposal p{Box3D({0, 0, 0}, 3, 1, 3, 0.3), 0.5};
    const auto inside = points_in_box(cloud, enlarge_box(p.box, 0.2));
    ASSERT_GT(inside.size(), 512u);

    const auto a = roi_pooled_fusion(p, cloud, f, f, f, {}, 11);
    const auto b = roi_pooled_fusion(p, cloud, f, f, f, {}, 11);
    const auto c = roi_pooled_fusion(p, cloud, f, f, f, {}, 12);
    EXPECT_EQ(a.valid_count, 512u);
    EXPECT_EQ(a.features, b.features);
    EXPECT_NE(a.source_indices, c.source_indices);
    EXPECT_TRUE(std::includes(inside.begin(), inside.end(), a.source_indices.begin(),
                              a.source_indices.end()));
    for (std::size_t r = 0; r < a.valid_count; ++r) {
        const auto& pt = cloud.points[a.source_indices[r]];
        EXPECT_EQ(a.features(r, 0), pt.x);
        EXPECT_EQ(a.features(r, 1), pt.y);
        EXPECT_EQ(a.features(r, 2), pt.z);
    }
}

TEST(RoiPooledFusion, EmptyRegionAndShapeErrors) {
    PointCloud cloud;
    cloud.points = {{10, 10, 10}};
    const Matrix f(1, 2);
    const Proposal p{Box3D({0, 0, 0}, 1, 1, 1, 0), 0.5};
    const auto out = roi_pooled_fusion(p, cloud, f, f, f, {}, 0);
    EXPECT_EQ(out.valid_count, 0u);
    for (double v : out.features.values()) ASSERT_EQ(v, 0.0);
    EXPECT_THROW(roi_pooled_fusion(p, cloud, Matrix(2, 2), f, f, {}, 0), DimensionMismatch);
}

}  // namespace
}  // namespace mbdf
