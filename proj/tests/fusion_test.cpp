#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mbdf/errors.hpp"
#include "mbdf/fusion.hpp"
#include "mbdf/gradcheck.hpp"

namespace mbdf {
namespace {

const AAFShape kSmall{1, 1, 1, 1};

TEST(AafForward, ZeroParameters) {
    Rng rng(1);
    const AAFShape shape{2, 3, 2, 4};
    const AAFInput in = random_aaf_input(shape, 5, rng);
    const AAFOutput out = aaf_forward(AAFParams::zeros(shape), in);
    for (double a : out.att_image) EXPECT_EQ(a, 0.5);
    for (double a : out.att_point) EXPECT_EQ(a, 0.5);
    for (double v : out.f_fused.values()) EXPECT_EQ(v, 0.0);
}

TEST(AafForward, ClosedGatesPassPreviousFusion) {
    Rng rng(2);
    const AAFShape shape{2, 2, 3, 3};
    const AAFInput in = random_aaf_input(shape, 4, rng);
    AAFParams p = AAFParams::zeros(shape);
    p.b_image = {-60.0};
    p.b_point = {-60.0};
    // Identity on the concatenation, restricted to the last three inputs.
    for (std::size_t j = 0; j < 3; ++j) p.w_out(4 + j, j) = 1.0;
    // Also route image/point inputs so a leak through the gates would show.
    p.w_out(0, 0) = 1.0;
    p.w_out(2, 1) = 1.0;
    const AAFOutput out = aaf_forward(p, in);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_NEAR(out.f_fused(r, c), in.f_fused_prev(r, c), 1e-20);
        }
    }
}

TEST(AafForward, HandTrace) {
    // N = 2, one channel each.
    AAFParams p;
    p.w_image = {{0.5}, {-1.0}};
    p.b_image = {0.25};
    p.w_point = {{2.0}, {1.0}};
    p.b_point = {-0.5};
    p.w_out = {{1.0}, {2.0}, {-1.0}};
    p.b_out = {0.1};
    const AAFInput in{{{1.0}, {-2.0}}, {{0.5}, {1.0}}, {{3.0}, {0.0}}};
    const AAFOutput out = aaf_forward(p, in);

    // Row 0: z_I = 0.5 - 0.5 + 0.25 = 0.25; z_P = 2 + 0.5 - 0.5 = 2.
    // Row 1: z_I = -1 - 1 + 0.25 = -1.75; z_P = -4 + 1 - 0.5 = -3.5.
    const double ai0 = 1.0 / (1.0 + std::exp(-0.25));
    const double ap0 = 1.0 / (1.0 + std::exp(-2.0));
    const double ai1 = 1.0 / (1.0 + std::exp(1.75));
    const double ap1 = 1.0 / (1.0 + std::exp(3.5));
    EXPECT_NEAR(out.att_image[0], ai0, 1e-15);
    EXPECT_NEAR(out.att_point[0], ap0, 1e-15);
    EXPECT_NEAR(out.att_image[1], ai1, 1e-15);
    EXPECT_NEAR(out.att_point[1], ap1, 1e-15);
    EXPECT_NEAR(out.f_fused(0, 0), 1.0 * ai0 + 2.0 * 0.5 * ap0 - 3.0 + 0.1, 1e-14);
    EXPECT_NEAR(out.f_fused(1, 0), -2.0 * ai1 + 2.0 * 1.0 * ap1 - 0.0 + 0.1, 1e-14);
}

TEST(AafForward, ShapeErrors) {
    Rng rng(3);
    const AAFInput in = random_aaf_input(kSmall, 2, rng);
    AAFParams p = AAFParams::zeros({2, 1, 1, 1});
    EXPECT_THROW(aaf_forward(p, in), DimensionMismatch);
    AAFInput ragged = in;
    ragged.f_point = Matrix(3, 1);
    EXPECT_THROW(aaf_forward(AAFParams::zeros(kSmall), ragged), DimensionMismatch);
}

TEST(AafForward, AttentionStaysInsideUnitIntervalForHugeInputs) {
    Rng rng(4);
    const AAFShape shape{3, 3, 2, 2};
    for (int trial = 0; trial < 20; ++trial) {
        const AAFParams p = random_aaf_params(shape, rng, 1.0);
        const AAFInput in = random_aaf_input(shape, 4, rng, 1e3);
        const AAFOutput out = aaf_forward(p, in);
        for (double a : out.att_image) {
            EXPECT_GT(a, 0.0);
            EXPECT_LT(a, 1.0);
        }
        for (double a : out.att_point) {
            EXPECT_GT(a, 0.0);
            EXPECT_LT(a, 1.0);
        }
        for (double v : out.f_fused.values()) EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(AafForward, PermutationEquivariant) {
    Rng rng(5);
    const AAFShape shape{2, 2, 2, 3};
    const AAFParams p = random_aaf_params(shape, rng);
    const AAFInput in = random_aaf_input(shape, 4, rng);
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    auto permute = [&](const Matrix& m) {
        Matrix out(m.rows(), m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(perm[r], c);
        }
        return out;
    };
    const AAFOutput a = aaf_forward(p, in);
    const AAFOutput b = aaf_forward(p, {permute(in.f_image), permute(in.f_point), permute(in.f_fused_prev)});
    EXPECT_EQ(b.f_fused, permute(a.f_fused));
    for (std::size_t r = 0; r < perm.size(); ++r) {
        EXPECT_EQ(b.att_image[r], a.att_image[perm[r]]);
        EXPECT_EQ(b.att_point[r], a.att_point[perm[r]]);
    }
}

TEST(AafForward, ImageGateIsContinuousAtZeroFeatures) {
    Rng rng(6);
    const AAFShape shape{2, 2, 1, 2};
    const AAFParams p = random_aaf_params(shape, rng, 1.0);
    AAFInput in = random_aaf_input(shape, 3, rng);
    AAFInput zeroed = in;
    for (std::size_t c = 0; c < 2; ++c) {
        in.f_image(1, c) *= 1e-8;
        zeroed.f_image(1, c) = 0.0;
    }
    const AAFOutput scaled = aaf_forward(p, in);
    const AAFOutput limit = aaf_forward(p, zeroed);
    for (std::size_t c = 0; c < 2; ++c) {
        EXPECT_NEAR(scaled.f_fused(1, c), limit.f_fused(1, c), 1e-7);
    }
}

TEST(AafBackward, ZeroUpstreamAndBiasGradient) {
    Rng rng(7);
    const AAFShape shape{2, 3, 2, 2};
    const AAFParams p = random_aaf_params(shape, rng);
    const AAFInput in = random_aaf_input(shape, 4, rng);
    const AAFGradients zero = aaf_backward(p, in, Matrix(4, 2));
    for (const Matrix* m : {&zero.params.w_image, &zero.params.w_point, &zero.params.w_out,
                            &zero.input.f_image, &zero.input.f_point, &zero.input.f_fused_prev}) {
        for (double v : m->values()) EXPECT_EQ(v, 0.0);
    }
    const Matrix up{{1, 2}, {3, 4}, {-1, 0.5}, {0, 0}};
    const AAFGradients g = aaf_backward(p, in, up);
    EXPECT_DOUBLE_EQ(g.params.b_out[0], 3.0);
    EXPECT_DOUBLE_EQ(g.params.b_out[1], 6.5);
    EXPECT_THROW(aaf_backward(p, in, Matrix(4, 3)), DimensionMismatch);
}

TEST(AafBackward, MatchesFiniteDifferences) {
    const GradcheckReport r = run_aaf_gradcheck({.seed = 12345, .instances = 25});
    ASSERT_EQ(r.groups.size(), 9u);
    for (const auto& g : r.groups) {
        EXPECT_GT(g.entries, 0u) << g.name;
        EXPECT_LT(g.max_relative_error, 1e-5) << g.name;
    }
}

TEST(MakeFusionInput, GathersImageFeatures) {
    ImageFeatureMap map(2, 2, 1);
    map.at(0, 0)[0] = 1.0;
    map.at(0, 1)[0] = 2.0;
    map.at(1, 0)[0] = 3.0;
    map.at(1, 1)[0] = 4.0;
    PointCloud cloud;
    cloud.points = {{1, 0, 1}, {0, 0, -1}, {0.5, 0.5, 1}};
    const Matrix f_point{{1}, {2}, {3}};
    const Matrix f_prev{{4, 5}, {6, 7}, {8, 9}};
    const AAFInput in = make_fusion_input(cloud, ProjectionMatrix{}, map, f_point, f_prev);
    EXPECT_EQ(in.f_image, (Matrix{{2}, {0}, {2.5}}));
    EXPECT_EQ(in.f_point, f_point);
    EXPECT_EQ(in.f_fused_prev, f_prev);

    PointCloud hidden;
    hidden.points = {{0, 0, -1}, {5, 5, -2}};
    const AAFInput none = make_fusion_input(hidden, ProjectionMatrix{}, map, Matrix(2, 1), Matrix(2, 1));
    for (double v : none.f_image.values()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(make_fusion_input(hidden, ProjectionMatrix{}, map, Matrix(3, 1), Matrix(2, 1)),
                 DimensionMismatch);
}

TEST(AafParams, BinaryRoundTripAndLayout) {
    Rng rng(8);
    const AAFShape shape{2, 3, 1, 2};
    const AAFParams p = random_aaf_params(shape, rng);
    std::stringstream buf;
    write_aaf_params(buf, p, shape.image_channels);
    const std::string bytes = buf.str();
    const std::size_t values = 5 * 1 + 1 + 5 * 1 + 1 + 6 * 2 + 2;
    ASSERT_EQ(bytes.size(), 5 * 4 + values * 8);
    // Header: little-endian u32 counts.
    EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 2);
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2);
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 1);

    std::size_t image_channels = 0;
    std::stringstream in(bytes);
    EXPECT_EQ(read_aaf_params(in, &image_channels), p);
    EXPECT_EQ(image_channels, 2u);

    std::stringstream cut(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(read_aaf_params(cut), TruncatedFile);
}

}  // namespace
}  // namespace mbdf
