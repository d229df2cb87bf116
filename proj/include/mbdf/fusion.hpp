#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mbdf/geometry.hpp"
#include "mbdf/numerics.hpp"

namespace mbdf {

struct AAFShape {
    std::size_t image_channels = 0;
    std::size_t point_channels = 0;
    std::size_t prev_channels = 0;
    std::size_t out_channels = 0;

    std::size_t gate_inputs() const { return image_channels + point_channels; }
    std::size_t head_inputs() const { return image_channels + point_channels + prev_channels; }

    friend bool operator==(const AAFShape&, const AAFShape&) = default;
};

/// Weights of one adaptive attention fusion block. Each "conv" is a per-point
/// shared linear map; both attention heads produce one gate per point.
struct AAFParams {
    Matrix w_image;  // (C_img + C_pt) x 1
    Vector b_image;  // 1
    Matrix w_point;  // (C_img + C_pt) x 1
    Vector b_point;  // 1
    Matrix w_out;    // (C_img + C_pt + C_prev) x C_out
    Vector b_out;    // C_out

    /// All-zero parameters for the given shape.
    static AAFParams zeros(const AAFShape& shape);

    /// Shape implied by the weights; throws DimensionMismatch if they disagree.
    AAFShape shape(std::size_t image_channels) const;

    friend bool operator==(const AAFParams&, const AAFParams&) = default;
};

struct AAFInput {
    Matrix f_image;       // N x C_img, per-point gathered image features
    Matrix f_point;       // N x C_pt
    Matrix f_fused_prev;  // N x C_prev
};

struct AAFOutput {
    Matrix f_fused;  // N x C_out
    Vector att_image;
    Vector att_point;
};

AAFOutput aaf_forward(const AAFParams& params, const AAFInput& input);

struct AAFGradients {
    AAFParams params;
    AAFInput input;
};

/// Gradients of sum(upstream * f_fused) with respect to every parameter and
/// every input.
AAFGradients aaf_backward(const AAFParams& params, const AAFInput& input, const Matrix& upstream);

/// Projects the cloud into the image feature map and assembles the fusion
/// input. Invisible points get zero image features.
AAFInput make_fusion_input(const PointCloud& cloud, const ProjectionMatrix& m,
                           const ImageFeatureMap& image_features, Matrix f_point,
                           Matrix f_fused_prev);

// Parameter blob: five little-endian u32 channel counts (C_img, C_pt, C_prev,
// C_out, gate channels = 1), then little-endian f64 values of W_I, b_I, W_P,
// b_P, W_F, b_F, each matrix row-major.
void write_aaf_params(std::ostream& os, const AAFParams& params, std::size_t image_channels);
AAFParams read_aaf_params(std::istream& is, std::size_t* image_channels = nullptr);

}  // namespace mbdf
