#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "mbdf/geometry.hpp"
#include "mbdf/numerics.hpp"

namespace mbdf {

struct FocalConfig {
    double alpha = 0.25;
    double gamma = 2.0;
};

/// -alpha * (1 - c_t)^gamma * ln(c_t). Throws DomainError outside (0, 1].
double focal_loss(double c_t, const FocalConfig& cfg = {});

double smooth_l1(double pred, double target);

/// Binning of one regressed quantity: offsets from the anchor in
/// [-half_range, half_range) split into `count` equal bins. Periodic entries
/// (yaw) wrap the offset into [-pi, pi) instead of rejecting it.
struct BinSpec {
    double half_range = 3.0;
    std::size_t count = 12;
    bool periodic = false;

    double width() const { return 2.0 * half_range / static_cast<double>(count); }
};

struct BinConfig {
    BinSpec x{3.0, 12, false};
    BinSpec z{3.0, 12, false};
    BinSpec theta;  // full circle, see default_theta_bins()

    BinConfig();
};

struct BinEncoding {
    std::size_t bin = 0;
    double residual = 0.0;  // in bin widths, zero at the bin center
};

BinEncoding encode_bins(double value, double anchor, const BinSpec& spec);
double decode_bins(std::size_t bin, double residual, double anchor, const BinSpec& spec);

/// Softmax negative log-likelihood of `target_bin`.
double bin_cross_entropy(std::span<const double> logits, std::size_t target_bin);

/// -ln(iou_bev), IoU clamped to >= 1e-6.
double iou_reg_loss(const Box3D& pred, const Box3D& gt);

// Order of the seven box quantities in residual arrays.
enum BoxQuantity : std::size_t { kX = 0, kY, kZ, kL, kH, kW, kTheta, kBoxQuantities };

/// Ground-truth bins for x, z and yaw plus residuals for all seven box
/// quantities. Binned quantities carry their normalized within-bin residual;
/// the rest carry the plain offset from the anchor box.
struct BoxTarget {
    std::size_t bin_x = 0;
    std::size_t bin_z = 0;
    std::size_t bin_theta = 0;
    std::array<double, kBoxQuantities> residuals{};
};

BoxTarget encode_box_target(const Box3D& gt, const Box3D& anchor, const BinConfig& cfg);
Box3D decode_box_target(const BoxTarget& t, const Box3D& anchor, const BinConfig& cfg);

struct RegressionPrediction {
    Vector logits_x;
    Vector logits_z;
    Vector logits_theta;
    std::array<double, kBoxQuantities> residuals{};
};

struct RegressionTerms {
    double bin_ce = 0.0;
    double residual = 0.0;
    double iou = 0.0;

    double total() const { return bin_ce + residual + iou; }
};

/// Bin classification over x, z, yaw, smooth-L1 over all seven residuals, and
/// the IoU regularizer.
RegressionTerms regression_loss(const RegressionPrediction& pred, const BoxTarget& target,
                                const Box3D& pred_box, const Box3D& gt_box,
                                const BinConfig& cfg);

double total_loss(double rpn_cls, double rpn_reg, double rcnn_cls, double rcnn_reg);

}  // namespace mbdf
