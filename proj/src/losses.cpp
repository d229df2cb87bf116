#include "mbdf/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mbdf/errors.hpp"

namespace mbdf {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr double kIouFloor = 1e-6;

void check_spec(const BinSpec& s) {
    if (!(s.half_range > 0.0) || s.count < 2) {
        throw InvalidArgument("bin spec needs a positive range and at least two bins");
    }
}

void check_logits(std::span<const double> logits, std::size_t count, const char* name) {
    if (logits.size() != count) {
        throw DimensionMismatch(std::string("regression_loss: ") + name + " has " +
                                std::to_string(logits.size()) + " logits for " +
                                std::to_string(count) + " bins");
    }
}

}  // namespace

BinConfig::BinConfig() : theta{std::numbers::pi, 12, true} {}

double focal_loss(double c_t, const FocalConfig& cfg) {
    if (!(c_t > 0.0 && c_t <= 1.0)) {
        throw DomainError("focal_loss: probability " + std::to_string(c_t) + " outside (0, 1]");
    }
    const double p = std::max(c_t, kProbabilityFloor);
    return -cfg.alpha * std::pow(1.0 - p, cfg.gamma) * std::log(p);
}

double smooth_l1(double pred, double target) {
    const double d = std::abs(pred - target);
    return d < 1.0 ? 0.5 * d * d : d - 0.5;
}

BinEncoding encode_bins(double value, double anchor, const BinSpec& spec) {
    check_spec(spec);
    double offset = value - anchor;
    if (spec.periodic) {
        offset = normalize_angle(offset);
    } else if (!(offset >= -spec.half_range && offset < spec.half_range)) {
        throw OutOfRange("offset " + std::to_string(offset) + " outside the search range +-" +
                         std::to_string(spec.half_range));
    }
    const double width = spec.width();
    const double shifted = offset + spec.half_range;
    auto bin = static_cast<std::size_t>(std::max(0.0, std::floor(shifted / width)));
    bin = std::min(bin, spec.count - 1);
    return {bin, (shifted - (static_cast<double>(bin) + 0.5) * width) / width};
}

double decode_bins(std::size_t bin, double residual, double anchor, const BinSpec& spec) {
    check_spec(spec);
    if (bin >= spec.count) {
        throw OutOfRange("bin " + std::to_string(bin) + " out of " + std::to_string(spec.count));
    }
    const double offset =
        -spec.half_range + (static_cast<double>(bin) + 0.5 + residual) * spec.width();
    return spec.periodic ? normalize_angle(anchor + offset) : anchor + offset;
}

double bin_cross_entropy(std::span<const double> logits, std::size_t target_bin) {
    if (target_bin >= logits.size()) {
        throw OutOfRange("target bin " + std::to_string(target_bin) + " out of " +
                         std::to_string(logits.size()));
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - peak);
    return std::max(0.0, std::log(sum) - (logits[target_bin] - peak));
}

double iou_reg_loss(const Box3D& pred, const Box3D& gt) {
    return -std::log(std::max(iou_bev(pred, gt), kIouFloor));
}

BoxTarget encode_box_target(const Box3D& gt, const Box3D& anchor, const BinConfig& cfg) {
    BoxTarget t;
    const auto ex = encode_bins(gt.center().x, anchor.center().x, cfg.x);
    const auto ez = encode_bins(gt.center().z, anchor.center().z, cfg.z);
    const auto et = encode_bins(gt.yaw(), anchor.yaw(), cfg.theta);
    t.bin_x = ex.bin;
    t.bin_z = ez.bin;
    t.bin_theta = et.bin;
    t.residuals[kX] = ex.residual;
    t.residuals[kY] = gt.center().y - anchor.center().y;
    t.residuals[kZ] = ez.residual;
    t.residuals[kL] = gt.l() - anchor.l();
    t.residuals[kH] = gt.h() - anchor.h();
    t.residuals[kW] = gt.w() - anchor.w();
    t.residuals[kTheta] = et.residual;
    return t;
}

Box3D decode_box_target(const BoxTarget& t, const Box3D& anchor, const BinConfig& cfg) {
    const Point3 c{decode_bins(t.bin_x, t.residuals[kX], anchor.center().x, cfg.x),
                   anchor.center().y + t.residuals[kY],
                   decode_bins(t.bin_z, t.residuals[kZ], anchor.center().z, cfg.z)};
    return {c, anchor.l() + t.residuals[kL], anchor.h() + t.residuals[kH],
            anchor.w() + t.residuals[kW],
            decode_bins(t.bin_theta, t.residuals[kTheta], anchor.yaw(), cfg.theta)};
}

RegressionTerms regression_loss(const RegressionPrediction& pred, const BoxTarget& target,
                                const Box3D& pred_box, const Box3D& gt_box,
                                const BinConfig& cfg) {
    check_logits(pred.logits_x, cfg.x.count, "x");
    check_logits(pred.logits_z, cfg.z.count, "z");
    check_logits(pred.logits_theta, cfg.theta.count, "theta");
    RegressionTerms terms;
    terms.bin_ce = bin_cross_entropy(pred.logits_x, target.bin_x) +
                   bin_cross_entropy(pred.logits_z, target.bin_z) +
                   bin_cross_entropy(pred.logits_theta, target.bin_theta);
    for (std::size_t q = 0; q < kBoxQuantities; ++q) {
        terms.residual += smooth_l1(pred.residuals[q], target.residuals[q]);
    }
    terms.iou = iou_reg_loss(pred_box, gt_box);
    return terms;
}

double total_loss(double rpn_cls, double rpn_reg, double rcnn_cls, double rcnn_reg) {
    return (rpn_cls + rpn_reg) + (rcnn_cls + rcnn_reg);
}

}  // namespace mbdf
