#include "mbdf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mbdf/errors.hpp"

namespace mbdf {

namespace {

constexpr double kAreaEpsilon = 1e-9;

using Vec2 = std::array<double, 2>;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Intersection of segment p->q with the infinite line through a->b.
Vec2 line_intersection(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
    const double dp = cross(a, b, p);
    const double dq = cross(a, b, q);
    const double t = dp / (dp - dq);
    return {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])};
}

double vertical_overlap(const Box3D& a, const Box3D& b) {
    const double lo = std::max(a.center().y - a.h() / 2.0, b.center().y - b.h() / 2.0);
    const double hi = std::min(a.center().y + a.h() / 2.0, b.center().y + b.h() / 2.0);
    return std::max(0.0, hi - lo);
}

}  // namespace

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
    PointCloud out;
    out.points.reserve(indices.size());
    for (auto i : indices) {
        out.points.push_back(points.at(i));
    }
    if (has_intensity()) {
        out.intensity.reserve(indices.size());
        for (auto i : indices) {
            out.intensity.push_back(intensity.at(i));
        }
    }
    return out;
}

ProjectionMatrix::ProjectionMatrix()
    : m_{{{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}}} {}

ProjectionMatrix::ProjectionMatrix(const std::array<std::array<double, 4>, 3>& m) : m_(m) {
    for (const auto& r : m_) {
        for (double v : r) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("projection matrix has a non-finite entry");
            }
        }
    }
}

ImageFeatureMap::ImageFeatureMap(std::size_t height, std::size_t width, std::size_t channels,
                                 double fill)
    : height_(height), width_(width), channels_(channels),
      values_(height * width * channels, fill) {
    if (height == 0 || width == 0) {
        throw InvalidArgument("image feature map must be at least 1x1");
    }
}

double normalize_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a + std::numbers::pi, two_pi);
    if (r < 0.0) r += two_pi;
    r -= std::numbers::pi;
    // fmod can land exactly on +pi after rounding.
    if (r >= std::numbers::pi) r -= two_pi;
    return r;
}

Box3D::Box3D(Point3 center, double l, double h, double w, double yaw)
    : center_(center), l_(l), h_(h), w_(w), yaw_(normalize_angle(yaw)) {
    if (!(l > 0.0 && h > 0.0 && w > 0.0)) {
        throw InvalidArgument("box dimensions must be positive");
    }
    if (!std::isfinite(center.x) || !std::isfinite(center.y) || !std::isfinite(center.z) ||
        !std::isfinite(l) || !std::isfinite(h) || !std::isfinite(w) || !std::isfinite(yaw)) {
        throw InvalidArgument("box parameters must be finite");
    }
}

std::array<std::array<double, 2>, 4> Box3D::bev_corners() const {
    const double c = std::cos(yaw_);
    const double s = std::sin(yaw_);
    const double hl = l_ / 2.0;
    const double hw = w_ / 2.0;
    const std::array<Vec2, 4> local{{{hl, -hw}, {hl, hw}, {-hl, hw}, {-hl, -hw}}};
    std::array<Vec2, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = {center_.x + c * local[i][0] + s * local[i][1],
                  center_.z - s * local[i][0] + c * local[i][1]};
    }
    return out;
}

Point3 Box3D::to_local(const Point3& p) const {
    const double c = std::cos(yaw_);
    const double s = std::sin(yaw_);
    const double dx = p.x - center_.x;
    const double dz = p.z - center_.z;
    return {c * dx - s * dz, p.y - center_.y, s * dx + c * dz};
}

std::optional<PixelProjection> project_point(const Point3& p, const ProjectionMatrix& m) {
    const auto& r = m.rows();
    const double uh = r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + r[0][3];
    const double vh = r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + r[1][3];
    const double d = r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + r[2][3];
    if (!(d > 0.0)) {
        return std::nullopt;
    }
    return PixelProjection{uh / d, vh / d, d};
}

Vector bilinear_sample(const ImageFeatureMap& map, double u, double v) {
    Vector out(map.channels(), 0.0);
    const double max_u = static_cast<double>(map.width() - 1);
    const double max_v = static_cast<double>(map.height() - 1);
    if (!(u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v)) {
        return out;
    }
    const auto u0 = static_cast<std::size_t>(std::floor(u));
    const auto v0 = static_cast<std::size_t>(std::floor(v));
    const std::size_t u1 = std::min(u0 + 1, map.width() - 1);
    const std::size_t v1 = std::min(v0 + 1, map.height() - 1);
    const double fu = u - static_cast<double>(u0);
    const double fv = v - static_cast<double>(v0);

    const auto f00 = map.at(v0, u0);
    const auto f01 = map.at(v0, u1);
    const auto f10 = map.at(v1, u0);
    const auto f11 = map.at(v1, u1);
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = (1.0 - fv) * ((1.0 - fu) * f00[c] + fu * f01[c]) +
                 fv * ((1.0 - fu) * f10[c] + fu * f11[c]);
    }
    return out;
}

GatheredFeatures gather_point_image_features(const PointCloud& cloud, const ProjectionMatrix& m,
                                             const ImageFeatureMap& map) {
    GatheredFeatures out{Matrix(cloud.size(), map.channels()),
                         std::vector<bool>(cloud.size(), false)};
    const double max_u = static_cast<double>(map.width() - 1);
    const double max_v = static_cast<double>(map.height() - 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto proj = project_point(cloud.points[i], m);
        if (!proj) continue;
        if (!(proj->u >= 0.0 && proj->u <= max_u && proj->v >= 0.0 && proj->v <= max_v)) continue;
        const Vector f = bilinear_sample(map, proj->u, proj->v);
        std::copy(f.begin(), f.end(), out.features.row(i).begin());
        out.visible[i] = true;
    }
    return out;
}

std::vector<Vec2> clip_convex_polygon(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    std::vector<Vec2> output(subject.begin(), subject.end());
    for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
        const Vec2& a = clip[e];
        const Vec2& b = clip[(e + 1) % clip.size()];
        std::vector<Vec2> input;
        input.swap(output);
        for (std::size_t i = 0; i < input.size(); ++i) {
            const Vec2& cur = input[i];
            const Vec2& prev = input[(i + input.size() - 1) % input.size()];
            const bool cur_in = cross(a, b, cur) >= 0.0;
            const bool prev_in = cross(a, b, prev) >= 0.0;
            if (cur_in) {
                if (!prev_in) output.push_back(line_intersection(prev, cur, a, b));
                output.push_back(cur);
            } else if (prev_in) {
                output.push_back(line_intersection(prev, cur, a, b));
            }
        }
    }
    return output;
}

double polygon_area(std::span<const Vec2> poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(twice) / 2.0;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
    const auto ca = a.bev_corners();
    const auto cb = b.bev_corners();
    const auto inter = clip_convex_polygon(ca, cb);
    const double area = polygon_area(inter);
    return area < kAreaEpsilon ? 0.0 : area;
}

double iou_bev(const Box3D& a, const Box3D& b) {
    const double inter = bev_intersection_area(a, b);
    if (inter == 0.0) return 0.0;
    const double uni = a.l() * a.w() + b.l() * b.w() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
    const double inter = bev_intersection_area(a, b) * vertical_overlap(a, b);
    if (inter < kAreaEpsilon) return 0.0;
    const double uni = a.volume() + b.volume() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> nms(std::span<const Box3D> boxes, std::span<const double> scores,
                             double iou_threshold) {
    if (boxes.size() != scores.size()) {
        throw DimensionMismatch("nms: " + std::to_string(boxes.size()) + " boxes vs " +
                                std::to_string(scores.size()) + " scores");
    }
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
        throw InvalidArgument("nms: threshold must lie in [0, 1]");
    }
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });

    std::vector<bool> suppressed(boxes.size(), false);
    std::vector<std::size_t> kept;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(i);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (!suppressed[j] && iou_bev(boxes[i], boxes[j]) > iou_threshold) {
                suppressed[j] = true;
            }
        }
    }
    return kept;
}

Box3D enlarge_box(const Box3D& b, double margin) {
    if (!(margin >= 0.0)) {
        throw InvalidArgument("enlarge_box: margin must be non-negative");
    }
    return {b.center(), b.l() + margin, b.h() + margin, b.w() + margin, b.yaw()};
}

bool box_contains(const Box3D& b, const Point3& p) {
    const Point3 q = b.to_local(p);
    return std::abs(q.x) <= b.l() / 2.0 && std::abs(q.y) <= b.h() / 2.0 &&
           std::abs(q.z) <= b.w() / 2.0;
}

std::vector<std::size_t> points_in_box(const PointCloud& cloud, const Box3D& b) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (box_contains(b, cloud.points[i])) out.push_back(i);
    }
    return out;
}

PointCloud rotate_y(const PointCloud& cloud, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    PointCloud out = cloud;
    for (auto& p : out.points) {
        const double x = p.x;
        const double z = p.z;
        p.x = c * x + s * z;
        p.z = -s * x + c * z;
    }
    return out;
}

PointCloud flip(const PointCloud& cloud, HorizontalAxis axis) {
    PointCloud out = cloud;
    for (auto& p : out.points) {
        if (axis == HorizontalAxis::X) {
            p.x = -p.x;
        } else {
            p.z = -p.z;
        }
    }
    return out;
}

PointCloud scale(const PointCloud& cloud, double s) {
    if (!(s > 0.0)) {
        throw InvalidArgument("scale factor must be positive");
    }
    PointCloud out = cloud;
    for (auto& p : out.points) {
        p.x *= s;
        p.y *= s;
        p.z *= s;
    }
    return out;
}

PointCloud crop_range(const PointCloud& cloud, Range x, Range y, Range z) {
    if (!(x.min < x.max && y.min < y.max && z.min < z.max)) {
        throw InvalidArgument("crop_range: each range needs min < max");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        if (x.contains(p.x) && y.contains(p.y) && z.contains(p.z)) keep.push_back(i);
    }
    return cloud.select(keep);
}

}  // namespace mbdf
