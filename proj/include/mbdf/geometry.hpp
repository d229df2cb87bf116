#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mbdf/numerics.hpp"

namespace mbdf {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

/// Raw point cloud. The vertical axis is y; the ground plane is x-z.
struct PointCloud {
    std::vector<Point3> points;
    // Empty, or one value per point.
    std::vector<double> intensity;

    std::size_t size() const { return points.size(); }
    bool has_intensity() const { return !intensity.empty(); }

    /// Subset in the given index order.
    PointCloud select(std::span<const std::size_t> indices) const;

    friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// 3x4 homogeneous map from cloud coordinates to image pixels.
class ProjectionMatrix {
public:
    ProjectionMatrix();  // [I | 0]
    explicit ProjectionMatrix(const std::array<std::array<double, 4>, 3>& m);

    double operator()(std::size_t r, std::size_t c) const { return m_[r][c]; }
    const std::array<std::array<double, 4>, 3>& rows() const { return m_; }

private:
    std::array<std::array<double, 4>, 3> m_;
};

struct PixelProjection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

/// Row-major H x W x C feature grid.
class ImageFeatureMap {
public:
    ImageFeatureMap(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t channels() const { return channels_; }

    std::span<double> at(std::size_t v, std::size_t u) {
        return {values_.data() + (v * width_ + u) * channels_, channels_};
    }
    std::span<const double> at(std::size_t v, std::size_t u) const {
        return {values_.data() + (v * width_ + u) * channels_, channels_};
    }

private:
    std::size_t height_;
    std::size_t width_;
    std::size_t channels_;
    std::vector<double> values_;
};

/// Oriented box: center, size (l along local x, h along y, w along local z),
/// and yaw about the vertical y axis. Yaw is kept in [-pi, pi).
class Box3D {
public:
    Box3D() = default;
    Box3D(Point3 center, double l, double h, double w, double yaw);

    const Point3& center() const { return center_; }
    double l() const { return l_; }
    double h() const { return h_; }
    double w() const { return w_; }
    double yaw() const { return yaw_; }

    /// Footprint corners in the x-z plane, counter-clockwise in (x, z).
    std::array<std::array<double, 2>, 4> bev_corners() const;

    /// Coordinates of p in the box frame (center origin, yaw removed).
    Point3 to_local(const Point3& p) const;

    double volume() const { return l_ * h_ * w_; }

    friend bool operator==(const Box3D&, const Box3D&) = default;

private:
    Point3 center_{};
    double l_ = 1.0;
    double h_ = 1.0;
    double w_ = 1.0;
    double yaw_ = 0.0;
};

/// Wraps an angle into [-pi, pi).
double normalize_angle(double a);

/// Returns nullopt when the point is at or behind the image plane.
std::optional<PixelProjection> project_point(const Point3& p, const ProjectionMatrix& m);

/// Bilinear blend of the four pixels around (u, v). Zero vector outside
/// [0, W-1] x [0, H-1].
Vector bilinear_sample(const ImageFeatureMap& map, double u, double v);

struct GatheredFeatures {
    Matrix features;           // N x C
    std::vector<bool> visible;  // per point
};

GatheredFeatures gather_point_image_features(const PointCloud& cloud, const ProjectionMatrix& m,
                                             const ImageFeatureMap& map);

/// Intersection of two convex polygons (Sutherland-Hodgman). Both must be
/// counter-clockwise.
std::vector<std::array<double, 2>> clip_convex_polygon(
    std::span<const std::array<double, 2>> subject, std::span<const std::array<double, 2>> clip);

double polygon_area(std::span<const std::array<double, 2>> poly);

/// Footprint intersection area; areas below 1e-9 are reported as zero.
double bev_intersection_area(const Box3D& a, const Box3D& b);

double iou_bev(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

/// Greedy NMS over iou_bev. Kept indices come back in descending score
/// order; equal scores are visited lower index first.
std::vector<std::size_t> nms(std::span<const Box3D> boxes, std::span<const double> scores,
                             double iou_threshold);

Box3D enlarge_box(const Box3D& b, double margin);

bool box_contains(const Box3D& b, const Point3& p);

/// Indices of points inside the closed box, ascending.
std::vector<std::size_t> points_in_box(const PointCloud& cloud, const Box3D& b);

// Augmentations.
enum class HorizontalAxis { X, Z };

PointCloud rotate_y(const PointCloud& cloud, double angle);
PointCloud flip(const PointCloud& cloud, HorizontalAxis axis);
PointCloud scale(const PointCloud& cloud, double s);

struct Range {
    double min = 0.0;
    double max = 0.0;

    bool contains(double v) const { return v >= min && v <= max; }
    friend bool operator==(const Range&, const Range&) = default;
};

PointCloud crop_range(const PointCloud& cloud, Range x, Range y, Range z);

}  // namespace mbdf
