#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbdf/geometry.hpp"

namespace mbdf {

/// Velodyne scan: consecutive little-endian float32 records (x, y, z, intensity).
PointCloud read_point_cloud_bin(const std::filesystem::path& path);
void write_point_cloud_bin(const std::filesystem::path& path, const PointCloud& cloud);

using Mat3x4 = std::array<std::array<double, 4>, 3>;
using Mat3x3 = std::array<std::array<double, 3>, 3>;

struct KittiCalib {
    Mat3x4 p2{};
    Mat3x3 r0_rect{};
    Mat3x4 tr_velo_to_cam{};

    /// P2 * pad4(R0_rect) * pad4(Tr_velo_to_cam).
    ProjectionMatrix lidar_to_image() const;

    /// pad4(R0_rect) * pad4(Tr_velo_to_cam) as a 3x4 rigid map.
    Mat3x4 lidar_to_rect() const;
};

KittiCalib parse_kitti_calib(std::istream& is);
KittiCalib read_kitti_calib(const std::filesystem::path& path);
ProjectionMatrix read_calib(const std::filesystem::path& path);

/// Moves a scan into the rectified camera frame (x right, y down, z forward),
/// the frame boxes live in.
PointCloud transform_cloud(const PointCloud& cloud, const Mat3x4& m);

struct LabeledBox {
    std::string type;
    Box3D box;
};

/// KITTI object labels. Boxes stay in the rectified camera frame with the
/// center moved from the bottom face to the geometric center. DontCare rows
/// are skipped.
std::vector<LabeledBox> parse_labels(std::istream& is);
std::vector<LabeledBox> read_labels(const std::filesystem::path& path);

}  // namespace mbdf
