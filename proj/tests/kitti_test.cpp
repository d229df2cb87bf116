#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "mbdf/errors.hpp"
#include "mbdf/kitti.hpp"
#include "mbdf/random.hpp"
#include "test_util.hpp"

namespace mbdf {
namespace {

using testing::TempDir;

std::string record(float x, float y, float z, float i) {
    std::string s(16, '\0');
    const float v[4] = {x, y, z, i};
    std::memcpy(s.data(), v, 16);  // test host is little-endian
    return s;
}

TEST(PointCloudBin, ReadsRecords) {
    TempDir dir;
    const auto cloud = read_point_cloud_bin(dir.write("one.bin", record(1, 2, 3, 0.5f)));
    ASSERT_EQ(cloud.size(), 1u);
    EXPECT_EQ(cloud.points[0], (Point3{1, 2, 3}));
    EXPECT_EQ(cloud.intensity[0], 0.5);
    EXPECT_EQ(read_point_cloud_bin(dir.write("empty.bin", "")).size(), 0u);
    EXPECT_THROW(read_point_cloud_bin(dir.write("bad.bin", record(1, 2, 3, 4) + "x")), TruncatedFile);
    EXPECT_THROW(read_point_cloud_bin(dir.file("missing.bin")), IoError);
}

TEST(PointCloudBin, WriteBackIsByteIdentical) {
    TempDir dir;
    Rng rng(77);
    std::string bytes;
    for (int i = 0; i < 300; ++i) {
        bytes += record(static_cast<float>(rng.uniform(-80, 80)), static_cast<float>(rng.uniform(-40, 40)),
                        static_cast<float>(rng.uniform(-3, 3)), static_cast<float>(rng.uniform()));
    }
    const auto in = dir.write("scan.bin", bytes);
    write_point_cloud_bin(dir.file("copy.bin"), read_point_cloud_bin(in));
    EXPECT_EQ(testing::slurp(dir.file("copy.bin")), bytes);
}

const char* kIdentityCalib =
    "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n"
    "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
    "R0_rect: 1 0 0 0 1 0 0 0 1\n"
    "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n";

TEST(Calib, IdentityComposition) {
    std::istringstream in(kIdentityCalib);
    const ProjectionMatrix m = parse_kitti_calib(in).lidar_to_image();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) EXPECT_EQ(m(r, c), (r == c ? 1.0 : 0.0));
    }
}

TEST(Calib, KnownTranslation) {
    // P2 = [K | 0] with f = 700, c = (600, 180); Tr swaps LiDAR axes into the
    // camera frame and translates by (0.1, -0.2, 0.3).
    std::istringstream in(
        "P2: 700 0 600 0 0 700 180 0 0 0 1 0\n"
        "R0_rect: 1 0 0 0 1 0 0 0 1\n"
        "Tr_velo_to_cam: 0 -1 0 0.1 0 0 -1 -0.2 1 0 0 0.3\n");
    const auto calib = parse_kitti_calib(in);
    const ProjectionMatrix m = calib.lidar_to_image();
    const double expected[3][4] = {{600, -700, 0, 250}, {180, 0, -700, -86}, {1, 0, 0, 0.3}};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) EXPECT_NEAR(m(r, c), expected[r][c], 1e-12) << r << "," << c;
    }
    // A point 10 m ahead of the LiDAR lands 10.3 m ahead of the camera.
    const auto rect = transform_cloud(PointCloud{{{10, 0, 0}}, {}}, calib.lidar_to_rect());
    EXPECT_NEAR(rect.points[0].x, 0.1, 1e-12);
    EXPECT_NEAR(rect.points[0].y, -0.2, 1e-12);
    EXPECT_NEAR(rect.points[0].z, 10.3, 1e-12);
}

TEST(Calib, Errors) {
    std::istringstream missing("P2: 1 0 0 0 0 1 0 0 0 0 1 0\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n");
    EXPECT_THROW(parse_kitti_calib(missing), MissingKey);
    std::istringstream short_row("P2: 1 0 0\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n");
    EXPECT_THROW(parse_kitti_calib(short_row), ParseError);
    std::istringstream junk("P2: 1 0 0 0 0 1 0 0 0 0 1 zz\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n");
    EXPECT_THROW(parse_kitti_calib(junk), ParseError);
    EXPECT_THROW(read_calib("/nonexistent/calib.txt"), IoError);
}

TEST(Labels, ParsesCarAndSkipsDontCare) {
    std::istringstream in(
        "Car 0.00 0 -1.57 614.24 181.78 727.31 284.77 1.57 1.73 4.15 1.00 1.75 13.22 -1.62\n"
        "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10\n");
    const auto labels = parse_labels(in);
    ASSERT_EQ(labels.size(), 1u);
    const auto& b = labels[0].box;
    EXPECT_EQ(labels[0].type, "Car");
    EXPECT_DOUBLE_EQ(b.l(), 4.15);
    EXPECT_DOUBLE_EQ(b.h(), 1.57);
    EXPECT_DOUBLE_EQ(b.w(), 1.73);
    EXPECT_DOUBLE_EQ(b.center().x, 1.00);
    EXPECT_DOUBLE_EQ(b.center().y, 1.75 - 1.57 / 2.0);
    EXPECT_DOUBLE_EQ(b.center().z, 13.22);
    EXPECT_DOUBLE_EQ(b.yaw(), -1.62);
}

TEST(Labels, EmptyAndMalformed) {
    std::istringstream empty("");
    EXPECT_TRUE(parse_labels(empty).empty());
    std::istringstream bad(
        "Car 0.00 0 -1.57 614.24 181.78 727.31 284.77 1.57 1.73 4.15 1.00 1.75 13.22 -1.62\n"
        "Car 0.00 0 -1.57 614.24 181.78 727.31 284.77 1.5x 1.73 4.15 1.00 1.75 13.22 -1.62\n");
    try {
        parse_labels(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

}  // namespace
}  // namespace mbdf
