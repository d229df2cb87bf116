#include "mbdf/kitti.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>

#include "mbdf/errors.hpp"

namespace mbdf {

namespace {

constexpr std::size_t kRecordBytes = 16;

float load_f32_le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(v);
}

void store_f32_le(unsigned char* p, float f) {
    const auto v = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
}

double parse_double(const std::string& token, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + token + "' is not a number");
    }
    if (used != token.size()) {
        throw ParseError(where + ": '" + token + "' is not a number");
    }
    return v;
}

std::vector<double> parse_values(const std::string& rest, std::size_t expected,
                                 const std::string& key) {
    std::istringstream ss(rest);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(tok, key));
    if (out.size() != expected) {
        throw ParseError(key + ": expected " + std::to_string(expected) + " values, got " +
                         std::to_string(out.size()));
    }
    return out;
}

using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 pad4(const Mat3x4& m) {
    Mat4 out{};
    for (int r = 0; r < 3; ++r) out[r] = m[r];
    out[3] = {0.0, 0.0, 0.0, 1.0};
    return out;
}

Mat4 pad4(const Mat3x3& m) {
    Mat4 out{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out[r][c] = m[r][c];
    }
    out[3][3] = 1.0;
    return out;
}

Mat4 mul(const Mat4& a, const Mat4& b) {
    Mat4 out{};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            for (int k = 0; k < 4; ++k) out[r][c] += a[r][k] * b[k][c];
        }
    }
    return out;
}

Mat3x4 top3(const Mat4& m) { return {m[0], m[1], m[2]}; }

std::ifstream open_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

PointCloud read_point_cloud_bin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                           std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path.string());
    if (bytes.size() % kRecordBytes != 0) {
        throw TruncatedFile(path.string() + ": " + std::to_string(bytes.size()) +
                            " bytes is not a whole number of 16-byte records");
    }
    PointCloud cloud;
    const std::size_t n = bytes.size() / kRecordBytes;
    cloud.points.reserve(n);
    cloud.intensity.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec = bytes.data() + i * kRecordBytes;
        cloud.points.push_back({load_f32_le(rec), load_f32_le(rec + 4), load_f32_le(rec + 8)});
        cloud.intensity.push_back(load_f32_le(rec + 12));
    }
    return cloud;
}

void write_point_cloud_bin(const std::filesystem::path& path, const PointCloud& cloud) {
    std::vector<unsigned char> bytes(cloud.size() * kRecordBytes);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        unsigned char* rec = bytes.data() + i * kRecordBytes;
        const auto& p = cloud.points[i];
        store_f32_le(rec, static_cast<float>(p.x));
        store_f32_le(rec + 4, static_cast<float>(p.y));
        store_f32_le(rec + 8, static_cast<float>(p.z));
        store_f32_le(rec + 12, cloud.has_intensity() ? static_cast<float>(cloud.intensity[i]) : 0.0f);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

ProjectionMatrix KittiCalib::lidar_to_image() const {
    return ProjectionMatrix(top3(mul(pad4(p2), mul(pad4(r0_rect), pad4(tr_velo_to_cam)))));
}

Mat3x4 KittiCalib::lidar_to_rect() const {
    return top3(mul(pad4(r0_rect), pad4(tr_velo_to_cam)));
}

KittiCalib parse_kitti_calib(std::istream& is) {
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(is, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        entries[line.substr(0, colon)] = line.substr(colon + 1);
    }
    auto take = [&](const std::string& key, std::size_t count) {
        auto it = entries.find(key);
        if (it == entries.end()) throw MissingKey("calibration is missing '" + key + ":'");
        return parse_values(it->second, count, key);
    };
    KittiCalib calib;
    const auto p2 = take("P2", 12);
    const auto r0 = take("R0_rect", 9);
    const auto tr = take("Tr_velo_to_cam", 12);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            calib.p2[r][c] = p2[r * 4 + c];
            calib.tr_velo_to_cam[r][c] = tr[r * 4 + c];
        }
        for (int c = 0; c < 3; ++c) calib.r0_rect[r][c] = r0[r * 3 + c];
    }
    return calib;
}

KittiCalib read_kitti_calib(const std::filesystem::path& path) {
    auto in = open_text(path);
    return parse_kitti_calib(in);
}

ProjectionMatrix read_calib(const std::filesystem::path& path) {
    return read_kitti_calib(path).lidar_to_image();
}

PointCloud transform_cloud(const PointCloud& cloud, const Mat3x4& m) {
    PointCloud out = cloud;
    for (auto& p : out.points) {
        const Point3 q = p;
        p.x = m[0][0] * q.x + m[0][1] * q.y + m[0][2] * q.z + m[0][3];
        p.y = m[1][0] * q.x + m[1][1] * q.y + m[1][2] * q.z + m[1][3];
        p.z = m[2][0] * q.x + m[2][1] * q.y + m[2][2] * q.z + m[2][3];
    }
    return out;
}

std::vector<LabeledBox> parse_labels(std::istream& is) {
    std::vector<LabeledBox> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::vector<std::string> tok;
        std::string t;
        while (ss >> t) tok.push_back(t);
        if (tok.empty()) continue;
        const std::string where = "label line " + std::to_string(line_no);
        if (tok.size() < 15) {
            throw ParseError(where + ": expected at least 15 fields, got " +
                             std::to_string(tok.size()));
        }
        std::array<double, 14> f{};
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = parse_double(tok[i + 1], where);
        if (tok[0] == "DontCare") continue;
        // Fields after the type: truncated, occluded, alpha, bbox x4, h, w, l, x, y, z, ry.
        const double h = f[7];
        const double w = f[8];
        const double l = f[9];
        try {
            out.push_back({tok[0], Box3D({f[10], f[11] - h / 2.0, f[12]}, l, h, w, f[13])});
        } catch (const InvalidArgument& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<LabeledBox> read_labels(const std::filesystem::path& path) {
    auto in = open_text(path);
    return parse_labels(in);
}

}  // namespace mbdf
