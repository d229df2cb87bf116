#include "mbdf/fusion.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mbdf/errors.hpp"

namespace mbdf {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionMismatch("aaf: " + what);
}

void check_compatible(const AAFParams& p, const AAFInput& in) {
    const std::size_t n = in.f_image.rows();
    require(in.f_point.rows() == n && in.f_fused_prev.rows() == n, "input row counts differ");
    const std::size_t gate_in = in.f_image.cols() + in.f_point.cols();
    require(p.w_image.rows() == gate_in && p.w_image.cols() == 1, "W_I shape");
    require(p.w_point.rows() == gate_in && p.w_point.cols() == 1, "W_P shape");
    require(p.b_image.size() == 1 && p.b_point.size() == 1, "gate bias length");
    require(p.w_out.rows() == gate_in + in.f_fused_prev.cols(), "W_F rows");
    require(p.b_out.size() == p.w_out.cols(), "b_F length");
}

Matrix scale_rows(const Matrix& m, const Vector& s) {
    Matrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (double& v : out.row(i)) v *= s[i];
    }
    return out;
}

Vector column(const Matrix& m) {
    return Vector(m.values().begin(), m.values().end());
}

void write_u32(std::ostream& os, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b.data(), b.size());
}

void write_f64(std::ostream& os, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    os.write(b.data(), b.size());
}

std::uint32_t read_u32(std::istream& is) {
    std::array<unsigned char, 4> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
        throw TruncatedFile("AAF parameter header is truncated");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
        throw TruncatedFile("AAF parameter values are truncated");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

void write_values(std::ostream& os, std::span<const double> values) {
    for (double v : values) write_f64(os, v);
}

Matrix read_matrix(std::istream& is, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = read_f64(is);
    return m;
}

Vector read_vector(std::istream& is, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = read_f64(is);
    return v;
}

}  // namespace

AAFParams AAFParams::zeros(const AAFShape& s) {
    return {Matrix(s.gate_inputs(), 1), Vector(1, 0.0),
            Matrix(s.gate_inputs(), 1), Vector(1, 0.0),
            Matrix(s.head_inputs(), s.out_channels), Vector(s.out_channels, 0.0)};
}

AAFShape AAFParams::shape(std::size_t image_channels) const {
    require(w_image.rows() >= image_channels, "image channel count exceeds gate inputs");
    AAFShape s{image_channels, w_image.rows() - image_channels, 0, w_out.cols()};
    require(w_out.rows() >= s.gate_inputs(), "W_F rows smaller than gate inputs");
    s.prev_channels = w_out.rows() - s.gate_inputs();
    require(w_point.rows() == w_image.rows() && w_image.cols() == 1 && w_point.cols() == 1,
            "gate weight shapes");
    require(b_image.size() == 1 && b_point.size() == 1 && b_out.size() == w_out.cols(),
            "bias lengths");
    return s;
}

AAFOutput aaf_forward(const AAFParams& p, const AAFInput& in) {
    check_compatible(p, in);
    const Matrix gate_in = concat_cols(in.f_image, in.f_point);
    AAFOutput out;
    out.att_image = column(sigmoid(linear_forward(gate_in, p.w_image, p.b_image)));
    out.att_point = column(sigmoid(linear_forward(gate_in, p.w_point, p.b_point)));
    const Matrix head_in = concat_cols(
        concat_cols(scale_rows(in.f_image, out.att_image), scale_rows(in.f_point, out.att_point)),
        in.f_fused_prev);
    out.f_fused = linear_forward(head_in, p.w_out, p.b_out);
    return out;
}

AAFGradients aaf_backward(const AAFParams& p, const AAFInput& in, const Matrix& upstream) {
    check_compatible(p, in);
    const std::size_t n = in.f_image.rows();
    const std::size_t ci = in.f_image.cols();
    const std::size_t cp = in.f_point.cols();
    const std::size_t cprev = in.f_fused_prev.cols();
    require(upstream.rows() == n && upstream.cols() == p.w_out.cols(), "upstream shape");

    const Matrix gate_in = concat_cols(in.f_image, in.f_point);
    const Vector att_i = column(sigmoid(linear_forward(gate_in, p.w_image, p.b_image)));
    const Vector att_p = column(sigmoid(linear_forward(gate_in, p.w_point, p.b_point)));
    const Matrix gated_i = scale_rows(in.f_image, att_i);
    const Matrix gated_p = scale_rows(in.f_point, att_p);
    const Matrix head_in = concat_cols(concat_cols(gated_i, gated_p), in.f_fused_prev);

    AAFGradients g;
    // Output head.
    g.params.w_out = matmul(head_in.transposed(), upstream);
    g.params.b_out = col_sums(upstream);
    const Matrix d_head_in = matmul(upstream, p.w_out.transposed());

    const Matrix d_gated_i = slice_cols(d_head_in, 0, ci);
    const Matrix d_gated_p = slice_cols(d_head_in, ci, cp);
    g.input.f_fused_prev = slice_cols(d_head_in, ci + cp, cprev);

    // Gates: d(att) = <d_gated row, feature row>, then through the sigmoid.
    Matrix dz_i(n, 1);
    Matrix dz_p(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
        double da_i = 0.0;
        for (std::size_t c = 0; c < ci; ++c) da_i += d_gated_i(r, c) * in.f_image(r, c);
        double da_p = 0.0;
        for (std::size_t c = 0; c < cp; ++c) da_p += d_gated_p(r, c) * in.f_point(r, c);
        dz_i(r, 0) = da_i * att_i[r] * (1.0 - att_i[r]);
        dz_p(r, 0) = da_p * att_p[r] * (1.0 - att_p[r]);
    }
    const Matrix gate_in_t = gate_in.transposed();
    g.params.w_image = matmul(gate_in_t, dz_i);
    g.params.b_image = col_sums(dz_i);
    g.params.w_point = matmul(gate_in_t, dz_p);
    g.params.b_point = col_sums(dz_p);

    Matrix d_gate_in = matmul(dz_i, p.w_image.transposed());
    const Matrix d_gate_in_p = matmul(dz_p, p.w_point.transposed());
    for (std::size_t k = 0; k < d_gate_in.size(); ++k) {
        d_gate_in.values()[k] += d_gate_in_p.values()[k];
    }

    // Inputs receive the direct gated path plus the path through the gates.
    g.input.f_image = Matrix(n, ci);
    g.input.f_point = Matrix(n, cp);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < ci; ++c) {
            g.input.f_image(r, c) = d_gated_i(r, c) * att_i[r] + d_gate_in(r, c);
        }
        for (std::size_t c = 0; c < cp; ++c) {
            g.input.f_point(r, c) = d_gated_p(r, c) * att_p[r] + d_gate_in(r, ci + c);
        }
    }
    return g;
}

AAFInput make_fusion_input(const PointCloud& cloud, const ProjectionMatrix& m,
                           const ImageFeatureMap& image_features, Matrix f_point,
                           Matrix f_fused_prev) {
    if (f_point.rows() != cloud.size() || f_fused_prev.rows() != cloud.size()) {
        throw DimensionMismatch("make_fusion_input: feature rows must match the " +
                                std::to_string(cloud.size()) + "-point cloud");
    }
    auto gathered = gather_point_image_features(cloud, m, image_features);
    return {std::move(gathered.features), std::move(f_point), std::move(f_fused_prev)};
}

void write_aaf_params(std::ostream& os, const AAFParams& p, std::size_t image_channels) {
    const AAFShape s = p.shape(image_channels);
    write_u32(os, static_cast<std::uint32_t>(s.image_channels));
    write_u32(os, static_cast<std::uint32_t>(s.point_channels));
    write_u32(os, static_cast<std::uint32_t>(s.prev_channels));
    write_u32(os, static_cast<std::uint32_t>(s.out_channels));
    write_u32(os, 1u);
    write_values(os, p.w_image.values());
    write_values(os, p.b_image);
    write_values(os, p.w_point.values());
    write_values(os, p.b_point);
    write_values(os, p.w_out.values());
    write_values(os, p.b_out);
    if (!os) throw IoError("failed to write AAF parameters");
}

AAFParams read_aaf_params(std::istream& is, std::size_t* image_channels) {
    AAFShape s;
    s.image_channels = read_u32(is);
    s.point_channels = read_u32(is);
    s.prev_channels = read_u32(is);
    s.out_channels = read_u32(is);
    const std::uint32_t gate_channels = read_u32(is);
    if (gate_channels != 1) {
        throw ParseError("AAF parameters: unsupported gate channel count " +
                         std::to_string(gate_channels));
    }
    AAFParams p;
    p.w_image = read_matrix(is, s.gate_inputs(), 1);
    p.b_image = read_vector(is, 1);
    p.w_point = read_matrix(is, s.gate_inputs(), 1);
    p.b_point = read_vector(is, 1);
    p.w_out = read_matrix(is, s.head_inputs(), s.out_channels);
    p.b_out = read_vector(is, s.out_channels);
    if (image_channels != nullptr) *image_channels = s.image_channels;
    return p;
}

}  // namespace mbdf
