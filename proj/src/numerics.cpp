#include "mbdf/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mbdf/errors.hpp"

namespace mbdf {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw DimensionMismatch("matrix storage has " + std::to_string(values_.size()) +
                                " values, expected " + std::to_string(rows_ * cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw DimensionMismatch("ragged matrix literal");
        }
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("matmul: " + shape(a) + " * " + shape(b));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Matrix linear_forward(const Matrix& x, const Matrix& w, std::span<const double> b) {
    if (x.cols() != w.rows()) {
        throw DimensionMismatch("linear_forward: input " + shape(x) + " vs weight " + shape(w));
    }
    if (b.size() != w.cols()) {
        throw DimensionMismatch("linear_forward: bias length " + std::to_string(b.size()) +
                                " vs weight " + shape(w));
    }
    Matrix out = matmul(x, w);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out(i, j) += b[j];
        }
    }
    return out;
}

double sigmoid(double x) {
    // exp of a non-positive argument never overflows.
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (s < lo) return lo;
    if (s > hi) return hi;
    return s;
}

Matrix sigmoid(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    auto src = x.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = sigmoid(src[i]);
    }
    return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("concat_cols: " + shape(a) + " and " + shape(b));
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        auto ra = a.row(i);
        auto rb = b.row(i);
        std::copy(ra.begin(), ra.end(), dst.begin());
        std::copy(rb.begin(), rb.end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t count) {
    if (begin + count > m.cols()) {
        throw DimensionMismatch("slice_cols: columns [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") of " + shape(m));
    }
    Matrix out(m.rows(), count);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            out(i, j) = m(i, begin + j);
        }
    }
    return out;
}

Vector col_sums(const Matrix& m) {
    Vector s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            s[j] += m(i, j);
        }
    }
    return s;
}

Matrix finite_diff_grad(const ScalarFn& f, const Matrix& x, double eps) {
    if (!(eps > 0.0)) {
        throw InvalidArgument("finite_diff_grad: eps must be positive");
    }
    Matrix grad(x.rows(), x.cols());
    Matrix probe = x;
    auto p = probe.values();
    auto g = grad.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + eps;
        const double up = f(probe);
        p[i] = saved - eps;
        const double down = f(probe);
        p[i] = saved;
        g[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

}  // namespace mbdf
