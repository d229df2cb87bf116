#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace mbdf {

/// Dense row-major matrix of doubles. Rows index points, columns index
/// channels.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    Matrix transposed() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

using Vector = std::vector<double>;

/// out = X * W + b, with b broadcast over rows.
Matrix linear_forward(const Matrix& x, const Matrix& w, std::span<const double> b);

/// Plain product A * B.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Elementwise logistic function. Evaluated in a branch-stable form so that
/// large |x| saturates without overflow; outputs are clamped strictly inside
/// (0, 1).
Matrix sigmoid(const Matrix& x);
double sigmoid(double x);

Matrix concat_cols(const Matrix& a, const Matrix& b);

/// Columns [begin, begin + count).
Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t count);

/// Column sums, one entry per column.
Vector col_sums(const Matrix& m);

using ScalarFn = std::function<double(const Matrix&)>;

/// Central-difference gradient of f at x, one entry per element of x.
Matrix finite_diff_grad(const ScalarFn& f, const Matrix& x, double eps);

}  // namespace mbdf
