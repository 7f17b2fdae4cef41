#pragma once

#include <cstddef>
#include <vector>

namespace monolip {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit floats. The weight convention throughout
/// the library is rows = layer output dimension, cols = layer input dimension,
/// so a column collects every weight attached to a single input.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Operator norm induced by the vector 1-norm: the maximum absolute column sum.
double one_norm(const Matrix& m);

/// Sum of absolute values, one entry per column.
Vector column_abs_sums(const Matrix& m);

/// result(j,k) = m(j,k) * scales[k]. Throws on length mismatch.
Matrix scale_columns(const Matrix& m, const Vector& scales);

Vector matvec(const Matrix& m, const Vector& v);

/// m^T * v without materializing the transpose.
Vector matvec_transposed(const Matrix& m, const Vector& v);

Matrix matmul(const Matrix& a, const Matrix& b);

Vector add(const Vector& v, const Vector& w);

/// a*v + w
Vector axpy(double a, const Vector& v, const Vector& w);

double one_norm(const Vector& v);

double frobenius_inner(const Matrix& a, const Matrix& b);

bool all_finite(const Vector& v);

}  // namespace monolip
