#include "monolip/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace monolip {

namespace {

void check_finite(const std::vector<double>& values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("matrix element is not finite");
        }
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("matrix dimensions must be positive");
    }
    if (!std::isfinite(fill)) {
        throw std::invalid_argument("matrix fill value is not finite");
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("matrix dimensions must be positive");
    }
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("matrix data size " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
    check_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double one_norm(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m.rows(); ++j) sum += std::abs(m(j, k));
        if (sum > worst) worst = sum;
    }
    return worst;
}

Vector column_abs_sums(const Matrix& m) {
    Vector sums(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.rows(); ++j) {
        for (std::size_t k = 0; k < m.cols(); ++k) sums[k] += std::abs(m(j, k));
    }
    return sums;
}

Matrix scale_columns(const Matrix& m, const Vector& scales) {
    if (scales.size() != m.cols()) {
        throw std::invalid_argument("scale vector length " + std::to_string(scales.size()) +
                                    " does not match column count " + std::to_string(m.cols()));
    }
    Matrix out = m;
    for (std::size_t j = 0; j < m.rows(); ++j) {
        for (std::size_t k = 0; k < m.cols(); ++k) out(j, k) = m(j, k) * scales[k];
    }
    return out;
}

Vector matvec(const Matrix& m, const Vector& v) {
    if (v.size() != m.cols()) {
        throw std::invalid_argument("matvec shape mismatch: " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + " with vector of length " +
                                    std::to_string(v.size()));
    }
    Vector out(m.rows(), 0.0);
    for (std::size_t j = 0; j < m.rows(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m.cols(); ++k) acc += m(j, k) * v[k];
        out[j] = acc;
    }
    return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
    if (v.size() != m.rows()) {
        throw std::invalid_argument("transposed matvec shape mismatch: " + std::to_string(m.rows()) +
                                    "x" + std::to_string(m.cols()) + " with vector of length " +
                                    std::to_string(v.size()));
    }
    Vector out(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.rows(); ++j) {
        for (std::size_t k = 0; k < m.cols(); ++k) out[k] += m(j, k) * v[j];
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul shape mismatch");
    }
    Matrix out(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Vector add(const Vector& v, const Vector& w) {
    if (v.size() != w.size()) {
        throw std::invalid_argument("vector add length mismatch");
    }
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + w[i];
    return out;
}

Vector axpy(double a, const Vector& v, const Vector& w) {
    if (v.size() != w.size()) {
        throw std::invalid_argument("axpy length mismatch");
    }
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = a * v[i] + w[i];
    return out;
}

double one_norm(const Vector& v) {
    double sum = 0.0;
    for (double x : v) sum += std::abs(x);
    return sum;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("frobenius_inner shape mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) acc += a.data()[i] * b.data()[i];
    return acc;
}

bool all_finite(const Vector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace monolip
