#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dismantler {

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows * cols) throw ShapeError("matrix data size does not match shape");
    }

    static Matrix ones(std::size_t rows, std::size_t cols) { return {rows, cols, 1.0}; }
    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double &operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> &data() { return data_; }
    const std::vector<double> &data() const { return data_; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Matrix &o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    std::string shape_string() const { return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")"; }

    bool operator==(const Matrix &) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// out = a * b (overwrites out).
inline void matmul_into(const Matrix &a, const Matrix &b, Matrix &out) {
    if (a.cols() != b.rows()) throw ShapeError("matmul " + a.shape_string() + " * " + b.shape_string());
    out = Matrix(a.rows(), b.cols());
    const std::size_t n = a.rows(), kk = a.cols(), m = b.cols();
    const double *pa = a.data().data(), *pb = b.data().data();
    double *po = out.data().data();
    if (m == 1) {  // matrix-vector
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kk; ++k) acc += pa[i * kk + k] * pb[k];
            po[i] = acc;
        }
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double *__restrict orow = po + i * m;
        for (std::size_t k = 0; k < kk; ++k) {
            const double aik = pa[i * kk + k];
            if (aik == 0.0) continue;
            const double *__restrict brow = pb + k * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
        }
    }
}

inline Matrix matmul(const Matrix &a, const Matrix &b) {
    Matrix out;
    matmul_into(a, b, out);
    return out;
}

/// a^T * b without materializing the transpose.
inline Matrix matmul_tn(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_tn " + a.shape_string() + "^T * " + b.shape_string());
    Matrix out(a.cols(), b.cols());
    const std::size_t rows = a.rows(), n = a.cols(), m = b.cols();
    const double *pa = a.data().data(), *pb = b.data().data();
    double *po = out.data().data();
    if (m == 1) {
        for (std::size_t k = 0; k < rows; ++k) {
            const double bk = pb[k];
            const double *__restrict arow = pa + k * n;
            for (std::size_t i = 0; i < n; ++i) po[i] += arow[i] * bk;
        }
        return out;
    }
    for (std::size_t k = 0; k < rows; ++k) {
        const double *arow = pa + k * n;
        const double *__restrict brow = pb + k * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double *__restrict orow = po + i * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

/// a * b^T.
inline Matrix matmul_nt(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_nt " + a.shape_string() + " * " + b.shape_string() + "^T");
    if (a.cols() == 1) {  // outer product
        Matrix out(a.rows(), b.rows());
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double ai = a(i, 0);
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.rows(); ++j) orow[j] = ai * b(j, 0);
        }
        return out;
    }
    Matrix out;
    matmul_into(a, b.transposed(), out);
    return out;
}

inline double frobenius_sq_diff(const Matrix &a, const Matrix &b) {
    if (!a.same_shape(b)) throw ShapeError("frobenius shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return acc;
}

} // namespace dismantler
