#include "wpk/dense.hpp"

#include <algorithm>
#include <cmath>

#include "wpk/error.hpp"

namespace wpk {

namespace {

void check_same(const char* where, std::size_t a, std::size_t b) {
    if (a != b) throw DimensionMismatch(where, a, b);
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
    check_same("dot", x.size(), y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) {
    // scaled accumulation would be safer for extreme magnitudes; inputs here
    // are residuals of O(1) problems
    return std::sqrt(dot(x, x));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_same("axpy", x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
    for (double& v : x) v *= a;
}

Vector add(std::span<const double> x, std::span<const double> y) {
    check_same("add", x.size(), y.size());
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

Vector subtract(std::span<const double> x, std::span<const double> y) {
    check_same("subtract", x.size(), y.size());
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

Vector scaled(double a, std::span<const double> x) {
    Vector r(x.begin(), x.end());
    scale(a, r);
    return r;
}

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw InvalidArgument("DenseMatrix: non-finite fill value");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) throw DimensionMismatch("DenseMatrix", rows * cols, data_.size());
    if (!all_finite(data_)) throw InvalidArgument("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    if (!all_finite(d)) throw InvalidArgument("DenseMatrix: non-finite entry");
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionMismatch("DenseMatrix::from_rows", c, row.size());
        data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
}

Vector DenseMatrix::column(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> v) {
    check_same("DenseMatrix::set_column", rows_, v.size());
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Vector DenseMatrix::multiply(std::span<const double> x) const {
    check_same("DenseMatrix::multiply", cols_, x.size());
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* a = data_.data() + i * cols_;
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += a[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector DenseMatrix::multiply_transpose(std::span<const double> x) const {
    check_same("DenseMatrix::multiply_transpose", rows_, x.size());
    Vector y(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* a = data_.data() + i * cols_;
        const double xi = x[i];
        for (std::size_t j = 0; j < cols_; ++j) y[j] += a[j] * xi;
    }
    return y;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double DenseMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double DenseMatrix::asymmetry() const {
    if (!square()) throw DimensionMismatch("DenseMatrix::asymmetry", rows_, cols_);
    const double scale_ref = max_abs();
    if (scale_ref == 0.0) return 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i + 1; j < cols_; ++j)
            d = std::max(d, std::abs((*this)(i, j) - (*this)(j, i)));
    return d / scale_ref;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("DenseMatrix product", a.cols(), b.rows());
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("DenseMatrix sum", a.rows() * a.cols(), b.rows() * b.cols());
    std::vector<double> d(a.entries().begin(), a.entries().end());
    auto be = b.entries();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += be[i];
    return DenseMatrix(a.rows(), a.cols(), std::move(d));
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    return a + (-1.0) * b;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
    std::vector<double> d(a.entries().begin(), a.entries().end());
    for (double& v : d) v *= s;
    return DenseMatrix(a.rows(), a.cols(), std::move(d));
}

}  // namespace wpk
