#include "wpk/csr.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "wpk/error.hpp"

namespace wpk {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != rows_ + 1)
        throw DimensionMismatch("CsrMatrix row_offsets", rows_ + 1, row_offsets_.size());
    if (col_indices_.size() != values_.size())
        throw DimensionMismatch("CsrMatrix values", col_indices_.size(), values_.size());
    if (row_offsets_.front() != 0 || row_offsets_.back() != values_.size())
        throw InvalidArgument("CsrMatrix: row_offsets must start at 0 and end at nnz");
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1])
            throw InvalidArgument("CsrMatrix: row_offsets must be nondecreasing");
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k] >= cols_) throw InvalidArgument("CsrMatrix: column index out of range");
            if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
                throw InvalidArgument("CsrMatrix: column indices must be strictly increasing");
        }
    }
    if (!all_finite(values_)) throw InvalidArgument("CsrMatrix: non-finite value");
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    for (const auto& t : entries)
        if (t.row >= rows || t.col >= cols) throw InvalidArgument("CsrMatrix: triplet index out of range");
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    m.col_indices_.reserve(entries.size());
    m.values_.reserve(entries.size());
    std::vector<std::size_t> counts(rows, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& t = entries[k];
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            m.values_.back() += t.value;
        } else {
            m.col_indices_.push_back(t.col);
            m.values_.push_back(t.value);
            ++counts[t.row];
        }
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_offsets_[i + 1] = m.row_offsets_[i] + counts[i];
    if (!all_finite(m.values_)) throw InvalidArgument("CsrMatrix: non-finite value");
    return m;
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& a, double drop_below) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0 && std::abs(a(i, j)) >= drop_below) t.push_back({i, j, a(i, j)});
    return from_triplets(a.rows(), a.cols(), std::move(t));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vector CsrMatrix::diagonal() const {
    Vector d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

void CsrMatrix::multiply_into(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_) throw DimensionMismatch("spmv", cols_, x.size());
    if (y.size() != rows_) throw DimensionMismatch("spmv output", rows_, y.size());
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            s += values_[k] * x[col_indices_[k]];
        y[i] = s;
    }
}

Vector CsrMatrix::multiply(std::span<const double> x) const {
    Vector y(rows_);
    multiply_into(x, y);
    return y;
}

DenseMatrix CsrMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            d(i, col_indices_[k]) += values_[k];
    return d;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            t.push_back({col_indices_[k], i, values_[k]});
    return from_triplets(cols_, rows_, std::move(t));
}

std::vector<Triplet> CsrMatrix::triplets() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            t.push_back({i, col_indices_[k], values_[k]});
    return t;
}

DenseMatrix CsrMatrix::extract_dense(std::span<const std::size_t> indices) const {
    const std::size_t n = indices.size();
    std::unordered_map<std::size_t, std::size_t> local;
    local.reserve(n * 2);
    for (std::size_t a = 0; a < n; ++a) {
        if (indices[a] >= rows_ || indices[a] >= cols_)
            throw InvalidArgument("CsrMatrix::extract_dense: index out of range");
        local.emplace(indices[a], a);
    }
    DenseMatrix d(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t i = indices[a];
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            auto it = local.find(col_indices_[k]);
            if (it != local.end()) d(a, it->second) = values_[k];
        }
    }
    return d;
}

Vector spmv(const CsrMatrix& m, std::span<const double> x) { return m.multiply(x); }

CsrMatrix combine(double a, const CsrMatrix& lhs, double b, const CsrMatrix& rhs) {
    if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols())
        throw DimensionMismatch("combine", lhs.rows() * lhs.cols(), rhs.rows() * rhs.cols());
    std::vector<Triplet> t;
    t.reserve(lhs.nnz() + rhs.nnz());
    for (auto e : lhs.triplets()) t.push_back({e.row, e.col, a * e.value});
    for (auto e : rhs.triplets()) t.push_back({e.row, e.col, b * e.value});
    return CsrMatrix::from_triplets(lhs.rows(), lhs.cols(), std::move(t));
}

}  // namespace wpk
