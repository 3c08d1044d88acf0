#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wpk/dense.hpp"

namespace wpk {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols);

    /// Builds from coordinate entries. Duplicates are summed in input order,
    /// so two triplet lists that are exact negations of each other produce
    /// exactly negated matrices.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    static CsrMatrix from_dense(const DenseMatrix& a, double drop_below = 0.0);
    static CsrMatrix identity(std::size_t n);

    /// Validates the raw arrays against the storage invariants.
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
              std::vector<std::size_t> col_indices, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    Vector diagonal() const;

    void multiply_into(std::span<const double> x, std::span<double> y) const;
    Vector multiply(std::span<const double> x) const;
    DenseMatrix to_dense() const;
    CsrMatrix transpose() const;
    std::vector<Triplet> triplets() const;

    /// Principal submatrix on the given (sorted or unsorted) index list.
    DenseMatrix extract_dense(std::span<const std::size_t> indices) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

Vector spmv(const CsrMatrix& m, std::span<const double> x);

/// a*A + b*B with the union sparsity pattern.
CsrMatrix combine(double a, const CsrMatrix& lhs, double b, const CsrMatrix& rhs);

}  // namespace wpk
