#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wpk/dense.hpp"

namespace wpk {

/// Lower-triangular L with L L^T equal to the factored matrix.
class CholeskyFactor {
public:
    explicit CholeskyFactor(DenseMatrix lower) : lower_(std::move(lower)) {}

    const DenseMatrix& lower() const noexcept { return lower_; }
    std::size_t dim() const noexcept { return lower_.rows(); }

    /// Solves (L L^T) x = b.
    Vector solve(std::span<const double> b) const;
    /// L^{-1} b
    Vector solve_lower(std::span<const double> b) const;
    /// L^{-T} b
    Vector solve_upper(std::span<const double> b) const;
    DenseMatrix reconstruct() const;

private:
    DenseMatrix lower_;
};

/// Throws NotPositiveDefinite when a pivot falls to dim * eps * max diagonal.
/// Only the lower triangle of `s` is read.
CholeskyFactor cholesky(const DenseMatrix& s);

/// Row-pivoted LU factorization P A = L U, stored packed.
class LuFactor {
public:
    LuFactor(DenseMatrix packed, std::vector<std::size_t> perm)
        : packed_(std::move(packed)), perm_(std::move(perm)) {}

    std::size_t dim() const noexcept { return packed_.rows(); }
    Vector solve(std::span<const double> b) const;

private:
    DenseMatrix packed_;
    std::vector<std::size_t> perm_;
};

/// Throws Singular on an exactly zero (or subnormal-relative) pivot.
LuFactor lu_factor(const DenseMatrix& a);
Vector lu_solve(const DenseMatrix& a, std::span<const double> b);

/// Dense inverse of a symmetric positive definite matrix via Cholesky.
DenseMatrix spd_inverse(const DenseMatrix& s);
/// Dense inverse of a general nonsingular matrix via LU.
DenseMatrix inverse(const DenseMatrix& a);

}  // namespace wpk
