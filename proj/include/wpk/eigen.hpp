#pragma once

#include <cstddef>

#include "wpk/dense.hpp"
#include "wpk/factor.hpp"

namespace wpk {

struct SymEigResult {
    Vector values;         // ascending
    DenseMatrix vectors;   // column k pairs with values[k]
    std::size_t sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices (round-robin ordering).
/// Stops when the off-diagonal Frobenius norm drops below 1e-12 * ||S||_F;
/// throws NonConvergence after 100 sweeps. The lower triangle is mirrored
/// before iterating.
SymEigResult jacobi_eig(const DenseMatrix& s, bool want_vectors = true);

/// Eigenvalues only, through LAPACK dsyevd (lower triangle). Throws
/// NonConvergence if LAPACK reports failure.
Vector sym_eigenvalues(const DenseMatrix& s);

/// Jacobi when eigenvectors are wanted; sym_eigenvalues otherwise.
SymEigResult sym_eig(const DenseMatrix& s, bool want_vectors = true);

/// Eigenvalues (ascending) of the pencil S y = lambda M y with M SPD, by
/// Cholesky reduction M = L L^T and sym_eig(L^{-1} S L^{-T}).
Vector gen_sym_eig(const DenseMatrix& s, const DenseMatrix& m);

/// L^{-1} A L^{-T} for a Cholesky factor L and any square A.
DenseMatrix inverse_congruence(const CholeskyFactor& factor, const DenseMatrix& a);

}  // namespace wpk
