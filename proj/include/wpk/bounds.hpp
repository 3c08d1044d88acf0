#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wpk/cdr.hpp"
#include "wpk/dense.hpp"
#include "wpk/operator.hpp"
#include "wpk/weighted.hpp"

namespace wpk {

/// A = M + N with M = (A + A^T)/2 and N = (A - A^T)/2.
struct HermitianSplit {
    DenseMatrix m_part;
    DenseMatrix n_part;
};

HermitianSplit split(const DenseMatrix& a);
/// Densifies first; throws DensifyLimit above 4096.
HermitianSplit split(const LinearOperator& a);
/// From separately assembled parts (no densification of the sum).
HermitianSplit split(const CsrMatrix& m_part, const CsrMatrix& n_part);

/// Largest |t| over the eigenvalues +-i t of M^{-1} N, as the largest singular
/// value of L^{-1} N L^{-T} with M = L L^T. Throws NotPositiveDefinite.
double spectral_radius_skew(const HermitianSplit& s);

/// Distance from 0 to the W-field of values of B, over complex vectors.
/// For real B the field is symmetric about the real axis, so the distance is
/// the distance to the interval of eigenvalues of the W-symmetric part.
double fov_distance(const DenseMatrix& b, const DenseMatrix& w);
double fov_distance(const LinearOperator& b, const WeightOperator& w);

/// Same quantity from the rotation characterization
///   max over theta of lambda_min( Hermitian part of e^{i theta} B ),
/// sampled on `angles` angles with a golden-section refinement, each complex
/// Hermitian eigenproblem realized as its 2n x 2n real embedding.
double fov_distance_rotation(const DenseMatrix& b, const DenseMatrix& w, std::size_t angles = 256);

struct BoundReport {
    std::optional<double> lambda_min;  // extreme eigenvalues of H M(A)
    std::optional<double> lambda_max;
    std::optional<double> kappa;
    std::optional<double> rho;
    std::optional<double> fov_distance;
    std::optional<double> op_norm;  // ||A H||_W
    std::optional<double> elman;    // sqrt(1 - d^2 / ||AH||_W^2)
    std::optional<double> bound1;
    std::optional<double> bound2;
    std::optional<double> bound3;
    std::optional<double> alpha_analytic;
    /// Best value of inf <AHy,y>_W^2 / (||AHy||_W^2 ||y||_W^2) found, and the
    /// number of starts used.
    std::optional<double> bound1_infimum;
    std::size_t bound1_starts = 0;
    /// Reasons for absent fields.
    std::vector<std::string> notes;

    bool operator==(const BoundReport&) const = default;
};

struct BoundOptions {
    /// W is H itself; enables bound2 and bound3. The dense overload also
    /// detects entrywise equal W and H.
    bool weight_is_preconditioner = false;
    std::size_t bound1_random_starts = 64;
    std::size_t bound1_max_dim = 512;
    std::uint64_t seed = 0xC0FFEE;
};

/// Every quantity that applies to (A, H, W). Missing preconditions leave the
/// corresponding fields empty with a note rather than throwing.
BoundReport compute_bound_report(const DenseMatrix& a, const DenseMatrix& h, bool h_spd, const DenseMatrix& w,
                                 const BoundOptions& opt = {});
BoundReport compute_bound_report(const LinearOperator& a, const PreconditionerHandle& h, const WeightOperator& w,
                                 const BoundOptions& opt = {});
/// W = H.
BoundReport compute_bound_report(const LinearOperator& a, const PreconditionerHandle& h, BoundOptions opt = {});

/// inf over unit v of (v^T C v)^2 / ||C v||^2 by projected gradient descent on
/// the sphere from the given number of random starts plus the eigenvector of
/// the smallest eigenvalue of (C + C^T)/2.
double min_rayleigh_ratio(const DenseMatrix& c, std::size_t random_starts, std::uint64_t seed);

/// sqrt(1 - (1/kappa) / (1 + rho^2))
double contraction_from_kappa_rho(double kappa, double rho);

/// Smallest i with c^i < target; 1 when c == 0, empty when c >= 1.
std::optional<std::size_t> predicted_iterations(double contraction, double target = 1e-6);

struct JohnsonCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = smallest eigenvalue of the pencil (M(A^{-1}), M(A)^{-1}),
/// rhs = 1 / (1 + rho(M^{-1} N)^2).
JohnsonCheck johnson_identity_check(const HermitianSplit& s, const DenseMatrix& a_inv);

/// ||a||_inf / (2 sqrt(inf nu * inf(c0 + div(a)/2))) sampled at the mesh
/// vertices and the four corners.
double analytic_rho_bound(const CdrProblemSpec& spec);

}  // namespace wpk
