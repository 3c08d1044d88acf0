#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wpk/cdr.hpp"
#include "wpk/csr.hpp"
#include "wpk/dense.hpp"
#include "wpk/factor.hpp"
#include "wpk/operator.hpp"
#include "wpk/weighted.hpp"

namespace wpk {

enum class PartitionLayout { strips, grid };

struct PartitionSpec {
    std::size_t n_subdomains = 1;
    PartitionLayout layout = PartitionLayout::strips;
    /// grid layout only: p blocks along lattice rows, q along columns
    std::size_t grid_p = 1;
    std::size_t grid_q = 1;
    std::size_t overlap_layers = 1;
};

/// Overlapping subdomains as sorted dof lists (the rows of each R^s).
struct SubdomainMaps {
    std::size_t dof_count = 0;
    std::vector<std::vector<std::size_t>> subdomains;
    /// Number of subdomains containing each dof.
    std::vector<std::size_t> membership;
    std::size_t k0 = 0;
};

/// p x q with p * q = n and p <= q as close as possible (2x2, 2x4, 4x4, ...).
std::array<std::size_t, 2> near_square_grid(std::size_t n);

/// Lattice (row, column) of every dof of an assembled problem.
std::vector<std::array<std::size_t, 2>> lattice_coordinates(const AssembledCdr& cdr);

/// Strips are contiguous dof ranges of near-equal size (lattice-row bands for
/// lexicographically ordered dofs); grid needs `coords`. Overlap grows along
/// the sparsity graph of `graph`, `overlap_layers` times.
SubdomainMaps build_partition(const CsrMatrix& graph, const PartitionSpec& spec,
                              std::span<const std::array<std::size_t, 2>> coords = {});

/// dof -> list of subdomains, as JSON text.
std::string partition_json(const SubdomainMaps& maps);

enum class CoarseKind { pou_constants };

/// Sparse coarse vectors (the rows of R^0) with the Cholesky factor of
/// R^0 M R^0^T. Vectors whose Gram pivot falls below 1e-12 of the largest
/// diagonal are dropped.
struct CoarseSpace {
    std::vector<std::vector<std::size_t>> support;
    std::vector<Vector> values;
    std::vector<std::size_t> kept;  // source subdomain of each vector
    std::size_t dropped = 0;
    std::shared_ptr<const CholeskyFactor> gram_factor;

    std::size_t size() const noexcept { return support.size(); }
    Vector restrict_vector(std::span<const double> v) const;   // R^0 v
    Vector prolong(std::span<const double> c, std::size_t n) const;  // R^0^T c
    DenseMatrix dense_basis(std::size_t n) const;  // rows = coarse vectors
};

CoarseSpace build_coarse_space(const SubdomainMaps& maps, const CsrMatrix& m_matrix,
                               CoarseKind kind = CoarseKind::pou_constants);

enum class SchwarzMode { one_level_sym, two_level_sym, one_level_nonsym };

std::string to_string(SchwarzMode mode);

/// Largest subdomain that is factored densely.
inline constexpr std::size_t kMaxSubdomainSize = 4096;

/// Additive Schwarz preconditioner. Two-level:
///   H = Pi sum_s R^s^T (R^s M R^s^T)^{-1} R^s Pi^T + R^0^T (R^0 M R^0^T)^{-1} R^0
///   Pi = I - R^0^T (R^0 M R^0^T)^{-1} R^0 M.
/// The non-symmetric mode factors R^s A R^s^T with LU instead.
class SchwarzPreconditioner {
public:
    SchwarzPreconditioner(const CsrMatrix& matrix, SubdomainMaps maps, SchwarzMode mode);

    SchwarzMode mode() const noexcept { return mode_; }
    std::size_t dim() const noexcept { return n_; }
    const SubdomainMaps& maps() const noexcept { return *maps_; }
    const CoarseSpace* coarse() const noexcept { return coarse_.get(); }
    /// tau of the spectral coarse-space criterion; recorded for reports only.
    double tau = 0.15;

    void apply_into(std::span<const double> x, std::span<double> y) const;
    Vector apply(std::span<const double> x) const;
    /// Pi v
    Vector project(std::span<const double> v) const;

    LinearOperator op() const;
    /// SPD flag set for the symmetric modes.
    PreconditionerHandle handle(bool validate = true) const;

private:
    struct Local;
    void local_sum(std::span<const double> x, std::span<double> y) const;

    std::size_t n_ = 0;
    SchwarzMode mode_;
    std::shared_ptr<const CsrMatrix> matrix_;
    std::shared_ptr<const SubdomainMaps> maps_;
    std::shared_ptr<const std::vector<Local>> locals_;
    std::shared_ptr<const CoarseSpace> coarse_;
};

/// lambda_max / lambda_min of H M via the eigenvalues of L_H^T M L_H with
/// H = L_H L_H^T (densified).
double condition_number(const LinearOperator& h, const CsrMatrix& m_matrix);

}  // namespace wpk
