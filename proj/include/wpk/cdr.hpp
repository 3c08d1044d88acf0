#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "wpk/csr.hpp"
#include "wpk/dense.hpp"

namespace wpk {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double)>;

enum class BoundaryMode { elimination, penalization };

/// c0 u + div(a u) - div(nu grad u) = f on the unit square, u = 0 on the
/// boundary, discretized with P1 elements at h = 1/m.
struct CdrProblemSpec {
    std::size_t m = 10;
    ScalarField nu;
    ScalarField c0;
    VectorField a;
    ScalarField f;
    BoundaryMode bc = BoundaryMode::elimination;
    /// Penalization adds penalty_factor * max|diag M| to boundary diagonals of M.
    double penalty_factor = 1e10;
};

/// Constant nu and c0 with the rotating convection field centred at (0.5, 0.1)
/// and a Gaussian source at the same point.
CdrProblemSpec rotating_flow_coefficients(std::size_t m, double nu = 1.0, double c0 = 1.0);

/// div a by central differences of step 1e-6.
double divergence(const VectorField& a, double x, double y);

struct StructuredMesh {
    std::size_t m = 0;
    std::vector<std::array<double, 2>> vertices;   // index = row * (m + 1) + col
    std::vector<std::array<std::size_t, 3>> triangles;  // counter-clockwise
    std::vector<bool> boundary;

    double h() const noexcept { return 1.0 / static_cast<double>(m); }
    double signed_area(std::size_t t) const;
};

/// (m+1)^2 lattice vertices; every square is cut from bottom-left to top-right.
StructuredMesh build_mesh(std::size_t m);

struct AssembledCdr {
    CsrMatrix m_matrix;  // symmetric part
    CsrMatrix n_matrix;  // skew part
    Vector rhs;
    std::size_t dof_count = 0;
    std::size_t m = 0;
    /// Mesh vertex of each dof; lexicographic (row, column) order.
    std::vector<std::size_t> dof_vertex;

    /// M + N
    CsrMatrix system_matrix() const;
    /// Lattice (row, column) of a dof.
    std::array<std::size_t, 2> lattice(std::size_t dof) const;
};

/// Throws InvalidArgument when nu <= 0 or c0 + div(a)/2 < 0 at a quadrature point.
AssembledCdr assemble(const CdrProblemSpec& spec);

}  // namespace wpk
