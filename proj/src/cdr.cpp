#include "wpk/cdr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wpk/error.hpp"

namespace wpk {

namespace {

constexpr std::size_t kNoDof = std::numeric_limits<std::size_t>::max();
constexpr double kDivStep = 1e-6;

}  // namespace

CdrProblemSpec rotating_flow_coefficients(std::size_t m, double nu, double c0) {
    CdrProblemSpec spec;
    spec.m = m;
    spec.nu = [nu](double, double) { return nu; };
    spec.c0 = [c0](double, double) { return c0; };
    spec.a = [](double x, double y) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return std::array<double, 2>{-two_pi * (y - 0.1), two_pi * (x - 0.5)};
    };
    spec.f = [](double x, double y) {
        const double dx = x - 0.5, dy = y - 0.1;
        return std::exp(-10.0 * (dx * dx + dy * dy));
    };
    return spec;
}

double divergence(const VectorField& a, double x, double y) {
    const double dax = a(x + kDivStep, y)[0] - a(x - kDivStep, y)[0];
    const double day = a(x, y + kDivStep)[1] - a(x, y - kDivStep)[1];
    return (dax + day) / (2.0 * kDivStep);
}

double StructuredMesh::signed_area(std::size_t t) const {
    const auto& p0 = vertices[triangles[t][0]];
    const auto& p1 = vertices[triangles[t][1]];
    const auto& p2 = vertices[triangles[t][2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

StructuredMesh build_mesh(std::size_t m) {
    if (m < 2) throw InvalidArgument("build_mesh: m must be at least 2");
    StructuredMesh mesh;
    mesh.m = m;
    const std::size_t side = m + 1;
    const double h = 1.0 / static_cast<double>(m);
    mesh.vertices.reserve(side * side);
    mesh.boundary.reserve(side * side);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            mesh.vertices.push_back({static_cast<double>(c) * h, static_cast<double>(r) * h});
            mesh.boundary.push_back(r == 0 || c == 0 || r == m || c == m);
        }
    mesh.triangles.reserve(2 * m * m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t v00 = r * side + c, v10 = v00 + 1;
            const std::size_t v01 = v00 + side, v11 = v01 + 1;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    return mesh;
}

CsrMatrix AssembledCdr::system_matrix() const { return combine(1.0, m_matrix, 1.0, n_matrix); }

std::array<std::size_t, 2> AssembledCdr::lattice(std::size_t dof) const {
    const std::size_t v = dof_vertex.at(dof);
    return {v / (m + 1), v % (m + 1)};
}

AssembledCdr assemble(const CdrProblemSpec& spec) {
    if (!spec.nu || !spec.c0 || !spec.a || !spec.f) throw InvalidArgument("assemble: missing coefficient callback");
    const StructuredMesh mesh = build_mesh(spec.m);
    const bool eliminate = spec.bc == BoundaryMode::elimination;

    AssembledCdr out;
    out.m = spec.m;
    std::vector<std::size_t> vertex_dof(mesh.vertices.size(), kNoDof);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (eliminate && mesh.boundary[v]) continue;
        vertex_dof[v] = out.dof_vertex.size();
        out.dof_vertex.push_back(v);
    }
    out.dof_count = out.dof_vertex.size();
    out.rhs.assign(out.dof_count, 0.0);

    std::vector<Triplet> m_entries, n_entries;
    m_entries.reserve(mesh.triangles.size() * 9);
    n_entries.reserve(mesh.triangles.size() * 6);

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& p0 = mesh.vertices[tri[0]];
        const auto& p1 = mesh.vertices[tri[1]];
        const auto& p2 = mesh.vertices[tri[2]];
        const double area = mesh.signed_area(t);
        const double a2 = 2.0 * area;
        const std::array<std::array<double, 2>, 3> grad{{
            {(p1[1] - p2[1]) / a2, (p2[0] - p1[0]) / a2},
            {(p2[1] - p0[1]) / a2, (p0[0] - p2[0]) / a2},
            {(p0[1] - p1[1]) / a2, (p1[0] - p0[0]) / a2},
        }};

        // mid-edge quadrature: point k is the midpoint of the edge (k, k+1)
        double k_loc[3][3] = {};
        double m_loc[3][3] = {};
        double t_loc[3][3] = {};
        double b_loc[3] = {};
        const double w = area / 3.0;
        for (std::size_t q = 0; q < 3; ++q) {
            const std::size_t i0 = q, i1 = (q + 1) % 3;
            const auto& pa = mesh.vertices[tri[i0]];
            const auto& pb = mesh.vertices[tri[i1]];
            const double x = 0.5 * (pa[0] + pb[0]), y = 0.5 * (pa[1] + pb[1]);
            double phi[3] = {0.0, 0.0, 0.0};
            phi[i0] = 0.5;
            phi[i1] = 0.5;

            const double nu = spec.nu(x, y);
            const auto av = spec.a(x, y);
            const double reaction = spec.c0(x, y) + 0.5 * divergence(spec.a, x, y);
            if (!(nu > 0.0)) throw InvalidArgument("assemble: nu must be positive");
            if (!(reaction >= 0.0)) throw InvalidArgument("assemble: c0 + div(a)/2 must be nonnegative");
            const double fv = spec.f(x, y);

            for (std::size_t i = 0; i < 3; ++i) {
                b_loc[i] += w * fv * phi[i];
                for (std::size_t j = 0; j < 3; ++j) {
                    k_loc[i][j] += w * nu * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
                    m_loc[i][j] += w * reaction * phi[i] * phi[j];
                    t_loc[i][j] += w * (av[0] * grad[j][0] + av[1] * grad[j][1]) * phi[i];
                }
            }
        }

        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t di = vertex_dof[tri[i]];
            if (di == kNoDof) continue;
            out.rhs[di] += b_loc[i];
            for (std::size_t j = 0; j < 3; ++j) {
                const std::size_t dj = vertex_dof[tri[j]];
                if (dj == kNoDof) continue;
                m_entries.push_back({di, dj, k_loc[i][j] + m_loc[i][j]});
                if (j > i) {
                    const double s = 0.5 * (t_loc[i][j] - t_loc[j][i]);
                    n_entries.push_back({di, dj, s});
                    n_entries.push_back({dj, di, -s});
                }
            }
        }
    }

    out.m_matrix = CsrMatrix::from_triplets(out.dof_count, out.dof_count, std::move(m_entries));
    out.n_matrix = CsrMatrix::from_triplets(out.dof_count, out.dof_count, std::move(n_entries));

    if (!eliminate) {
        const Vector diag = out.m_matrix.diagonal();
        double max_diag = 0.0;
        for (double d : diag) max_diag = std::max(max_diag, std::abs(d));
        std::vector<Triplet> penalty;
        for (std::size_t d = 0; d < out.dof_count; ++d)
            if (mesh.boundary[out.dof_vertex[d]]) penalty.push_back({d, d, spec.penalty_factor * max_diag});
        out.m_matrix = combine(1.0, out.m_matrix, 1.0,
                               CsrMatrix::from_triplets(out.dof_count, out.dof_count, std::move(penalty)));
    }
    return out;
}

}  // namespace wpk
