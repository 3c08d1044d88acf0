#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "support/fem_error.hpp"
#include "support/oracles.hpp"
#include "wpk/bounds.hpp"
#include "wpk/cdr.hpp"
#include "wpk/error.hpp"
#include "wpk/factor.hpp"

using namespace wpk;
using Catch::Approx;

namespace {

ScalarField constant(double v) {
    return [v](double, double) { return v; };
}

VectorField no_flow() {
    return [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
}

CdrProblemSpec poisson(std::size_t m, ScalarField f) {
    CdrProblemSpec s;
    s.m = m;
    s.nu = constant(1.0);
    s.c0 = constant(0.0);
    s.a = no_flow();
    s.f = std::move(f);
    return s;
}

}  // namespace

TEST_CASE("structured mesh counts, areas and orientation") {
    const StructuredMesh m2 = build_mesh(2);
    CHECK(m2.vertices.size() == 9);
    CHECK(m2.triangles.size() == 8);
    CHECK(build_mesh(10).vertices.size() == 121);
    const StructuredMesh m3 = build_mesh(3);
    for (std::size_t t = 0; t < m3.triangles.size(); ++t) CHECK(m3.signed_area(t) == Approx(1.0 / 18.0));
    std::size_t boundary = 0;
    for (bool b : m3.boundary) boundary += b;
    CHECK(boundary == 12);
    CHECK_THROWS_AS(build_mesh(1), InvalidArgument);
}

TEST_CASE("rotating flow coefficient fields") {
    const CdrProblemSpec s = rotating_flow_coefficients(10);
    CHECK(s.f(0.5, 0.1) == 1.0);
    const auto a0 = s.a(0.5, 0.1);
    CHECK(a0[0] == 0.0);
    CHECK(a0[1] == 0.0);
    const auto a1 = s.a(1.0, 1.0);
    CHECK(a1[0] == Approx(-2 * std::numbers::pi * 0.9));
    CHECK(a1[1] == Approx(2 * std::numbers::pi * 0.5));
    CHECK(std::hypot(a1[0], a1[1]) == Approx(6.469).epsilon(1e-3));
    CHECK(std::abs(divergence(s.a, 0.3, 0.7)) <= 1e-8);
}

TEST_CASE("P1 Laplacian on the smallest mesh") {
    const AssembledCdr c = assemble(poisson(2, constant(1.0)));
    REQUIRE(c.dof_count == 1);
    CHECK(c.m_matrix.at(0, 0) == Approx(4.0).epsilon(1e-14));
    CHECK(c.n_matrix.at(0, 0) == 0.0);
    // load: integral of the hat function = (1/3) * patch area = (1/3) * 6 * (1/8)
    CHECK(c.rhs[0] == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("zero convection gives an exactly zero skew part") {
    CdrProblemSpec s = rotating_flow_coefficients(7);
    s.a = no_flow();
    const AssembledCdr c = assemble(s);
    for (double v : c.n_matrix.values()) CHECK(v == 0.0);
}

TEST_CASE("assembled parts are exactly symmetric and skew") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(9));
    const DenseMatrix m = c.m_matrix.to_dense(), n = c.n_matrix.to_dense();
    CHECK((m - m.transpose()).max_abs() == 0.0);
    CHECK((n + n.transpose()).max_abs() == 0.0);
    CHECK_NOTHROW(cholesky(m));

    oracle::Rng rng(oracle::kSeed);
    for (int t = 0; t < 20; ++t) {
        const Vector x = rng.vector(c.dof_count);
        CHECK(std::abs(dot(x, n.multiply(x))) <= 1e-13 * n.max_abs() * dot(x, x));
        CHECK(dot(x, m.multiply(x)) > 0.0);
    }
}

TEST_CASE("dof ordering is lexicographic over interior lattice points") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(5));
    REQUIRE(c.dof_count == 16);
    for (std::size_t d = 0; d < c.dof_count; ++d) {
        const auto rc = c.lattice(d);
        CHECK(rc[0] == d / 4 + 1);
        CHECK(rc[1] == d % 4 + 1);
    }
}

TEST_CASE("integrals of constants through the assembled pieces") {
    // penalization with zero weight keeps every vertex: 1^T M 1 = integral of c0
    CdrProblemSpec s = poisson(6, constant(1.0));
    s.c0 = constant(2.5);
    s.bc = BoundaryMode::penalization;
    s.penalty_factor = 0.0;
    const AssembledCdr c = assemble(s);
    REQUIRE(c.dof_count == 49);
    const Vector ones(c.dof_count, 1.0);
    CHECK(dot(ones, c.m_matrix.multiply(ones)) == Approx(2.5).epsilon(1e-13));
    double load = 0.0;
    for (double v : c.rhs) load += v;
    CHECK(load == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("penalized boundary keeps the skew part skew") {
    CdrProblemSpec s = rotating_flow_coefficients(6);
    s.bc = BoundaryMode::penalization;
    const AssembledCdr c = assemble(s);
    CHECK(c.dof_count == 49);
    const DenseMatrix n = c.n_matrix.to_dense();
    CHECK((n + n.transpose()).max_abs() == 0.0);
    double interior_max = 0.0;
    const auto d = c.m_matrix.diagonal();
    for (std::size_t i = 0; i < c.dof_count; ++i)
        if (!build_mesh(6).boundary[c.dof_vertex[i]]) interior_max = std::max(interior_max, d[i]);
    for (std::size_t i = 0; i < c.dof_count; ++i)
        if (build_mesh(6).boundary[c.dof_vertex[i]]) CHECK(d[i] >= 1e9 * interior_max);
    // elimination and penalization see nearly the same skew spectrum
    const double pen = spectral_radius_skew(split(c.m_matrix, c.n_matrix));
    const AssembledCdr e = assemble(rotating_flow_coefficients(6));
    CHECK(pen == Approx(spectral_radius_skew(split(e.m_matrix, e.n_matrix))).epsilon(1e-6));
}

TEST_CASE("coefficient validation") {
    CdrProblemSpec s = rotating_flow_coefficients(4);
    s.nu = constant(0.0);
    CHECK_THROWS_AS(assemble(s), InvalidArgument);
    s = rotating_flow_coefficients(4);
    s.c0 = constant(-0.1);
    CHECK_THROWS_AS(assemble(s), InvalidArgument);
    s = rotating_flow_coefficients(4);
    s.a = [](double x, double) { return std::array<double, 2>{-3.0 * x, 0.0}; };  // div a = -3
    CHECK_THROWS_AS(assemble(s), InvalidArgument);
    s = rotating_flow_coefficients(1);
    CHECK_THROWS_AS(assemble(s), InvalidArgument);
}

TEST_CASE("skew spectral radius is stable under refinement") {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t m : {10u, 20u, 30u}) {
        const AssembledCdr c = assemble(rotating_flow_coefficients(m));
        const double rho = spectral_radius_skew(split(c.m_matrix, c.n_matrix));
        lo = std::min(lo, rho);
        hi = std::max(hi, rho);
    }
    CHECK(hi - lo < 0.03);
}

TEST_CASE("manufactured solution converges at second order") {
    const double pi = std::numbers::pi;
    auto exact = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
    auto source = [pi, exact](double x, double y) { return 2 * pi * pi * exact(x, y); };
    double err[2];
    int k = 0;
    for (std::size_t m : {8u, 16u}) {
        const AssembledCdr c = assemble(poisson(m, source));
        const Vector u = cholesky(c.m_matrix.to_dense()).solve(c.rhs);
        err[k++] = oracle::l2_error(c, u, exact);
    }
    CHECK(err[0] / err[1] >= 3.5);
    CHECK(std::log2(err[0] / err[1]) >= 1.8);
}
