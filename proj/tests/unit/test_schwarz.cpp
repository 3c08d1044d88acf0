#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "json.hpp"

#include "support/oracles.hpp"
#include "wpk/cdr.hpp"
#include "wpk/error.hpp"
#include "wpk/factor.hpp"
#include "wpk/krylov.hpp"
#include "wpk/schwarz.hpp"

using namespace wpk;
using Catch::Approx;

namespace {

PartitionSpec strips(std::size_t n, std::size_t overlap = 1) {
    PartitionSpec s;
    s.n_subdomains = n;
    s.overlap_layers = overlap;
    return s;
}

PartitionSpec grid(std::size_t p, std::size_t q, std::size_t overlap = 1) {
    PartitionSpec s;
    s.layout = PartitionLayout::grid;
    s.n_subdomains = p * q;
    s.grid_p = p;
    s.grid_q = q;
    s.overlap_layers = overlap;
    return s;
}

/// Recounts memberships from the subdomain lists and checks the storage rules.
void audit(const SubdomainMaps& maps) {
    std::vector<std::size_t> count(maps.dof_count, 0);
    for (const auto& sub : maps.subdomains) {
        REQUIRE(!sub.empty());
        CHECK(std::is_sorted(sub.begin(), sub.end()));
        CHECK(std::adjacent_find(sub.begin(), sub.end()) == sub.end());
        for (std::size_t d : sub) ++count.at(d);
    }
    for (std::size_t d = 0; d < maps.dof_count; ++d) CHECK(count[d] >= 1);
    CHECK(count == maps.membership);
    CHECK(maps.k0 == *std::max_element(count.begin(), count.end()));
}

std::vector<std::size_t> neighbourhood(const CsrMatrix& g, const std::vector<std::size_t>& set) {
    std::set<std::size_t> out(set.begin(), set.end());
    const auto off = g.row_offsets();
    const auto cols = g.col_indices();
    for (std::size_t d : set)
        for (std::size_t k = off[d]; k < off[d + 1]; ++k) out.insert(cols[k]);
    return {out.begin(), out.end()};
}

DenseMatrix dense_inverse_sym(const DenseMatrix& a) { return spd_inverse(a); }

/// Two-level H from its defining formula with dense algebra.
DenseMatrix two_level_reference(const DenseMatrix& m, const SubdomainMaps& maps, const DenseMatrix& r0) {
    const std::size_t n = m.rows();
    DenseMatrix local(n, n);
    for (const auto& sub : maps.subdomains) {
        DenseMatrix block(sub.size(), sub.size());
        for (std::size_t i = 0; i < sub.size(); ++i)
            for (std::size_t j = 0; j < sub.size(); ++j) block(i, j) = m(sub[i], sub[j]);
        const DenseMatrix inv = dense_inverse_sym(block);
        for (std::size_t i = 0; i < sub.size(); ++i)
            for (std::size_t j = 0; j < sub.size(); ++j) local(sub[i], sub[j]) += inv(i, j);
    }
    const DenseMatrix e_inv = dense_inverse_sym(r0 * m * r0.transpose());
    const DenseMatrix coarse = r0.transpose() * e_inv * r0;
    const DenseMatrix pi = DenseMatrix::identity(n) - coarse * m;
    return pi * local * pi.transpose() + coarse;
}

}  // namespace

TEST_CASE("near-square grids") {
    CHECK(near_square_grid(1) == std::array<std::size_t, 2>{1, 1});
    CHECK(near_square_grid(4) == std::array<std::size_t, 2>{2, 2});
    CHECK(near_square_grid(6) == std::array<std::size_t, 2>{2, 3});
    CHECK(near_square_grid(7) == std::array<std::size_t, 2>{1, 7});
    CHECK(near_square_grid(8) == std::array<std::size_t, 2>{2, 4});
    CHECK(near_square_grid(16) == std::array<std::size_t, 2>{4, 4});
    CHECK_THROWS_AS(near_square_grid(0), InvalidArgument);
}

TEST_CASE("partition examples") {
    const AssembledCdr c10 = assemble(rotating_flow_coefficients(10));
    const SubdomainMaps one = build_partition(c10.m_matrix, strips(1));
    REQUIRE(one.subdomains.size() == 1);
    CHECK(one.subdomains[0].size() == 81);
    CHECK(one.k0 == 1);
    audit(one);

    const SubdomainMaps three = build_partition(c10.m_matrix, strips(3));
    CHECK(three.subdomains.size() == 3);
    CHECK(three.k0 == 2);
    audit(three);

    const AssembledCdr c20 = assemble(rotating_flow_coefficients(20));
    const SubdomainMaps g = build_partition(c20.m_matrix, grid(2, 2), lattice_coordinates(c20));
    CHECK(g.subdomains.size() == 4);
    audit(g);

    CHECK_THROWS_AS(build_partition(c10.m_matrix, strips(82)), InvalidArgument);
    CHECK_THROWS_AS(build_partition(c10.m_matrix, grid(2, 2)), InvalidArgument);
}

TEST_CASE("overlap grows by graph adjacency") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(12));
    const auto coords = lattice_coordinates(c);
    for (const PartitionSpec& base : {strips(5, 0), grid(2, 3, 0)}) {
        const SubdomainMaps cores = build_partition(c.m_matrix, base, coords);
        audit(cores);
        CHECK(cores.k0 == 1);  // no overlap: a true partition
        for (std::size_t layers : {1u, 2u}) {
            PartitionSpec spec = base;
            spec.overlap_layers = layers;
            const SubdomainMaps grown = build_partition(c.m_matrix, spec, coords);
            audit(grown);
            for (std::size_t s = 0; s < cores.subdomains.size(); ++s) {
                std::vector<std::size_t> ref = cores.subdomains[s];
                for (std::size_t l = 0; l < layers; ++l) ref = neighbourhood(c.m_matrix, ref);
                CHECK(grown.subdomains[s] == ref);
            }
        }
    }
}

TEST_CASE("strip cores are contiguous ranges of near-equal size") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(11));
    const SubdomainMaps cores = build_partition(c.m_matrix, strips(7, 0));
    std::size_t next = 0, lo = SIZE_MAX, hi = 0;
    for (const auto& sub : cores.subdomains) {
        CHECK(sub.front() == next);
        CHECK(sub.back() == next + sub.size() - 1);
        next += sub.size();
        lo = std::min(lo, sub.size());
        hi = std::max(hi, sub.size());
    }
    CHECK(next == c.dof_count);
    CHECK(hi - lo <= 1);
}

TEST_CASE("grid cores are lattice blocks") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(9));
    const auto coords = lattice_coordinates(c);
    const SubdomainMaps cores = build_partition(c.m_matrix, grid(2, 4, 0), coords);
    REQUIRE(cores.subdomains.size() == 8);
    for (const auto& sub : cores.subdomains) {
        std::size_t r0 = SIZE_MAX, r1 = 0, c0 = SIZE_MAX, c1 = 0;
        for (std::size_t d : sub) {
            r0 = std::min(r0, coords[d][0]);
            r1 = std::max(r1, coords[d][0]);
            c0 = std::min(c0, coords[d][1]);
            c1 = std::max(c1, coords[d][1]);
        }
        CHECK(sub.size() == (r1 - r0 + 1) * (c1 - c0 + 1));  // full rectangle
    }
}

TEST_CASE("partition dump lists every dof's subdomains") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(6));
    const SubdomainMaps maps = build_partition(c.m_matrix, strips(3));
    const auto j = nlohmann::json::parse(partition_json(maps));
    REQUIRE(j.at("memberships").size() == c.dof_count);
    for (std::size_t d = 0; d < c.dof_count; ++d) CHECK(j.at("memberships")[d].size() == maps.membership[d]);
    CHECK(j.at("k0").get<std::size_t>() == maps.k0);
}

TEST_CASE("coarse space examples") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(8));
    const CoarseSpace one = build_coarse_space(build_partition(c.m_matrix, strips(1)), c.m_matrix);
    REQUIRE(one.size() == 1);
    for (double v : one.values[0]) CHECK(v == 1.0);

    const CoarseSpace two = build_coarse_space(build_partition(c.m_matrix, strips(2, 0)), c.m_matrix);
    REQUIRE(two.size() == 2);
    const DenseMatrix basis = two.dense_basis(c.dof_count);
    for (std::size_t d = 0; d < c.dof_count; ++d) CHECK(basis(0, d) * basis(1, d) == 0.0);
    const DenseMatrix gram = basis * c.m_matrix.to_dense() * basis.transpose();
    CHECK(gram(0, 1) == gram(1, 0));
    CHECK(gram(0, 1) < 0.0);  // neighbouring strips couple through M
    for (double v : two.values[0]) CHECK(v == 1.0);
}

TEST_CASE("coarse vectors form a partition of unity") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(10));
    const SubdomainMaps maps = build_partition(c.m_matrix, grid(2, 2), lattice_coordinates(c));
    const CoarseSpace cs = build_coarse_space(maps, c.m_matrix);
    REQUIRE(cs.size() == 4);
    const DenseMatrix basis = cs.dense_basis(c.dof_count);
    for (std::size_t d = 0; d < c.dof_count; ++d) {
        double sum = 0.0;
        for (std::size_t s = 0; s < 4; ++s) sum += basis(s, d);
        CHECK(std::abs(sum - 1.0) <= 1e-15);
    }
}

TEST_CASE("one subdomain gives the exact inverse") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(8));
    const SchwarzPreconditioner h(c.m_matrix, build_partition(c.m_matrix, strips(1)), SchwarzMode::one_level_sym);
    oracle::Rng rng(oracle::kSeed);
    const Vector x = rng.vector(c.dof_count);
    CHECK(oracle::max_abs_diff(h.apply(c.m_matrix.multiply(x)), x) <= 1e-12 * oracle::norm(x));
    const SolveResult r = whp_gcr({LinearOperator::from_csr(c.m_matrix), c.rhs, {}}, h.handle(), {});
    CHECK(r.status() == SolveStatus::converged);
    CHECK(r.iterations <= 2);
}

TEST_CASE("two-level preconditioner matches its formula") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(8));
    const SubdomainMaps maps = build_partition(c.m_matrix, strips(4));
    const SchwarzPreconditioner h(c.m_matrix, maps, SchwarzMode::two_level_sym);
    REQUIRE(h.coarse());
    const DenseMatrix ref = two_level_reference(c.m_matrix.to_dense(), maps, h.coarse()->dense_basis(c.dof_count));
    const DenseMatrix got = densify(h.op());
    CHECK((got - ref).max_abs() <= 1e-10 * ref.max_abs());
    CHECK(h.tau == 0.15);
}

TEST_CASE("deflation projector properties") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(12));
    const SubdomainMaps maps = build_partition(c.m_matrix, grid(2, 2), lattice_coordinates(c));
    const SchwarzPreconditioner h(c.m_matrix, maps, SchwarzMode::two_level_sym);
    oracle::Rng rng(oracle::kSeed + 1);
    for (int t = 0; t < 10; ++t) {
        const Vector v = rng.vector(c.dof_count);
        const Vector pv = h.project(v);
        CHECK(oracle::max_abs_diff(h.project(pv), pv) <= 1e-10 * oracle::norm(v));
        const Vector coarse_res = h.coarse()->restrict_vector(c.m_matrix.multiply(pv));
        CHECK(oracle::norm(coarse_res) <= 1e-9 * oracle::norm(h.coarse()->restrict_vector(c.m_matrix.multiply(v))));
    }
}

TEST_CASE("symmetric modes are SPD operators") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(10));
    const SubdomainMaps maps = build_partition(c.m_matrix, strips(4));
    oracle::Rng rng(oracle::kSeed + 2);
    for (SchwarzMode mode : {SchwarzMode::one_level_sym, SchwarzMode::two_level_sym}) {
        const SchwarzPreconditioner h(c.m_matrix, maps, mode);
        for (int t = 0; t < 10; ++t) {
            const Vector v = rng.vector(c.dof_count), w = rng.vector(c.dof_count);
            const double a = dot(h.apply(v), w), b = dot(v, h.apply(w));
            CHECK(std::abs(a - b) <= 1e-11 * std::max(std::abs(a), 1.0));
        }
        CHECK_NOTHROW(h.handle(true).as_weight().verify_cholesky());
        CHECK(h.handle().hermitian());
    }
}

TEST_CASE("non-symmetric one-level mode") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(8, 0.1, 0.1));
    const CsrMatrix a = c.system_matrix();
    const SubdomainMaps maps = build_partition(a, strips(3));
    const SchwarzPreconditioner h(a, maps, SchwarzMode::one_level_nonsym);
    CHECK_FALSE(h.handle().hermitian());
    const DenseMatrix ad = a.to_dense();
    DenseMatrix ref(c.dof_count, c.dof_count);
    for (const auto& sub : maps.subdomains) {
        const DenseMatrix inv = inverse(a.extract_dense(sub));
        for (std::size_t i = 0; i < sub.size(); ++i)
            for (std::size_t j = 0; j < sub.size(); ++j) ref(sub[i], sub[j]) += inv(i, j);
    }
    CHECK((densify(h.op()) - ref).max_abs() <= 1e-10 * ref.max_abs());
    CHECK(to_string(SchwarzMode::one_level_nonsym) == "one-level-nonsym");
}

TEST_CASE("condition numbers") {
    oracle::Rng rng(oracle::kSeed + 3);
    const DenseMatrix m = rng.spd(10);
    CHECK(condition_number(LinearOperator::from_dense(spd_inverse(m)), CsrMatrix::from_dense(m)) ==
          Approx(1.0).epsilon(1e-9));
    Vector d(10);
    for (std::size_t i = 0; i < 10; ++i) d[i] = static_cast<double>(i + 1);
    CHECK(condition_number(LinearOperator::identity(10), CsrMatrix::from_dense(DenseMatrix::diagonal(d))) ==
          Approx(10.0).epsilon(1e-12));

    const AssembledCdr c = assemble(rotating_flow_coefficients(30));
    const SubdomainMaps maps = build_partition(c.m_matrix, strips(4));
    const SchwarzPreconditioner one(c.m_matrix, maps, SchwarzMode::one_level_sym);
    const SchwarzPreconditioner two(c.m_matrix, maps, SchwarzMode::two_level_sym);
    const double k1 = condition_number(one.op(), c.m_matrix);
    const double k2 = condition_number(two.op(), c.m_matrix);
    CHECK(std::isfinite(k2));
    CHECK(k2 < k1);
}

TEST_CASE("subdomains above the dense limit are refused") {
    const AssembledCdr c = assemble(rotating_flow_coefficients(66));  // 65^2 = 4225 dofs
    CHECK_THROWS_AS(SchwarzPreconditioner(c.m_matrix, build_partition(c.m_matrix, strips(1)),
                                          SchwarzMode::one_level_sym),
                    InvalidArgument);
}
