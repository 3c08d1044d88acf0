#include "wpk/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <lapacke.h>

#include "wpk/error.hpp"

namespace wpk {

namespace {

constexpr std::size_t kMaxSweeps = 100;
constexpr double kOffTolerance = 1e-12;

double off_diagonal_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        for (std::size_t j = i + 1; j < a.cols(); ++j) s += r[j] * r[j];
    }
    return std::sqrt(2.0 * s);
}

// Forward substitution applied to every column of A at once: returns L^{-1} A.
DenseMatrix lower_solve_rows(const DenseMatrix& l, const DenseMatrix& a) {
    const std::size_t n = l.rows();
    DenseMatrix y = a;
    for (std::size_t i = 0; i < n; ++i) {
        auto yi = y.row(i);
        auto li = l.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = li[k];
            if (lik == 0.0) continue;
            auto yk = y.row(k);
            for (std::size_t j = 0; j < yi.size(); ++j) yi[j] -= lik * yk[j];
        }
        const double inv = 1.0 / li[i];
        for (double& v : yi) v *= inv;
    }
    return y;
}

}  // namespace

SymEigResult jacobi_eig(const DenseMatrix& s, bool want_vectors) {
    if (!s.square()) throw DimensionMismatch("jacobi_eig", s.rows(), s.cols());
    const std::size_t n = s.rows();
    DenseMatrix a = s;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j);

    // rows of vt are the eigenvectors, so rotations touch contiguous memory
    DenseMatrix vt = want_vectors ? DenseMatrix::identity(n) : DenseMatrix();
    const double target = kOffTolerance * a.frobenius_norm();

    SymEigResult result;
    std::size_t sweep = 0;
    // Round-robin ordering: each round applies n/2 disjoint rotations, first
    // to rows and then to columns, so all memory traffic is row-contiguous.
    const std::size_t players = n + (n % 2);
    std::vector<std::size_t> ring(players);
    std::iota(ring.begin(), ring.end(), 0);
    struct Rotation {
        std::size_t p, q;
        double c, s, t, apq, app, aqq;
    };
    std::vector<Rotation> rots;
    rots.reserve(players / 2);
    while (off_diagonal_norm(a) > target) {
        if (sweep == kMaxSweeps) throw NonConvergence("sym_eig: no convergence after 100 Jacobi sweeps");
        ++sweep;
        for (std::size_t round = 0; round + 1 < players; ++round) {
            rots.clear();
            for (std::size_t k = 0; k < players / 2; ++k) {
                std::size_t p = ring[k], q = ring[players - 1 - k];
                if (p >= n || q >= n) continue;
                if (p > q) std::swap(p, q);
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                // rotation would not change the diagonal at working precision
                if (std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                rots.push_back({p, q, c, t * c, t, apq, app, aqq});
            }
            // rotate the ring, keeping position 0 fixed
            std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
            if (rots.empty()) continue;

            for (const Rotation& r : rots) {
                auto rp = a.row(r.p);
                auto rq = a.row(r.q);
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = rp[k];
                    const double y = rq[k];
                    rp[k] = r.c * x - r.s * y;
                    rq[k] = r.s * x + r.c * y;
                }
                if (want_vectors) {
                    auto vp = vt.row(r.p);
                    auto vq = vt.row(r.q);
                    for (std::size_t k = 0; k < n; ++k) {
                        const double x = vp[k];
                        const double y = vq[k];
                        vp[k] = r.c * x - r.s * y;
                        vq[k] = r.s * x + r.c * y;
                    }
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                auto ri = a.row(i);
                for (const Rotation& r : rots) {
                    const double x = ri[r.p];
                    const double y = ri[r.q];
                    ri[r.p] = r.c * x - r.s * y;
                    ri[r.q] = r.s * x + r.c * y;
                }
            }
            for (const Rotation& r : rots) {
                // closed forms are more accurate than the rotated entries
                a(r.p, r.p) = r.app - r.t * r.apq;
                a(r.q, r.q) = r.aqq + r.t * r.apq;
                a(r.p, r.q) = 0.0;
                a(r.q, r.p) = 0.0;
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    result.values.resize(n);
    if (want_vectors) result.vectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        result.values[k] = a(order[k], order[k]);
        if (want_vectors) result.vectors.set_column(k, vt.row(order[k]));
    }
    result.sweeps = sweep;
    return result;
}

Vector sym_eigenvalues(const DenseMatrix& s) {
    if (!s.square()) throw DimensionMismatch("sym_eigenvalues", s.rows(), s.cols());
    const std::size_t n = s.rows();
    if (n == 0) return {};
    std::vector<double> work(s.entries().begin(), s.entries().end());
    Vector w(n);
    // row-major lower triangle == column-major upper triangle
    const lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'L', static_cast<lapack_int>(n), work.data(),
                                           static_cast<lapack_int>(n), w.data());
    if (info != 0) throw NonConvergence("sym_eigenvalues: dsyevd failed with info " + std::to_string(info));
    return w;
}

SymEigResult sym_eig(const DenseMatrix& s, bool want_vectors) {
    if (want_vectors) return jacobi_eig(s, true);
    SymEigResult r;
    r.values = sym_eigenvalues(s);
    return r;
}

DenseMatrix inverse_congruence(const CholeskyFactor& factor, const DenseMatrix& a) {
    if (a.rows() != factor.dim() || !a.square())
        throw DimensionMismatch("inverse_congruence", factor.dim(), a.rows());
    const DenseMatrix y = lower_solve_rows(factor.lower(), a);           // L^{-1} A
    const DenseMatrix z = lower_solve_rows(factor.lower(), y.transpose());  // L^{-1} (L^{-1} A)^T
    return z.transpose();
}

Vector gen_sym_eig(const DenseMatrix& s, const DenseMatrix& m) {
    if (s.rows() != m.rows() || !s.square() || !m.square())
        throw DimensionMismatch("gen_sym_eig", s.rows(), m.rows());
    const auto factor = cholesky(m);
    DenseMatrix c = inverse_congruence(factor, s);
    const std::size_t n = c.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (c(i, j) + c(j, i));
            c(i, j) = v;
            c(j, i) = v;
        }
    return sym_eig(c, false).values;
}

}  // namespace wpk
