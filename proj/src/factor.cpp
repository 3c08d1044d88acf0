#include "wpk/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wpk/error.hpp"

namespace wpk {

CholeskyFactor cholesky(const DenseMatrix& s) {
    if (!s.square()) throw DimensionMismatch("cholesky", s.rows(), s.cols());
    const std::size_t n = s.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(s(i, i)));
    const double threshold =
        static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;

    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        auto lj = l.row(j);
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > threshold)) throw NotPositiveDefinite(j);
        const double ljj = std::sqrt(d);
        lj[j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            auto li = l.row(i);
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= li[k] * lj[k];
            li[j] = v / ljj;
        }
    }
    return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::solve_lower(std::span<const double> b) const {
    const std::size_t n = dim();
    if (b.size() != n) throw DimensionMismatch("CholeskyFactor::solve", n, b.size());
    Vector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        auto li = lower_.row(i);
        double v = y[i];
        for (std::size_t k = 0; k < i; ++k) v -= li[k] * y[k];
        y[i] = v / li[i];
    }
    return y;
}

Vector CholeskyFactor::solve_upper(std::span<const double> b) const {
    const std::size_t n = dim();
    if (b.size() != n) throw DimensionMismatch("CholeskyFactor::solve", n, b.size());
    Vector x(b.begin(), b.end());
    // column-oriented sweep over rows of L keeps the access contiguous
    for (std::size_t i = n; i-- > 0;) {
        auto li = lower_.row(i);
        x[i] /= li[i];
        const double xi = x[i];
        for (std::size_t k = 0; k < i; ++k) x[k] -= li[k] * xi;
    }
    return x;
}

Vector CholeskyFactor::solve(std::span<const double> b) const { return solve_upper(solve_lower(b)); }

DenseMatrix CholeskyFactor::reconstruct() const {
    const std::size_t n = dim();
    DenseMatrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = 0.0;
            auto li = lower_.row(i);
            auto lj = lower_.row(j);
            for (std::size_t k = 0; k <= j; ++k) v += li[k] * lj[k];
            s(i, j) = v;
            s(j, i) = v;
        }
    return s;
}

LuFactor lu_factor(const DenseMatrix& a) {
    if (!a.square()) throw DimensionMismatch("lu_factor", a.rows(), a.cols());
    const std::size_t n = a.rows();
    DenseMatrix lu = a;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    const double tiny = std::numeric_limits<double>::min() * std::max(1.0, a.max_abs());

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > best) best = std::abs(lu(i, k)), p = i;
        if (!(best > tiny)) throw Singular(k);
        if (p != k) {
            std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(p).begin());
            std::swap(perm[k], perm[p]);
        }
        auto rk = lu.row(k);
        const double pivot = rk[k];
        for (std::size_t i = k + 1; i < n; ++i) {
            auto ri = lu.row(i);
            const double f = ri[k] / pivot;
            ri[k] = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
        }
    }
    return LuFactor(std::move(lu), std::move(perm));
}

Vector LuFactor::solve(std::span<const double> b) const {
    const std::size_t n = dim();
    if (b.size() != n) throw DimensionMismatch("LuFactor::solve", n, b.size());
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        auto r = packed_.row(i);
        double v = x[i];
        for (std::size_t k = 0; k < i; ++k) v -= r[k] * x[k];
        x[i] = v;
    }
    for (std::size_t i = n; i-- > 0;) {
        auto r = packed_.row(i);
        double v = x[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= r[k] * x[k];
        x[i] = v / r[i];
    }
    return x;
}

Vector lu_solve(const DenseMatrix& a, std::span<const double> b) { return lu_factor(a).solve(b); }

DenseMatrix spd_inverse(const DenseMatrix& s) {
    const auto f = cholesky(s);
    const std::size_t n = s.rows();
    DenseMatrix inv(n, n);
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        inv.set_column(j, f.solve(e));
        e[j] = 0.0;
    }
    // symmetrize round-off
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

DenseMatrix inverse(const DenseMatrix& a) {
    const auto f = lu_factor(a);
    const std::size_t n = a.rows();
    DenseMatrix inv(n, n);
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        inv.set_column(j, f.solve(e));
        e[j] = 0.0;
    }
    return inv;
}

}  // namespace wpk
