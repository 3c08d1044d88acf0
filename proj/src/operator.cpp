#include "wpk/operator.hpp"

#include <algorithm>

#include "wpk/error.hpp"

namespace wpk {

LinearOperator::LinearOperator(std::size_t dim, Apply apply) : dim_(dim), apply_(std::move(apply)) {
    if (!apply_) throw InvalidArgument("LinearOperator: empty apply function");
}

LinearOperator LinearOperator::identity(std::size_t n) {
    return LinearOperator(n, [](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.end(), y.begin());
    });
}

LinearOperator LinearOperator::from_dense(DenseMatrix a) {
    if (!a.square()) throw DimensionMismatch("LinearOperator::from_dense", a.rows(), a.cols());
    auto m = std::make_shared<const DenseMatrix>(std::move(a));
    return LinearOperator(m->rows(), [m](std::span<const double> x, std::span<double> y) {
        const std::size_t n = m->cols();
        for (std::size_t i = 0; i < m->rows(); ++i) {
            auto r = m->row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += r[j] * x[j];
            y[i] = s;
        }
    });
}

LinearOperator LinearOperator::from_csr(CsrMatrix a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("LinearOperator::from_csr", a.rows(), a.cols());
    auto m = std::make_shared<const CsrMatrix>(std::move(a));
    return LinearOperator(m->rows(), [m](std::span<const double> x, std::span<double> y) {
        m->multiply_into(x, y);
    });
}

void LinearOperator::apply_into(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dim_) throw DimensionMismatch("LinearOperator::apply", dim_, x.size());
    if (y.size() != dim_) throw DimensionMismatch("LinearOperator::apply output", dim_, y.size());
    apply_(x, y);
}

Vector LinearOperator::apply(std::span<const double> x) const {
    Vector y(dim_);
    apply_into(x, y);
    return y;
}

LinearOperator compose(LinearOperator first, LinearOperator second) {
    if (first.dim() != second.dim()) throw DimensionMismatch("compose", first.dim(), second.dim());
    const std::size_t n = first.dim();
    return LinearOperator(n, [first, second, n](std::span<const double> x, std::span<double> y) {
        Vector tmp(n);
        second.apply_into(x, tmp);
        first.apply_into(tmp, y);
    });
}

LinearOperator linear_combination(double a, LinearOperator lhs, double b, LinearOperator rhs) {
    if (lhs.dim() != rhs.dim()) throw DimensionMismatch("linear_combination", lhs.dim(), rhs.dim());
    const std::size_t n = lhs.dim();
    return LinearOperator(n, [=](std::span<const double> x, std::span<double> y) {
        Vector tmp(n);
        lhs.apply_into(x, y);
        rhs.apply_into(x, tmp);
        for (std::size_t i = 0; i < n; ++i) y[i] = a * y[i] + b * tmp[i];
    });
}

DenseMatrix densify(const LinearOperator& op, std::size_t limit) {
    const std::size_t n = op.dim();
    if (n > limit) throw DensifyLimit(n, limit);
    DenseMatrix d(n, n);
    Vector e(n, 0.0), col(n);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        op.apply_into(e, col);
        d.set_column(j, col);
        e[j] = 0.0;
    }
    return d;
}

}  // namespace wpk
