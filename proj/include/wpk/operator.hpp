#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>

#include "wpk/csr.hpp"
#include "wpk/dense.hpp"

namespace wpk {

/// Operators above this dimension are never materialized densely.
inline constexpr std::size_t kDensifyLimit = 4096;

/// Square linear map given by its action y = Op x.
class LinearOperator {
public:
    using Apply = std::function<void(std::span<const double>, std::span<double>)>;

    LinearOperator() = default;
    LinearOperator(std::size_t dim, Apply apply);

    static LinearOperator identity(std::size_t n);
    /// The matrix is copied into shared storage; the operator stays cheap to copy.
    static LinearOperator from_dense(DenseMatrix a);
    static LinearOperator from_csr(CsrMatrix a);

    std::size_t dim() const noexcept { return dim_; }
    explicit operator bool() const noexcept { return static_cast<bool>(apply_); }

    void apply_into(std::span<const double> x, std::span<double> y) const;
    Vector apply(std::span<const double> x) const;
    Vector operator()(std::span<const double> x) const { return apply(x); }

private:
    std::size_t dim_ = 0;
    Apply apply_;
};

/// x -> first(second(x))
LinearOperator compose(LinearOperator first, LinearOperator second);
/// x -> a*lhs(x) + b*rhs(x)
LinearOperator linear_combination(double a, LinearOperator lhs, double b, LinearOperator rhs);

/// Materializes the operator column by column; throws DensifyLimit above
/// `limit`.
DenseMatrix densify(const LinearOperator& op, std::size_t limit = kDensifyLimit);

}  // namespace wpk
