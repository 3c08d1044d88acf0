#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wpk/dense.hpp"
#include "wpk/operator.hpp"

namespace wpk {

/// Symmetric positive definite weight W defining <x, y>_W = y^T W x.
///
/// Construction runs randomized probes (32 symmetry/positivity checks) since
/// W is often only available as an operator. `verify_cholesky` performs the
/// exact check for dimensions up to the densification limit.
class WeightOperator {
public:
    static constexpr std::size_t kProbeCount = 32;
    static constexpr std::uint64_t kProbeSeed = 0xC0FFEE;

    explicit WeightOperator(LinearOperator w, std::optional<LinearOperator> w_inverse = std::nullopt,
                            bool validate = true);

    static WeightOperator identity(std::size_t n);
    static WeightOperator from_dense(const DenseMatrix& w);

    std::size_t dim() const noexcept { return w_.dim(); }
    bool is_identity() const noexcept { return identity_; }
    const LinearOperator& op() const noexcept { return w_; }
    const std::optional<LinearOperator>& inverse_op() const noexcept { return w_inv_; }

    Vector apply(std::span<const double> x) const;
    void apply_into(std::span<const double> x, std::span<double> y) const;

    /// Throws NotPositiveDefinite if the densified weight fails Cholesky.
    void verify_cholesky() const;

private:
    LinearOperator w_;
    std::optional<LinearOperator> w_inv_;
    bool identity_ = false;
};

/// Preconditioner H; `hermitian` records that H is symmetric positive definite.
class PreconditionerHandle {
public:
    PreconditionerHandle(LinearOperator h, bool hermitian, bool validate = true);

    static PreconditionerHandle identity(std::size_t n);

    std::size_t dim() const noexcept { return h_.dim(); }
    bool hermitian() const noexcept { return hermitian_; }
    const LinearOperator& op() const noexcept { return h_; }

    Vector apply(std::span<const double> x) const { return h_.apply(x); }
    void apply_into(std::span<const double> x, std::span<double> y) const { h_.apply_into(x, y); }

    /// Reinterprets an SPD preconditioner as the weight of its own inner product.
    WeightOperator as_weight() const;

private:
    LinearOperator h_;
    bool hermitian_;
};

/// y^T W x
double w_inner(const WeightOperator& w, std::span<const double> x, std::span<const double> y);
/// sqrt(<x, x>_W); throws InvalidWeight when the radicand is below -1e-14 ||x||^2.
double w_norm(const WeightOperator& w, std::span<const double> x);
/// G_ij = <v_i, v_j>_W
DenseMatrix w_gram(const WeightOperator& w, const std::vector<Vector>& vectors);

/// Randomized symmetry/positivity probe shared by weights and SPD
/// preconditioners. Throws InvalidWeight describing the first failure.
void probe_spd(const LinearOperator& op, std::size_t probes, std::uint64_t seed, const char* what);

}  // namespace wpk
