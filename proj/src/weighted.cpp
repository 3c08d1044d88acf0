#include "wpk/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "wpk/error.hpp"
#include "wpk/factor.hpp"

namespace wpk {

void probe_spd(const LinearOperator& op, std::size_t probes, std::uint64_t seed, const char* what) {
    const std::size_t n = op.dim();
    if (n == 0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vector x(n), y(n), wx(n), wy(n);
    for (std::size_t k = 0; k < probes; ++k) {
        for (auto& v : x) v = gauss(rng);
        for (auto& v : y) v = gauss(rng);
        op.apply_into(x, wx);
        op.apply_into(y, wy);
        const double lhs = dot(wx, y);
        const double rhs = dot(x, wy);
        const double ref = norm2(wx) * norm2(y) + norm2(x) * norm2(wy);
        if (std::abs(lhs - rhs) > 1e-12 * ref)
            throw InvalidWeight(std::string(what) + ": symmetry probe failed");
        if (!(dot(wx, x) > 0.0)) throw InvalidWeight(std::string(what) + ": positivity probe failed");
    }
}

WeightOperator::WeightOperator(LinearOperator w, std::optional<LinearOperator> w_inverse, bool validate)
    : w_(std::move(w)), w_inv_(std::move(w_inverse)) {
    if (!w_) throw InvalidArgument("WeightOperator: empty operator");
    if (w_inv_ && w_inv_->dim() != w_.dim())
        throw DimensionMismatch("WeightOperator inverse", w_.dim(), w_inv_->dim());
    if (validate) probe_spd(w_, kProbeCount, kProbeSeed, "weight");
}

WeightOperator WeightOperator::identity(std::size_t n) {
    WeightOperator w(LinearOperator::identity(n), LinearOperator::identity(n), false);
    w.identity_ = true;
    return w;
}

WeightOperator WeightOperator::from_dense(const DenseMatrix& w) {
    return WeightOperator(LinearOperator::from_dense(w));
}

Vector WeightOperator::apply(std::span<const double> x) const {
    if (identity_) {
        if (x.size() != dim()) throw DimensionMismatch("WeightOperator::apply", dim(), x.size());
        return Vector(x.begin(), x.end());
    }
    return w_.apply(x);
}

void WeightOperator::apply_into(std::span<const double> x, std::span<double> y) const {
    w_.apply_into(x, y);
}

void WeightOperator::verify_cholesky() const { (void)cholesky(densify(w_)); }

PreconditionerHandle::PreconditionerHandle(LinearOperator h, bool hermitian, bool validate)
    : h_(std::move(h)), hermitian_(hermitian) {
    if (!h_) throw InvalidArgument("PreconditionerHandle: empty operator");
    if (hermitian_ && validate)
        probe_spd(h_, WeightOperator::kProbeCount, WeightOperator::kProbeSeed, "preconditioner");
}

PreconditionerHandle PreconditionerHandle::identity(std::size_t n) {
    return PreconditionerHandle(LinearOperator::identity(n), true, false);
}

WeightOperator PreconditionerHandle::as_weight() const {
    if (!hermitian_) throw NotHermitianPreconditioner();
    return WeightOperator(h_, std::nullopt, false);
}

double w_inner(const WeightOperator& w, std::span<const double> x, std::span<const double> y) {
    if (x.size() != w.dim()) throw DimensionMismatch("w_inner", w.dim(), x.size());
    if (y.size() != w.dim()) throw DimensionMismatch("w_inner", w.dim(), y.size());
    if (w.is_identity()) return dot(x, y);
    return dot(w.apply(x), y);
}

double w_norm(const WeightOperator& w, std::span<const double> x) {
    const double sq = w_inner(w, x, x);
    if (sq >= 0.0) return std::sqrt(sq);
    const double euclid_sq = dot(x, x);
    if (sq < -1e-14 * euclid_sq) throw InvalidWeight("w_norm: negative squared norm, weight is not positive definite");
    return 0.0;
}

DenseMatrix w_gram(const WeightOperator& w, const std::vector<Vector>& vectors) {
    const std::size_t k = vectors.size();
    std::vector<Vector> wv;
    wv.reserve(k);
    for (const auto& v : vectors) {
        if (v.size() != w.dim()) throw DimensionMismatch("w_gram", w.dim(), v.size());
        wv.push_back(w.apply(v));
    }
    DenseMatrix g(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            // average both orders so the returned Gram is exactly symmetric
            const double v = 0.5 * (dot(wv[i], vectors[j]) + dot(vectors[i], wv[j]));
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

}  // namespace wpk
