#include "wpk/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "wpk/eigen.hpp"
#include "wpk/error.hpp"
#include "wpk/factor.hpp"

namespace wpk {

namespace {

DenseMatrix symmetric_part(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = 0.5 * (a(i, j) + a(j, i));
    return m;
}

DenseMatrix skew_part(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = 0.5 * (a(i, j) - a(j, i));
    return m;
}

/// C = L^T B L^{-T} with W = L L^T, so that <B y, y>_W = v^T C v for y = L^{-T} v.
DenseMatrix weighted_representation(const DenseMatrix& b, const DenseMatrix& w) {
    const CholeskyFactor l = cholesky(w);
    return inverse_congruence(l, w * b);
}

/// Distance from 0 to [lo, hi].
double interval_distance(double lo, double hi) {
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
}

double largest_singular_value(const DenseMatrix& c) {
    const DenseMatrix ctc = c.transpose() * c;
    const Vector ev = sym_eig(symmetric_part(ctc), false).values;
    return std::sqrt(std::max(0.0, ev.back()));
}

/// inf |<S y, y>| / <P y, y> for SPD P: the smallest |eigenvalue| of the
/// pencil when all eigenvalues share a sign, 0 otherwise.
double abs_rayleigh_infimum(const Vector& ev) {
    if (ev.front() > 0.0) return ev.front();
    if (ev.back() < 0.0) return -ev.back();
    return 0.0;
}

double lambda_min_rotated(const DenseMatrix& s, const DenseMatrix& k, double theta) {
    const std::size_t n = s.rows();
    const double c = std::cos(theta), sn = std::sin(theta);
    DenseMatrix e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double x = c * s(i, j);
            const double y = sn * k(i, j);
            e(i, j) = x;
            e(n + i, n + j) = x;
            e(i, n + j) = -y;
            e(n + i, j) = y;
        }
    return sym_eig(e, false).values.front();
}

}  // namespace

HermitianSplit split(const DenseMatrix& a) {
    if (!a.square()) throw DimensionMismatch("split", a.rows(), a.cols());
    return {symmetric_part(a), skew_part(a)};
}

HermitianSplit split(const LinearOperator& a) { return split(densify(a)); }

HermitianSplit split(const CsrMatrix& m_part, const CsrMatrix& n_part) {
    if (m_part.rows() > kDensifyLimit) throw DensifyLimit(m_part.rows(), kDensifyLimit);
    if (n_part.rows() != m_part.rows()) throw DimensionMismatch("split", m_part.rows(), n_part.rows());
    return {m_part.to_dense(), n_part.to_dense()};
}

double spectral_radius_skew(const HermitianSplit& s) {
    const CholeskyFactor l = cholesky(s.m_part);
    const DenseMatrix k = inverse_congruence(l, s.n_part);
    // K is skew, so K^T K = -K^2 and its top eigenvalue is t_max^2
    return largest_singular_value(k);
}

double fov_distance(const DenseMatrix& b, const DenseMatrix& w) {
    const DenseMatrix c = weighted_representation(b, w);
    const Vector ev = sym_eig(symmetric_part(c), false).values;
    return interval_distance(ev.front(), ev.back());
}

double fov_distance(const LinearOperator& b, const WeightOperator& w) {
    const DenseMatrix bd = densify(b);
    const DenseMatrix wd = w.is_identity() ? DenseMatrix::identity(w.dim()) : densify(w.op());
    return fov_distance(bd, wd);
}

double fov_distance_rotation(const DenseMatrix& b, const DenseMatrix& w, std::size_t angles) {
    if (angles < 3) throw InvalidArgument("fov_distance_rotation: need at least 3 angles");
    const DenseMatrix c = weighted_representation(b, w);
    const DenseMatrix s = symmetric_part(c);
    const DenseMatrix k = skew_part(c);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(angles);
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < angles; ++i) {
        const double v = lambda_min_rotated(s, k, static_cast<double>(i) * step);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    // golden-section search on [theta_best - step, theta_best + step]
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = static_cast<double>(best) * step - step;
    double hi = static_cast<double>(best) * step + step;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = lambda_min_rotated(s, k, x1), f2 = lambda_min_rotated(s, k, x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = lambda_min_rotated(s, k, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = lambda_min_rotated(s, k, x1);
        }
    }
    best_value = std::max({best_value, f1, f2});
    return std::max(0.0, best_value);
}

double min_rayleigh_ratio(const DenseMatrix& c, std::size_t random_starts, std::uint64_t seed) {
    const std::size_t n = c.rows();
    const DenseMatrix s = symmetric_part(c);
    const SymEigResult eig = sym_eig(s, true);
    // an indefinite symmetric part has a real direction with v^T C v = 0
    if (eig.values.front() <= 0.0 && eig.values.back() >= 0.0) return 0.0;

    const DenseMatrix ct = c.transpose();
    auto ratio = [&](const Vector& v) {
        const Vector cv = c.multiply(v);
        const double sv = dot(v, cv);
        const double g = dot(cv, cv);
        return g > 0.0 ? sv * sv / g : 0.0;
    };
    auto normalized = [](Vector v) {
        const double nv = norm2(v);
        scale(1.0 / nv, v);
        return v;
    };

    auto descend = [&](Vector v) {
        v = normalized(std::move(v));
        double f = ratio(v);
        double t = 1.0;
        for (int it = 0; it < 400 && f > 0.0; ++it) {
            const Vector cv = c.multiply(v);
            const double sv = dot(v, cv);
            const double g = dot(cv, cv);
            const Vector sv_vec = s.multiply(v);
            const Vector ctcv = ct.multiply(cv);
            Vector grad(n);
            for (std::size_t i = 0; i < n; ++i)
                grad[i] = (4.0 * sv * sv_vec[i] * g - 2.0 * sv * sv * ctcv[i]) / (g * g);
            axpy(-dot(grad, v), v, grad);  // tangent component
            const double gg = dot(grad, grad);
            if (gg <= 1e-30 * std::max(1.0, f * f)) break;
            bool moved = false;
            t *= 2.0;
            while (t > 1e-16) {
                Vector trial = v;
                axpy(-t, grad, trial);
                trial = normalized(std::move(trial));
                const double ft = ratio(trial);
                if (ft <= f - 1e-4 * t * gg) {
                    const double gain = f - ft;
                    v = std::move(trial);
                    f = ft;
                    moved = true;
                    if (gain <= 1e-15 * f) it = 400;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) break;
        }
        return f;
    };

    double best = descend(eig.vectors.column(0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (std::size_t k = 0; k < random_starts; ++k) {
        Vector v(n);
        for (auto& x : v) x = gauss(rng);
        best = std::min(best, descend(std::move(v)));
    }
    return best;
}

double contraction_from_kappa_rho(double kappa, double rho) {
    if (!(kappa >= 1.0)) throw InvalidArgument("contraction_from_kappa_rho: kappa must be >= 1");
    if (!(rho >= 0.0)) throw InvalidArgument("contraction_from_kappa_rho: rho must be >= 0");
    return std::sqrt(std::max(0.0, 1.0 - (1.0 / kappa) / (1.0 + rho * rho)));
}

std::optional<std::size_t> predicted_iterations(double contraction, double target) {
    if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("predicted_iterations: target must lie in (0, 1)");
    if (contraction <= 0.0) return 1;
    if (contraction >= 1.0) return std::nullopt;
    auto i = static_cast<std::size_t>(std::ceil(std::log(target) / std::log(contraction)));
    i = std::max<std::size_t>(i, 1);
    while (std::pow(contraction, static_cast<double>(i)) >= target) ++i;
    return i;
}

JohnsonCheck johnson_identity_check(const HermitianSplit& s, const DenseMatrix& a_inv) {
    const DenseMatrix m_inv = spd_inverse(s.m_part);
    const Vector ev = gen_sym_eig(symmetric_part(a_inv), m_inv);
    const double rho = spectral_radius_skew(s);
    return {ev.front(), 1.0 / (1.0 + rho * rho)};
}

double analytic_rho_bound(const CdrProblemSpec& spec) {
    if (!spec.nu || !spec.c0 || !spec.a) throw InvalidArgument("analytic_rho_bound: missing coefficient callback");
    const StructuredMesh mesh = build_mesh(spec.m);
    std::vector<std::array<double, 2>> points = mesh.vertices;
    points.insert(points.end(), {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
    double a_sup = 0.0;
    double nu_inf = std::numeric_limits<double>::infinity();
    double react_inf = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        const auto a = spec.a(p[0], p[1]);
        a_sup = std::max(a_sup, std::hypot(a[0], a[1]));
        nu_inf = std::min(nu_inf, spec.nu(p[0], p[1]));
        react_inf = std::min(react_inf, spec.c0(p[0], p[1]) + 0.5 * divergence(spec.a, p[0], p[1]));
    }
    if (!(nu_inf > 0.0)) throw InvalidArgument("analytic_rho_bound: nu must be positive");
    if (a_sup == 0.0) return 0.0;
    if (!(react_inf > 0.0)) throw InvalidArgument("analytic_rho_bound: c0 + div(a)/2 must be positive");
    return 0.5 * a_sup / std::sqrt(nu_inf * react_inf);
}

BoundReport compute_bound_report(const DenseMatrix& a, const DenseMatrix& h, bool h_spd, const DenseMatrix& w,
                                 const BoundOptions& opt) {
    if (!a.square()) throw DimensionMismatch("compute_bound_report", a.rows(), a.cols());
    const std::size_t n = a.rows();
    if (h.rows() != n || h.cols() != n) throw DimensionMismatch("compute_bound_report preconditioner", n, h.rows());
    if (w.rows() != n || w.cols() != n) throw DimensionMismatch("compute_bound_report weight", n, w.rows());

    BoundReport rep;
    const HermitianSplit sp = split(a);
    const DenseMatrix ah = a * h;

    const DenseMatrix c = weighted_representation(ah, w);
    {
        const Vector ev = sym_eig(symmetric_part(c), false).values;
        rep.fov_distance = interval_distance(ev.front(), ev.back());
    }
    rep.op_norm = largest_singular_value(c);
    if (*rep.op_norm > 0.0) {
        const double ratio = *rep.fov_distance / *rep.op_norm;
        rep.elman = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    }

    if (n <= opt.bound1_max_dim) {
        const double inf = min_rayleigh_ratio(c, opt.bound1_random_starts, opt.seed);
        rep.bound1_infimum = inf;
        rep.bound1_starts = opt.bound1_random_starts + 1;
        rep.bound1 = std::sqrt(std::max(0.0, 1.0 - inf));
    } else {
        rep.notes.push_back("bound1: dimension above the multistart limit");
    }

    bool m_positive = true;
    try {
        rep.rho = spectral_radius_skew(sp);
    } catch (const NotPositiveDefinite&) {
        m_positive = false;
        rep.notes.push_back("rho, bound3: symmetric part of A is not positive definite");
    }

    if (!h_spd) {
        rep.notes.push_back("kappa, bound2, bound3: preconditioner is not symmetric positive definite");
        return rep;
    }
    const CholeskyFactor lh = cholesky(h);
    // L_H^T M L_H, whose eigenvalues are those of H M and of the pencil (H M H, H)
    const DenseMatrix lht_m = lh.lower().transpose() * sp.m_part;
    const Vector g_ev = sym_eig(symmetric_part(lht_m * lh.lower()), false).values;
    rep.lambda_min = g_ev.front();
    rep.lambda_max = g_ev.back();
    if (g_ev.front() > 0.0) rep.kappa = g_ev.back() / g_ev.front();

    if (!opt.weight_is_preconditioner && (w - h).max_abs() != 0.0) {
        rep.notes.push_back("bound2, bound3: weight differs from the preconditioner");
        return rep;
    }
    try {
        const DenseMatrix a_inv = inverse(a);
        const Vector e1 = gen_sym_eig(symmetric_part(a_inv), h);
        const double prod = abs_rayleigh_infimum(e1) * abs_rayleigh_infimum(g_ev);
        rep.bound2 = std::sqrt(std::max(0.0, 1.0 - prod));
    } catch (const Singular&) {
        rep.notes.push_back("bound2: A is singular");
    }
    if (m_positive && rep.kappa && rep.rho) rep.bound3 = contraction_from_kappa_rho(std::max(1.0, *rep.kappa), *rep.rho);
    return rep;
}

BoundReport compute_bound_report(const LinearOperator& a, const PreconditionerHandle& h, const WeightOperator& w,
                                 const BoundOptions& opt) {
    const DenseMatrix wd = w.is_identity() ? DenseMatrix::identity(w.dim()) : densify(w.op());
    return compute_bound_report(densify(a), densify(h.op()), h.hermitian(), wd, opt);
}

BoundReport compute_bound_report(const LinearOperator& a, const PreconditionerHandle& h, BoundOptions opt) {
    if (!h.hermitian()) throw NotHermitianPreconditioner();
    opt.weight_is_preconditioner = true;
    const DenseMatrix hd = densify(h.op());
    return compute_bound_report(densify(a), hd, true, hd, opt);
}

}  // namespace wpk
