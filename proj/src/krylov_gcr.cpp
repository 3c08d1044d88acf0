#include <algorithm>
#include <cmath>
#include <limits>

#include "krylov_detail.hpp"
#include "wpk/krylov.hpp"

namespace wpk {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::breakdown: return "breakdown";
    }
    return "unknown";
}

std::string to_string(StoppingNorm s) { return s == StoppingNorm::weighted ? "weighted" : "euclidean"; }

void SolveConfig::validate() const {
    if (restart_period && truncation_window)
        throw InvalidArgument("SolveConfig: restart_period and truncation_window are mutually exclusive");
    if (!(rel_tolerance > 0.0)) throw InvalidArgument("SolveConfig: rel_tolerance must be positive");
    if (restart_period && *restart_period == 0) throw InvalidArgument("SolveConfig: restart_period must be >= 1");
}

namespace {

using detail::Direction;
using detail::DirectionSet;

double weighted_sq(const WeightOperator& w, const Vector& v, Vector& wv) {
    wv = w.apply(v);
    const double sq = dot(v, wv);
    if (sq < -1e-14 * dot(v, v)) throw InvalidWeight("negative squared W-norm, weight is not positive definite");
    return sq;
}

/// Shared body of the right- and left-preconditioned GCR iterations.
///
/// `s` is the vector whose W-norm is minimized (r for right preconditioning,
/// z = H r for left). `raw_direction(s)` yields the unorthogonalized search
/// direction, `image(d, u, aux)` its image u in the minimized space and the
/// matching A d for the Euclidean residual. `recovery(u)` yields the
/// Orthodir-style direction used after a breakdown.
template <class RawDirection, class Image, class Recovery>
SolveResult gcr_engine(const WeightOperator& w, const SolveConfig& cfg, Vector x, Vector r, Vector s,
                       bool track_aux, double reference, RawDirection raw_direction, Image image,
                       Recovery recovery) {
    SolveResult out;
    IterationTrace& trace = out.trace;
    trace.reference_norm = reference;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    Vector ws;
    double res_w = std::sqrt(std::max(0.0, weighted_sq(w, s, ws)));
    auto record_residual = [&]() {
        trace.residual_norm_weighted.push_back(res_w);
        trace.residual_norm_euclidean.push_back(norm2(track_aux ? r : s));
        if (cfg.record_iterates) trace.iterates.push_back(x);
    };
    record_residual();
    if (detail::converged(trace, cfg)) {
        trace.status = SolveStatus::converged;
        out.x = std::move(x);
        return out;
    }

    DirectionSet dirs(cfg);
    Direction cur;
    StepRecord pending;

    // Builds the next direction from a raw one by Gram-Schmidt against the
    // stored set, with one extra pass if W-orthogonality is lost.
    auto orthogonalize = [&](Vector d, StepRecord& rec, StepRecord& next) {
        Vector u, aux;
        image(d, u, aux);
        if (cfg.record_image_norms) {
            Vector wu_raw;
            next.image_norm = std::sqrt(std::max(0.0, weighted_sq(w, u, wu_raw)));
        } else {
            next.image_norm = nan;
        }
        const auto& items = dirs.items();
        std::vector<double> beta(items.size()), phi(items.size());
        for (std::size_t j = 0; j < items.size(); ++j) {
            phi[j] = dot(items[j].w_image, u);
            beta[j] = phi[j] / items[j].delta;
        }
        for (std::size_t j = 0; j < items.size(); ++j) {
            axpy(-beta[j], items[j].p, d);
            axpy(-beta[j], items[j].image, u);
            if (track_aux) axpy(-beta[j], items[j].aux, aux);
        }
        Vector wu;
        double uu = weighted_sq(w, u, wu);
        if (!items.empty() && uu > 0.0) {
            double worst = 0.0;
            for (const auto& it : items)
                worst = std::max(worst, std::abs(dot(it.w_image, u)) / std::sqrt(it.delta * uu));
            if (worst > detail::kReorthogonalizeThreshold) {
                for (std::size_t j = 0; j < items.size(); ++j) {
                    const double extra = dot(items[j].w_image, u) / items[j].delta;
                    axpy(-extra, items[j].p, d);
                    axpy(-extra, items[j].image, u);
                    if (track_aux) axpy(-extra, items[j].aux, aux);
                    beta[j] += extra;
                }
                uu = weighted_sq(w, u, wu);
                rec.reorthogonalized = true;
            }
        }
        rec.beta = std::move(beta);
        rec.phi = std::move(phi);
        cur.p = std::move(d);
        cur.image = std::move(u);
        cur.w_image = std::move(wu);
        cur.aux = std::move(aux);
        cur.delta = uu;
    };

    auto store_current = [&]() {
        if (cfg.record_directions) {
            trace.directions_p.push_back(cur.p);
            trace.directions_q.push_back(cur.image);
        }
        dirs.push(std::move(cur));
        cur = Direction{};
    };

    {
        StepRecord dummy;
        orthogonalize(raw_direction(s), dummy, pending);
    }

    std::size_t k = 0;
    while (true) {
        if (k >= cfg.max_iterations) {
            trace.status = SolveStatus::max_iter;
            break;
        }
        const double delta = cur.delta;
        const double gamma = dot(cur.w_image, s);
        pending.delta = delta;
        pending.gamma = gamma;

        if (detail::is_breakdown(gamma, delta, res_w)) {
            trace.breakdown = BreakdownInfo{k, gamma};
            pending.alpha = 0.0;
            if (cfg.breakdown_policy == BreakdownPolicy::halt || !(delta > 0.0)) {
                trace.steps.push_back(std::move(pending));
                trace.status = SolveStatus::breakdown;
                break;
            }
            // gamma = 0: the residual does not move; keep the direction and
            // take the next one from its image instead of from the residual
            const Vector seed = recovery(cur.image);
            store_current();
            ++k;
            record_residual();
            StepRecord next;
            orthogonalize(seed, pending, next);
            trace.steps.push_back(std::move(pending));
            pending = std::move(next);
            pending.recovery_direction = true;
            continue;
        }

        const double alpha = gamma / delta;
        pending.alpha = alpha;
        axpy(alpha, cur.p, x);
        axpy(-alpha, cur.image, s);
        if (track_aux) axpy(-alpha, cur.aux, r);
        ++k;
        res_w = std::sqrt(std::max(0.0, weighted_sq(w, s, ws)));
        record_residual();
        store_current();

        if (detail::converged(trace, cfg)) {
            trace.steps.push_back(std::move(pending));
            trace.status = SolveStatus::converged;
            break;
        }
        if (k >= cfg.max_iterations) {
            trace.steps.push_back(std::move(pending));
            trace.status = SolveStatus::max_iter;
            break;
        }
        if (dirs.maybe_restart(k)) trace.restart_markers.push_back(k);

        StepRecord next;
        orthogonalize(raw_direction(s), pending, next);
        trace.steps.push_back(std::move(pending));
        pending = std::move(next);
    }

    out.iterations = k;
    out.x = std::move(x);
    return out;
}

void check_dims(const LinearSystem& sys, std::size_t h_dim, std::size_t w_dim) {
    const std::size_t n = sys.a.dim();
    if (h_dim != n) throw DimensionMismatch("preconditioner", n, h_dim);
    if (w_dim != n) throw DimensionMismatch("weight", n, w_dim);
}

}  // namespace

SolveResult wp_gcr_right(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                         const SolveConfig& cfg) {
    cfg.validate();
    check_dims(sys, h.dim(), w.dim());
    Vector x = detail::initial_guess(sys);
    Vector r = subtract(sys.b, sys.a.apply(x));
    const double reference = cfg.stopping_norm == StoppingNorm::weighted ? w_norm(w, sys.b) : norm2(sys.b);
    const LinearOperator& a = sys.a;
    return gcr_engine(
        w, cfg, std::move(x), Vector{}, std::move(r), false, reference,
        [&](const Vector& s) { return h.apply(s); },
        [&](const Vector& d, Vector& u, Vector& aux) {
            u = a.apply(d);
            aux.clear();
        },
        [&](const Vector& q) { return h.apply(q); });
}

SolveResult wp_gcr_left(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                        const SolveConfig& cfg) {
    cfg.validate();
    check_dims(sys, h.dim(), w.dim());
    Vector x = detail::initial_guess(sys);
    Vector r = subtract(sys.b, sys.a.apply(x));
    Vector z = h.apply(r);
    double reference = 0.0;
    if (cfg.stopping_norm == StoppingNorm::weighted) {
        reference = detail::x0_is_zero(sys) ? w_norm(w, z) : w_norm(w, h.apply(sys.b));
    } else {
        reference = norm2(sys.b);
    }
    const LinearOperator& a = sys.a;
    return gcr_engine(
        w, cfg, std::move(x), std::move(r), std::move(z), true, reference,
        [](const Vector& s) { return s; },
        [&](const Vector& d, Vector& u, Vector& aux) {
            aux = a.apply(d);
            u = h.apply(aux);
        },
        [](const Vector& y) { return y; });
}

SolveResult wp_mr(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w, SolveConfig cfg) {
    cfg.restart_period.reset();
    cfg.truncation_window = 0;
    return wp_gcr_right(sys, h, w, cfg);
}

SolveResult wp_orthomin_k(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                          std::size_t k, SolveConfig cfg) {
    cfg.restart_period.reset();
    cfg.truncation_window = k;
    return wp_gcr_right(sys, h, w, cfg);
}

SolveResult wp_gcr_restarted(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                             std::size_t k, SolveConfig cfg) {
    cfg.truncation_window.reset();
    cfg.restart_period = k;
    return wp_gcr_right(sys, h, w, cfg);
}

}  // namespace wpk
