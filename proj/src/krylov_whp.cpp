// GCR with an SPD preconditioner H used as the inner-product weight. Three
// arrangements with identical iterates in exact arithmetic:
//   whp_gcr       stores p_j, q_j and y_j = H q_j (one H per iteration)
//   whp_gcr_alt_a stores p_j and y_j, never updates the Euclidean residual
//   whp_gcr_alt_b stores p_j and q_j, recomputes y_i = H q_i
// All inner products below are Euclidean; <u, H v> is the H-inner product.

#include <algorithm>
#include <cmath>
#include <limits>

#include "krylov_detail.hpp"
#include "wpk/krylov.hpp"

namespace wpk {

namespace {

using detail::Direction;
using detail::DirectionSet;

struct WhpSetup {
    Vector x;
    Vector r;
    Vector z;
    double reference = 0.0;
};

WhpSetup whp_setup(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg) {
    cfg.validate();
    if (!h.hermitian()) throw NotHermitianPreconditioner();
    if (h.dim() != sys.a.dim()) throw DimensionMismatch("preconditioner", sys.a.dim(), h.dim());
    WhpSetup s;
    s.x = detail::initial_guess(sys);
    s.r = subtract(sys.b, sys.a.apply(s.x));
    s.z = h.apply(s.r);
    if (cfg.stopping_norm == StoppingNorm::weighted) {
        s.reference = detail::x0_is_zero(sys) ? detail::safe_sqrt(dot(s.r, s.z))
                                              : detail::safe_sqrt(dot(sys.b, h.apply(sys.b)));
    } else {
        s.reference = norm2(sys.b);
    }
    return s;
}

/// Residual bookkeeping shared by the three arrangements.
class Recorder {
public:
    Recorder(SolveResult& out, const SolveConfig& cfg) : out_(out), cfg_(cfg) {}

    void record(double res_h, double res_e, const Vector& x) {
        out_.trace.residual_norm_weighted.push_back(res_h);
        out_.trace.residual_norm_euclidean.push_back(res_e);
        if (cfg_.record_iterates) out_.trace.iterates.push_back(x);
    }
    bool converged() const { return detail::converged(out_.trace, cfg_); }

private:
    SolveResult& out_;
    const SolveConfig& cfg_;
};

void finish(SolveResult& out, Vector x, std::size_t k) {
    out.iterations = k;
    out.x = std::move(x);
}

}  // namespace

SolveResult whp_gcr(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg) {
    auto [x, r, z, reference] = whp_setup(sys, h, cfg);
    const LinearOperator& a = sys.a;
    SolveResult out;
    IterationTrace& trace = out.trace;
    trace.reference_norm = reference;
    Recorder rec(out, cfg);

    double res_h = detail::safe_sqrt(dot(r, z));
    rec.record(res_h, norm2(r), x);
    if (rec.converged()) {
        trace.status = SolveStatus::converged;
        finish(out, std::move(x), 0);
        return out;
    }

    DirectionSet dirs(cfg);
    // current direction: p in .p, q in .image, y = H q in .w_image
    Direction cur;
    cur.p = z;
    cur.image = a.apply(cur.p);
    cur.w_image = h.apply(cur.image);
    StepRecord pending;
    pending.image_norm = std::numeric_limits<double>::quiet_NaN();

    // q <- A seed, p <- seed, then modified Gram-Schmidt in the H-inner
    // product using the stored y_j; finally y = H q.
    auto build_direction = [&](Vector seed, StepRecord& step) {
        Vector q = a.apply(seed);
        const auto& items = dirs.items();
        step.beta.assign(items.size(), 0.0);
        step.phi.assign(items.size(), 0.0);
        for (std::size_t j = 0; j < items.size(); ++j) {
            const double phi = dot(items[j].w_image, q);
            const double beta = phi / items[j].delta;
            axpy(-beta, items[j].p, seed);
            axpy(-beta, items[j].image, q);
            step.phi[j] = phi;
            step.beta[j] = beta;
        }
        cur.p = std::move(seed);
        cur.w_image = h.apply(q);
        cur.image = std::move(q);
    };

    auto store = [&]() {
        if (cfg.record_directions) {
            trace.directions_p.push_back(cur.p);
            trace.directions_q.push_back(cur.image);
        }
        dirs.push(std::move(cur));
        cur = Direction{};
    };

    std::size_t k = 0;
    while (true) {
        if (k >= cfg.max_iterations) {
            trace.status = SolveStatus::max_iter;
            break;
        }
        const double delta = dot(cur.w_image, cur.image);
        const double gamma = dot(cur.image, z);
        cur.delta = delta;
        pending.delta = delta;
        pending.gamma = gamma;

        if (detail::is_breakdown(gamma, delta, res_h)) {
            trace.breakdown = BreakdownInfo{k, gamma};
            pending.alpha = 0.0;
            if (cfg.breakdown_policy == BreakdownPolicy::halt || !(delta > 0.0)) {
                trace.steps.push_back(std::move(pending));
                trace.status = SolveStatus::breakdown;
                break;
            }
            Vector seed = cur.w_image;  // H q_i, Orthodir-style
            store();
            ++k;
            rec.record(res_h, norm2(r), x);
            build_direction(std::move(seed), pending);
            trace.steps.push_back(std::move(pending));
            pending = StepRecord{};
            pending.image_norm = std::numeric_limits<double>::quiet_NaN();
            pending.recovery_direction = true;
            continue;
        }

        const double alpha = gamma / delta;
        pending.alpha = alpha;
        axpy(alpha, cur.p, x);
        axpy(-alpha, cur.image, r);
        axpy(-alpha, cur.w_image, z);
        ++k;
        res_h = detail::safe_sqrt(dot(r, z));
        rec.record(res_h, norm2(r), x);
        store();

        if (rec.converged()) {
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
        build_direction(z, pending);
        trace.steps.push_back(std::move(pending));
        pending = StepRecord{};
        pending.image_norm = std::numeric_limits<double>::quiet_NaN();
    }
    finish(out, std::move(x), k);
    return out;
}

SolveResult whp_gcr_alt_a(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg) {
    auto [x, r, z, reference] = whp_setup(sys, h, cfg);
    const LinearOperator& a = sys.a;
    SolveResult out;
    IterationTrace& trace = out.trace;
    trace.reference_norm = reference;
    Recorder rec(out, cfg);

    // r is only used for monitoring; it is recomputed as b - A x
    auto monitor = [&]() {
        r = subtract(sys.b, a.apply(x));
        const double res_h = detail::safe_sqrt(dot(r, h.apply(r)));
        rec.record(res_h, norm2(r), x);
        return res_h;
    };
    double res_h = detail::safe_sqrt(dot(r, z));
    rec.record(res_h, norm2(r), x);
    if (rec.converged()) {
        trace.status = SolveStatus::converged;
        finish(out, std::move(x), 0);
        return out;
    }

    DirectionSet dirs(cfg);
    // .p = p, .aux = q~ = A z (never orthogonalized), .w_image = y (orthogonalized)
    Direction cur;
    cur.p = z;
    cur.aux = a.apply(cur.p);
    cur.w_image = h.apply(cur.aux);
    StepRecord pending;
    pending.image_norm = std::numeric_limits<double>::quiet_NaN();

    auto build_direction = [&](Vector seed, StepRecord& step) {
        Vector qt = a.apply(seed);
        Vector y = h.apply(qt);
        const auto& items = dirs.items();
        step.beta.assign(items.size(), 0.0);
        step.phi.assign(items.size(), 0.0);
        for (std::size_t j = 0; j < items.size(); ++j) {
            step.phi[j] = dot(items[j].w_image, qt);
            step.beta[j] = step.phi[j] / items[j].delta;
        }
        for (std::size_t j = 0; j < items.size(); ++j) {
            axpy(-step.beta[j], items[j].p, seed);
            axpy(-step.beta[j], items[j].w_image, y);
        }
        cur.p = std::move(seed);
        cur.aux = std::move(qt);
        cur.w_image = std::move(y);
    };

    auto store = [&]() {
        if (cfg.record_directions) {
            trace.directions_p.push_back(cur.p);
            // q_j = A p_j is not stored by this arrangement; reconstruct for diagnostics
            trace.directions_q.push_back(a.apply(cur.p));
        }
        Direction d;
        d.p = std::move(cur.p);
        d.w_image = std::move(cur.w_image);
        d.delta = cur.delta;
        dirs.push(std::move(d));
        cur = Direction{};
    };

    std::size_t k = 0;
    while (true) {
        if (k >= cfg.max_iterations) {
            trace.status = SolveStatus::max_iter;
            break;
        }
        const double delta = dot(cur.w_image, cur.aux);
        const double gamma = dot(cur.aux, z);
        cur.delta = delta;
        pending.delta = delta;
        pending.gamma = gamma;

        if (detail::is_breakdown(gamma, delta, res_h)) {
            trace.breakdown = BreakdownInfo{k, gamma};
            pending.alpha = 0.0;
            if (cfg.breakdown_policy == BreakdownPolicy::halt || !(delta > 0.0)) {
                trace.steps.push_back(std::move(pending));
                trace.status = SolveStatus::breakdown;
                break;
            }
            Vector seed = cur.w_image;
            store();
            ++k;
            rec.record(res_h, trace.residual_norm_euclidean.back(), x);
            build_direction(std::move(seed), pending);
            trace.steps.push_back(std::move(pending));
            pending = StepRecord{};
            pending.image_norm = std::numeric_limits<double>::quiet_NaN();
            pending.recovery_direction = true;
            continue;
        }

        const double alpha = gamma / delta;
        pending.alpha = alpha;
        axpy(alpha, cur.p, x);
        axpy(-alpha, cur.w_image, z);
        ++k;
        res_h = monitor();
        store();

        if (rec.converged()) {
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
        build_direction(z, pending);
        trace.steps.push_back(std::move(pending));
        pending = StepRecord{};
        pending.image_norm = std::numeric_limits<double>::quiet_NaN();
    }
    finish(out, std::move(x), k);
    return out;
}

SolveResult whp_gcr_alt_b(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg) {
    auto [x, r, z, reference] = whp_setup(sys, h, cfg);
    const LinearOperator& a = sys.a;
    SolveResult out;
    IterationTrace& trace = out.trace;
    trace.reference_norm = reference;
    Recorder rec(out, cfg);

    double res_h = detail::safe_sqrt(dot(r, z));
    rec.record(res_h, norm2(r), x);
    if (rec.converged()) {
        trace.status = SolveStatus::converged;
        finish(out, std::move(x), 0);
        return out;
    }

    DirectionSet dirs(cfg);
    // .p = p, .image = q (orthogonalized), .aux = y~ = H A z (not orthogonalized)
    Direction cur;
    cur.p = z;
    cur.image = a.apply(cur.p);
    cur.aux = h.apply(cur.image);
    bool q_orthogonalized = false;
    StepRecord pending;
    pending.image_norm = std::numeric_limits<double>::quiet_NaN();

    auto build_direction = [&](Vector seed, StepRecord& step) {
        Vector q = a.apply(seed);
        Vector yt = h.apply(q);
        const auto& items = dirs.items();
        step.beta.assign(items.size(), 0.0);
        step.phi.assign(items.size(), 0.0);
        // <q_j, H A z> = <q_j, A z>_H using the stored q_j and the fresh y~
        for (std::size_t j = 0; j < items.size(); ++j) {
            step.phi[j] = dot(items[j].image, yt);
            step.beta[j] = step.phi[j] / items[j].delta;
        }
        for (std::size_t j = 0; j < items.size(); ++j) {
            axpy(-step.beta[j], items[j].p, seed);
            axpy(-step.beta[j], items[j].image, q);
        }
        q_orthogonalized = !items.empty();
        cur.p = std::move(seed);
        cur.image = std::move(q);
        cur.aux = std::move(yt);
    };

    auto store = [&]() {
        if (cfg.record_directions) {
            trace.directions_p.push_back(cur.p);
            trace.directions_q.push_back(cur.image);
        }
        Direction d;
        d.p = std::move(cur.p);
        d.image = std::move(cur.image);
        d.delta = cur.delta;
        dirs.push(std::move(d));
        cur = Direction{};
    };

    std::size_t k = 0;
    while (true) {
        if (k >= cfg.max_iterations) {
            trace.status = SolveStatus::max_iter;
            break;
        }
        const double delta = dot(cur.aux, cur.image);
        const double gamma = dot(cur.image, z);
        cur.delta = delta;
        pending.delta = delta;
        pending.gamma = gamma;
        // y_i = H q_i; equals y~_i when q_i was not orthogonalized
        Vector y = q_orthogonalized ? h.apply(cur.image) : cur.aux;

        if (detail::is_breakdown(gamma, delta, res_h)) {
            trace.breakdown = BreakdownInfo{k, gamma};
            pending.alpha = 0.0;
            if (cfg.breakdown_policy == BreakdownPolicy::halt || !(delta > 0.0)) {
                trace.steps.push_back(std::move(pending));
                trace.status = SolveStatus::breakdown;
                break;
            }
            store();
            ++k;
            rec.record(res_h, norm2(r), x);
            build_direction(std::move(y), pending);
            trace.steps.push_back(std::move(pending));
            pending = StepRecord{};
            pending.image_norm = std::numeric_limits<double>::quiet_NaN();
            pending.recovery_direction = true;
            continue;
        }

        const double alpha = gamma / delta;
        pending.alpha = alpha;
        axpy(alpha, cur.p, x);
        axpy(-alpha, cur.image, r);
        axpy(-alpha, y, z);
        ++k;
        res_h = detail::safe_sqrt(dot(r, z));
        rec.record(res_h, norm2(r), x);
        store();

        if (rec.converged()) {
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
        build_direction(z, pending);
        trace.steps.push_back(std::move(pending));
        pending = StepRecord{};
        pending.image_norm = std::numeric_limits<double>::quiet_NaN();
    }
    finish(out, std::move(x), k);
    return out;
}

}  // namespace wpk
