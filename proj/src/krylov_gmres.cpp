#include <cmath>
#include <vector>

#include "krylov_detail.hpp"
#include "wpk/krylov.hpp"

namespace wpk {

namespace {

struct Givens {
    double c = 1.0;
    double s = 0.0;
};

Givens make_givens(double a, double b) {
    if (b == 0.0) return {1.0, 0.0};
    const double r = std::hypot(a, b);
    return {a / r, b / r};
}

}  // namespace

SolveResult gmres_arnoldi_oracle(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                                 const SolveConfig& cfg) {
    cfg.validate();
    const std::size_t n = sys.a.dim();
    if (h.dim() != n) throw DimensionMismatch("preconditioner", n, h.dim());
    if (w.dim() != n) throw DimensionMismatch("weight", n, w.dim());
    const LinearOperator& a = sys.a;

    const Vector x0 = detail::initial_guess(sys);
    const Vector r0 = subtract(sys.b, a.apply(x0));

    SolveResult out;
    IterationTrace& trace = out.trace;
    trace.reference_norm = cfg.stopping_norm == StoppingNorm::weighted ? w_norm(w, sys.b) : norm2(sys.b);

    Vector wr0 = w.apply(r0);
    const double beta = detail::safe_sqrt(dot(r0, wr0));
    trace.residual_norm_weighted.push_back(beta);
    trace.residual_norm_euclidean.push_back(norm2(r0));
    if (cfg.record_iterates) trace.iterates.push_back(x0);
    if (detail::converged(trace, cfg)) {
        trace.status = SolveStatus::converged;
        out.x = x0;
        return out;
    }

    std::vector<Vector> v{scaled(1.0 / beta, r0)};
    std::vector<Vector> wv{scaled(1.0 / beta, wr0)};
    std::vector<std::vector<double>> r_cols;  // triangular factor, column k has k+1 entries
    std::vector<Givens> rotations;
    std::vector<double> g{beta};

    // x_k = x0 + H V_k y_k with R_k y_k = g_{0..k-1}
    auto current_x = [&](std::size_t k) {
        std::vector<double> y(k, 0.0);
        for (std::size_t i = k; i-- > 0;) {
            double s = g[i];
            for (std::size_t j = i + 1; j < k; ++j) s -= r_cols[j][i] * y[j];
            y[i] = s / r_cols[i][i];
        }
        Vector u(n, 0.0);
        for (std::size_t j = 0; j < k; ++j) axpy(y[j], v[j], u);
        return add(x0, h.apply(u));
    };

    bool need_x = !w.is_identity() || cfg.record_iterates;
    std::size_t k = 0;
    Vector x = x0;
    while (true) {
        if (k >= cfg.max_iterations) {
            trace.status = SolveStatus::max_iter;
            break;
        }
        Vector t = a.apply(h.apply(v[k]));
        const double t_norm = detail::safe_sqrt(dot(t, w.apply(t)));
        std::vector<double> col(k + 2, 0.0);
        for (std::size_t j = 0; j <= k; ++j) {
            col[j] = dot(wv[j], t);
            axpy(-col[j], v[j], t);
        }
        Vector wt = w.apply(t);
        const double next = detail::safe_sqrt(dot(t, wt));
        col[k + 1] = next;
        const bool happy = next <= 1e-14 * t_norm;

        for (std::size_t j = 0; j < k; ++j) {
            const double a0 = col[j], a1 = col[j + 1];
            col[j] = rotations[j].c * a0 + rotations[j].s * a1;
            col[j + 1] = -rotations[j].s * a0 + rotations[j].c * a1;
        }
        const Givens gr = make_givens(col[k], col[k + 1]);
        col[k] = gr.c * col[k] + gr.s * col[k + 1];
        col.pop_back();
        rotations.push_back(gr);
        g.push_back(-gr.s * g[k]);
        g[k] = gr.c * g[k];
        r_cols.push_back(std::move(col));
        ++k;

        const double res_w = happy ? 0.0 : std::abs(g[k]);
        double res_e = res_w;
        if (need_x || happy) {
            x = current_x(k);
            if (!w.is_identity()) res_e = norm2(subtract(sys.b, a.apply(x)));
        }
        trace.residual_norm_weighted.push_back(res_w);
        trace.residual_norm_euclidean.push_back(res_e);
        if (cfg.record_iterates) trace.iterates.push_back(x);
        trace.steps.push_back(StepRecord{});

        if (happy || detail::converged(trace, cfg)) {
            trace.status = SolveStatus::converged;
            break;
        }
        v.push_back(scaled(1.0 / next, t));
        wv.push_back(scaled(1.0 / next, wt));
    }
    out.iterations = k;
    out.x = (need_x && k > 0) ? std::move(x) : (k > 0 ? current_x(k) : x0);
    return out;
}

}  // namespace wpk
