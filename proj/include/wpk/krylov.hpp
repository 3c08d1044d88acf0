#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wpk/dense.hpp"
#include "wpk/operator.hpp"
#include "wpk/weighted.hpp"

namespace wpk {

enum class StoppingNorm { weighted, euclidean };
enum class BreakdownPolicy { halt, restart_orthodir_style };
enum class SolveStatus { converged, max_iter, breakdown };

std::string to_string(SolveStatus s);
std::string to_string(StoppingNorm s);

struct SolveConfig {
    std::size_t max_iterations = 500;
    /// Stop once ||r_i|| < rel_tolerance * ||b|| in the stopping norm.
    double rel_tolerance = 1e-6;
    /// GCR(k): the direction set is cleared every k iterations.
    std::optional<std::size_t> restart_period;
    /// Orthomin(k): orthogonalize against the last k directions only; 0 is MR.
    std::optional<std::size_t> truncation_window;
    StoppingNorm stopping_norm = StoppingNorm::weighted;
    BreakdownPolicy breakdown_policy = BreakdownPolicy::halt;

    // diagnostics, off by default
    bool record_iterates = false;
    bool record_directions = false;
    /// Computes ||A z_i||_W directly each iteration (one extra W application).
    bool record_image_norms = false;

    void validate() const;
};

/// A x = b. An empty x0 means the zero initial guess.
struct LinearSystem {
    LinearOperator a;
    Vector b;
    Vector x0;
};

struct StepRecord {
    double alpha = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    /// beta_{i,j} and Phi_{i,j} used to build direction i+1, oldest first.
    std::vector<double> beta;
    std::vector<double> phi;
    /// ||A z_i||_W when requested, NaN otherwise.
    double image_norm = 0.0;
    bool reorthogonalized = false;
    /// Direction i was generated by the Orthodir-style recovery.
    bool recovery_direction = false;
};

struct BreakdownInfo {
    std::size_t iteration = 0;
    double gamma = 0.0;
};

/// Entry i of the residual arrays describes r_i; steps[i] describes the
/// update from x_i to x_{i+1}. A breakdown under the halt policy leaves
/// steps.size() == residual arrays size.
struct IterationTrace {
    std::vector<double> residual_norm_weighted;
    std::vector<double> residual_norm_euclidean;
    std::vector<StepRecord> steps;
    /// Iteration indices at which the direction set was re-initialized.
    std::vector<std::size_t> restart_markers;
    std::optional<BreakdownInfo> breakdown;
    SolveStatus status = SolveStatus::max_iter;
    /// ||b|| (or ||H b|| for left preconditioning) in the stopping norm.
    double reference_norm = 0.0;

    std::vector<Vector> iterates;      // x_0, x_1, ... when recorded
    std::vector<Vector> directions_p;  // when recorded
    std::vector<Vector> directions_q;  // images A p_j (H A p_j for left preconditioning)
};

struct SolveResult {
    Vector x;
    IterationTrace trace;
    std::size_t iterations = 0;
    SolveStatus status() const noexcept { return trace.status; }
};

/// Weighted, right-preconditioned GCR. Restart and truncation options of the
/// config select GCR(k), Orthomin(k) and MR.
SolveResult wp_gcr_right(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                         const SolveConfig& cfg);

/// Weighted, left-preconditioned GCR; minimizes ||H(b - A x)||_W and records
/// ||z_i||_W as the weighted residual.
SolveResult wp_gcr_left(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                        const SolveConfig& cfg);

/// GCR with an SPD preconditioner used as its own weight, arranged so each
/// iteration costs one application of A and one of H.
SolveResult whp_gcr(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg);

/// Variant storing p_j and y_j = H q_j; the Euclidean residual is not part of
/// the recurrence and is recomputed from x for monitoring.
SolveResult whp_gcr_alt_a(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg);

/// Variant storing p_j and q_j; y_i = H q_i is recomputed every iteration.
SolveResult whp_gcr_alt_b(const LinearSystem& sys, const PreconditionerHandle& h, const SolveConfig& cfg);

SolveResult wp_mr(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                  SolveConfig cfg);
SolveResult wp_orthomin_k(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                          std::size_t k, SolveConfig cfg);
SolveResult wp_gcr_restarted(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                             std::size_t k, SolveConfig cfg);

/// Right-preconditioned GMRES in the W inner product: modified Gram-Schmidt
/// Arnoldi on A H with Givens rotations. Used as an independent reference for
/// the GCR family. Ignores restart/truncation options.
SolveResult gmres_arnoldi_oracle(const LinearSystem& sys, const PreconditionerHandle& h, const WeightOperator& w,
                                 const SolveConfig& cfg);

}  // namespace wpk
