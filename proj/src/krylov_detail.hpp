#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>

#include "wpk/error.hpp"
#include "wpk/krylov.hpp"

namespace wpk::detail {

/// Relative breakdown threshold on gamma_i against ||q_i||_W ||r_i||_W.
inline constexpr double kBreakdownTolerance = 1e-14;
/// Loss of W-orthogonality that triggers a second Gram-Schmidt pass.
inline constexpr double kReorthogonalizeThreshold = 1e-6;

inline Vector initial_guess(const LinearSystem& sys) {
    const std::size_t n = sys.a.dim();
    if (sys.b.size() != n) throw DimensionMismatch("LinearSystem b", n, sys.b.size());
    if (sys.x0.empty()) return Vector(n, 0.0);
    if (sys.x0.size() != n) throw DimensionMismatch("LinearSystem x0", n, sys.x0.size());
    return sys.x0;
}

inline bool x0_is_zero(const LinearSystem& sys) {
    for (double v : sys.x0)
        if (v != 0.0) return false;
    return true;
}

inline double safe_sqrt(double v) { return v > 0.0 ? std::sqrt(v) : 0.0; }

/// One stored search direction with its image and the data needed for
/// orthogonalization.
struct Direction {
    Vector p;
    Vector image;    // q_j = A p_j, or H A p_j for left preconditioning
    Vector w_image;  // W q_j (or H q_j in the WHP arrangement)
    Vector aux;      // A p_j where the Euclidean residual needs it
    double delta = 0.0;
};

/// Direction history honoring the Orthomin window and GCR restart period.
class DirectionSet {
public:
    explicit DirectionSet(const SolveConfig& cfg) : window_(cfg.truncation_window), restart_(cfg.restart_period) {}

    void push(Direction d) {
        dirs_.push_back(std::move(d));
        if (window_) {
            while (dirs_.size() > *window_) dirs_.pop_front();
        }
    }

    /// Called after iteration `completed` (number of updates so far);
    /// returns true when the set was re-initialized.
    bool maybe_restart(std::size_t completed) {
        if (!restart_ || completed == 0) return false;
        if (completed % *restart_ != 0) return false;
        dirs_.clear();
        return true;
    }

    const std::deque<Direction>& items() const noexcept { return dirs_; }
    std::deque<Direction>& items() noexcept { return dirs_; }
    bool empty() const noexcept { return dirs_.empty(); }

private:
    std::optional<std::size_t> window_;
    std::optional<std::size_t> restart_;
    std::deque<Direction> dirs_;
};

inline bool is_breakdown(double gamma, double delta, double residual_w) {
    if (!(delta > 0.0)) return true;
    return std::abs(gamma) <= kBreakdownTolerance * std::sqrt(delta) * residual_w;
}

inline bool converged(const IterationTrace& t, const SolveConfig& cfg) {
    const double current = cfg.stopping_norm == StoppingNorm::weighted ? t.residual_norm_weighted.back()
                                                                      : t.residual_norm_euclidean.back();
    return current < cfg.rel_tolerance * t.reference_norm || current == 0.0;
}

}  // namespace wpk::detail
