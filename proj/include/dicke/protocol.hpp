/**
 * Runs schedules over the homodyne outcome space: per-outcome output states
 * and densities, completeness of the measurement model, feedback
 * displacement optimization, acceptance windows, and the success-probability
 * vs average-fidelity trade-off curves.
 *
 * Grid evaluations are embarrassingly parallel; partial results are written
 * by grid index and reduced in a fixed order, so integrals are bitwise
 * reproducible regardless of thread count.
 */

#pragma once

#include <vector>

#include "dicke/synth.hpp"

namespace dicke::protocol {

/// Uniform symmetric grid of homodyne outcomes, one axis per protocol step;
/// the joint grid is the tensor product. Antisqueezed light (r = +1) spreads
/// the per-axis density by a factor e^r, leaving ~3e-4 of the mass beyond
/// half_width 6; 9 covers every supported regime to ~1e-8. The trapezoid
/// rule converges superexponentially here, so spacing is not the bottleneck.
struct OutcomeGrid {
    double half_width = 9.0;
    double spacing = 0.02;

    OutcomeGrid() = default;
    OutcomeGrid(double half_width_, double spacing_);

    std::vector<double> points() const;
    /// Trapezoid quadrature weights matching points().
    std::vector<double> weights() const;
};

/// How outcomes are declared "success": a fixed window |p_j| < eta for every
/// step, or a per-outcome fidelity threshold. Feedback additionally applies
/// the fidelity-maximizing displacement to accepted states (restricted to
/// real displacements when feedback_real is set).
struct AcceptanceStrategy {
    enum class Kind { basic, advanced };
    Kind kind = Kind::basic;
    bool feedback = false;
    bool feedback_real = false;
};

struct TradeoffPoint {
    double success_probability = 0.0;
    double average_fidelity = 0.0;
    double parameter = 0.0;  // the eta or threshold that generated the point
};

struct TradeoffCurve {
    std::vector<TradeoffPoint> points;  // sorted by success probability
    std::vector<double> skipped;        // sweep values whose window was empty
};

struct ExecResult {
    PolyGaussian state;  // unnormalized; no rescale applied
    double density;      // squared norm = joint outcome density
};

/// Alternates each step's pre-displacement and conditioned interaction at
/// the recorded outcome, then the final displacement. The initial state is
/// the vacuum, or exp(-(1 - N eps) x^2) normalized when presqueezed.
ExecResult execute(const synth::Schedule& schedule, const std::vector<double>& outcomes);

/// Integral of the joint outcome density over the full grid; equals 1 up to
/// quadrature error for any physical schedule (the measurement is complete).
double completeness_check(const synth::Schedule& schedule, const OutcomeGrid& grid);

struct FeedbackResult {
    Displacement shift;
    double fidelity = 0.0;
};

/// Maximizes fidelity_pure(displace(delta, state), target) over complex
/// delta by compass pattern search (initial step 0.5, shrink 0.5, stop below
/// 1e-6) from starts 0, +/-0.5, +/-0.5i.
FeedbackResult feedback_displacement(const PolyGaussian& state, const FockVector& target,
                                     bool real_only = false);

/// Per-outcome evaluation of a schedule against a target, shared by the
/// sweep operations: joint density and (rescaled, optionally feedback-
/// optimized) fidelity at every grid point, in row-major grid order.
struct PointEval {
    double density = 0.0;
    double fidelity = 0.0;
};
std::vector<PointEval> evaluate_grid(const synth::Schedule& schedule,
                                     const FockVector& target, const OutcomeGrid& grid,
                                     bool feedback, bool feedback_real = false,
                                     bool apply_rescale = true);

/// Success probability and density-weighted average fidelity for each sweep
/// value (eta for basic windows, fidelity threshold for advanced ones).
/// Points come back sorted by success probability; sweep values with an
/// empty acceptance region are recorded in `skipped`.
TradeoffCurve tradeoff(const synth::Schedule& schedule, const FockVector& target,
                       const AcceptanceStrategy& strategy, const OutcomeGrid& grid,
                       const std::vector<double>& sweep, bool apply_rescale = true);

struct MapRow {
    double p1 = 0.0;
    double p2 = 0.0;
    double density = 0.0;
    double fidelity = 0.0;
};

/// Dense (p1, p2) -> (density, fidelity) table for two-step schedules, with
/// feedback-optimized fidelities by default.
std::vector<MapRow> fidelity_map(const synth::Schedule& schedule, const FockVector& target,
                                 const OutcomeGrid& grid, bool feedback = true,
                                 bool apply_rescale = true);

}  // namespace dicke::protocol
