/**
 * Protocol planning: turns a target number-state superposition into a
 * concrete interaction schedule. Real-rooted targets factor into a chain of
 * real displacements; degree-2 targets with complex roots go through the
 * two-angle quartic solver; the direct-mapping path instead engineers the
 * light state for a single pass.
 */

#pragma once

#include <optional>
#include <vector>

#include "dicke/ops.hpp"

namespace dicke::synth {

/// Target's polynomial has complex roots: the real-displacement scheme does
/// not apply (use solve_complex_n2 for degree 2).
struct complex_roots_error : error {
    using error::error;
};

/// Presqueezed variant needs N * epsilon < 1.
struct presqueeze_infeasible_error : error {
    using error::error;
};

/// The quartic produced no usable root; reported rather than patched over,
/// since every tested target admits one.
struct no_admissible_root_error : error {
    using error::error;
};

/// One interaction step: displacement, then a conditioned QND pass. When
/// `light` is set the kernel comes from that light state instead of the
/// closed PSSV form (the direct-mapping path); theta.kappa still applies.
struct ScheduleStep {
    Displacement pre;
    ThetaParams theta;
    std::optional<PolyGaussian> light{};
};

/// A full plan: steps, the closing displacement, the choice of initial state
/// (vacuum or the narrowed Gaussian exp(-(1 - N eps) x^2)), and the final
/// antisqueezing factor sqrt(N eps + 1) (1 when presqueezed).
struct Schedule {
    std::vector<ScheduleStep> steps;
    Displacement final_displacement{};
    bool presqueezed = false;
    double rescale_factor = 1.0;
};

/// A target superposition together with the roots of its polynomial part.
struct TargetSpec {
    FockVector coeffs;
    std::vector<cplx> roots;
};

/// Monomial coefficients of sum_n c_n H_n(sqrt(2) x) / sqrt(2^n n!) — the
/// polynomial part of the target wavefunction (Gaussian weight dropped).
std::vector<cplx> target_polynomial(const FockVector& coeffs);

/// All complex roots by companion-matrix eigenvalues plus a guarded Newton
/// polish. Coefficients ascending by power; degree must be >= 1.
std::vector<cplx> find_roots(const std::vector<cplx>& poly);

/// Roots with |Im| < 1e-9 (1 + |R|) count as real; borderline targets are
/// routed to the complex solver rather than silently projected.
bool is_real_root(cplx root);

/// Factorizes the target polynomial; roots sorted by real part (ties by
/// imaginary part), which fixes the displacement chain canonically — any
/// permutation prepares the same state.
TargetSpec make_target(const FockVector& coeffs);

/// The real-roots displacement chain. `base` supplies kappa/r (hence
/// epsilon) for every step; phi is forced to 0. With presqueezed the initial
/// state absorbs the squeezing correction instead of a final rescale.
Schedule schedule_real(const TargetSpec& target, const ThetaParams& base,
                       bool presqueezed = false);

/// One solution of the two-step rotated-quadrature synthesis for the target
/// c0|0> + c1|1> + |2>: quadrature angles, the three displacements (summing
/// to zero), the quartic root y = |z|^2 it came from, and the fidelity the
/// reconstructed target achieves analytically.
struct ComplexSolution {
    double phi1 = 0.0;
    double phi2 = 0.0;
    cplx alpha1{};
    cplx alpha2{};
    cplx alpha3{};
    double y = 0.0;
    double planned_fidelity = 0.0;

    double total_displacement2() const {
        return std::norm(alpha1) + std::norm(alpha2) + std::norm(alpha3);
    }
};

/// Solves the degree-2 synthesis with complex roots: builds the real quartic
/// in y = |z|^2, back-substitutes each admissible root, and lifts to
/// displacements with the smallest total magnitude. Solutions are returned
/// best-first (minimal total displacement among those with planned fidelity
/// >= 1 - 1e-9). Throws no_admissible_root_error when nothing survives.
std::vector<ComplexSolution> solve_complex_n2(cplx c0, cplx c1);

/// Schedule realizing a ComplexSolution: two rotated steps at epsilon = 0
/// (kappa and r taken from `base`, epsilon_override forced to 0).
Schedule to_schedule(const ComplexSolution& sol, const ThetaParams& base);

/// Light-state amplitudes u_0..u_n_max whose single QND pass at p_L = 0
/// imprints the sqrt(1+kappa^2)-squeezed target onto vacuum atoms;
/// rescale_quadrature(sqrt(1+kappa^2)) then recovers the target exactly.
FockVector direct_mapping_light(const FockVector& coeffs, double kappa, int n_max);

/// Single-step schedule carrying the direct-mapping light state; its
/// rescale_factor is sqrt(1 + kappa^2).
Schedule make_direct_schedule(const FockVector& coeffs, double kappa, int n_max = -1);

}  // namespace dicke::synth

namespace dicke {
using synth::Schedule;
using synth::TargetSpec;
}  // namespace dicke
