/**
 * Elementary protocol operations: the conditioned QND operator built from an
 * arbitrary light state, its closed form for photon-subtracted squeezed
 * vacuum, quadrature displacement, and the rotated-quadrature variant.
 *
 * Conditioning a QND pass (interaction exp(-2i kappa x_A x_L)) on a homodyne
 * outcome p_L applies the multiplication operator Phi(kappa x_A + p_L) to the
 * atoms, where Phi is the Fourier transform of the light wavefunction under
 * <p|x> = (1/sqrt(pi)) exp(-2 i x p). The squared norm of the conditioned
 * (unnormalized) state is the outcome probability density at p_L.
 */

#pragma once

#include <optional>

#include "dicke/cvstate.hpp"

namespace dicke::ops {

/// One conditioned interaction: coupling kappa, light squeezing r (r > 0
/// squeezes the x quadrature of the light), atomic quadrature angle phi, and
/// the recorded homodyne outcome p_L. epsilon_override, when set, replaces
/// the physical kappa^2 exp(-2r) (the limit value 0 is not reachable by any
/// finite r).
struct ThetaParams {
    double kappa = 0.5;
    double r = 0.0;
    double phi = 0.0;
    double p_L = 0.0;
    std::optional<double> epsilon_override{};

    double epsilon() const;
};

struct Displacement {
    cplx alpha{0.0, 0.0};  // alpha = a + i b: a shifts <x>, b shifts <p>
};

/// Requested a rotated conditioned operator (phi not a multiple of pi) at
/// finite epsilon; only the strong-squeezing limit epsilon -> 0 is supported
/// off-axis.
struct rotated_epsilon_error : error {
    using error::error;
};

/// Normalized photon-subtracted squeezed vacuum
/// (2/pi)^{1/4} e^{3r/2} * 2x * exp(-e^{2r} x^2).
PolyGaussian light_pssv(double r);

/// The multiplication kernel Phi(kappa x + p_L) for an arbitrary light state,
/// as a PolyGaussian in the atomic quadrature. Exact Fourier phases are kept;
/// apply it with cvstate::multiply.
PolyGaussian theta_from_light(const PolyGaussian& light, double kappa, double p_L);

/// Applies the conditioned PSSV operator
///   N (x_phi + p_L/kappa) exp(-eps (x_phi + p_L/kappa)^2),
/// N = 2 kappa (2/pi)^{1/4} e^{-3r/2}, to a state. Exact for phi = 0 mod pi
/// at any epsilon; for other phi requires epsilon <= 1e-12 and acts as the
/// limit operator N (x cos(phi) + p sin(phi) + p_L/kappa).
PolyGaussian theta_s(const ThetaParams& params, const PolyGaussian& state);

/// Coherent displacement psi'(x) = exp(2ibx - iab) psi(x - a); norm
/// preserving, and the composition law
/// displace(a2) displace(a1) = exp(i Im(a2 conj(a1))) displace(a1 + a2)
/// holds exactly including global phase.
PolyGaussian displace(const Displacement& d, const PolyGaussian& state);

}  // namespace dicke::ops

namespace dicke {
using ops::Displacement;
using ops::ThetaParams;
}  // namespace dicke
