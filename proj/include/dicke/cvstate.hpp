/**
 * Exact algebra of polynomial-times-Gaussian wavefunctions in one quadrature.
 *
 * A PolyGaussian is psi(x) = (sum_k coeffs[k] x^k) * exp(-gamma x^2 + beta x),
 * kept unnormalized; its squared norm doubles as a probability weight. The
 * quadrature convention is [x,p] = i/2, so the vacuum is
 * (2/pi)^{1/4} exp(-x^2) and the number-state wavefunctions are
 * psi_n(x) = (2/pi)^{1/4} H_n(sqrt(2) x) exp(-x^2) / sqrt(2^n n!).
 *
 * Every operation here is a pure function on immutable values; all integrals
 * are evaluated in closed form through the Gaussian moment recurrence.
 */

#pragma once

#include <vector>

#include "dicke/common.hpp"

namespace dicke::cvstate {

struct PolyGaussian {
    std::vector<cplx> coeffs;  // monomial coefficients c_0..c_d
    cplx gamma{1.0, 0.0};      // quadratic exponent, Re(gamma) > 0
    cplx beta{0.0, 0.0};       // linear exponent

    /// Trims trailing coefficients below 1e-14 relative to the largest one
    /// (canonical degree) and rejects non-normalizable exponents.
    PolyGaussian(std::vector<cplx> coeffs_, cplx gamma_, cplx beta_ = {});

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct FockVector {
    std::vector<cplx> amps;  // amplitudes over |0>..|N>

    int dim() const { return static_cast<int>(amps.size()); }
    double norm2() const;
    FockVector normalized() const;
};

/// The vacuum wavefunction (2/pi)^{1/4} exp(-x^2), normalized.
PolyGaussian vacuum();

/// Integral of x^n exp(-gamma x^2 + beta x) over the real line, by the
/// closed recurrence M_n = [(n-1) M_{n-2} + beta M_{n-1}] / (2 gamma) with
/// M_0 = sqrt(pi/gamma) exp(beta^2 / (4 gamma)).
cplx gaussian_moment(int n, cplx gamma, cplx beta);

/// All moments M_0..M_n at once (the recurrence is shared work).
std::vector<cplx> gaussian_moments(int n, cplx gamma, cplx beta);

/// Integral of conj(bra(x)) * ket(x) dx.
cplx overlap(const PolyGaussian& bra, const PolyGaussian& ket);

/// <psi|psi>, always real and >= 0.
double norm2(const PolyGaussian& s);

/// Pointwise product of two PolyGaussians (used to apply multiplication-
/// operator kernels; note the result is a*b, not conj(a)*b).
PolyGaussian multiply(const PolyGaussian& a, const PolyGaussian& b);

/// psi(x) -> scalar * psi(x).
PolyGaussian scale(const PolyGaussian& s, cplx factor);

/// psi(x) -> x * psi(x).
PolyGaussian apply_position(const PolyGaussian& s);

/// psi(x) -> (p psi)(x) = -(i/2) d/dx psi(x); degree grows by at most 1.
PolyGaussian apply_momentum(const PolyGaussian& s);

/// Antisqueezing stretch psi'(x) = psi(x / factor) / sqrt(factor),
/// norm-preserving; factor sqrt(N eps + 1) undoes the protocol's residual
/// squeezing.
PolyGaussian rescale_quadrature(const PolyGaussian& s, double factor);

/// Monomial coefficients of the polynomial part of psi_n, i.e. of
/// (2/pi)^{1/4} H_n(sqrt(2) x) / sqrt(2^n n!).
std::vector<cplx> fock_basis_poly(int n);

/// The basis wavefunction psi_n as a PolyGaussian.
PolyGaussian fock_state(int n);

/// Number-basis amplitudes a_n = <psi_n|state> for n = 0..n_max.
FockVector to_fock(const PolyGaussian& state, int n_max);

/// 1 - sum |a_n|^2 / norm2(state): the weight missed by the truncation.
double truncation_tail(const PolyGaussian& state, const FockVector& amps);

/// Reconstructs sum_n amps[n] psi_n as a PolyGaussian (gamma = 1, beta = 0).
PolyGaussian from_fock(const FockVector& f);

/// |<target|state>|^2 / (<state|state> <target|target>); phase-insensitive
/// in both arguments. Throws degenerate_state_error on a zero-norm state.
double fidelity_pure(const PolyGaussian& state, const FockVector& target);

}  // namespace dicke::cvstate

namespace dicke {
using cvstate::FockVector;
using cvstate::PolyGaussian;
}  // namespace dicke
