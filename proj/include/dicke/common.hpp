/**
 * Shared aliases and the error hierarchy used across the toolkit.
 */

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace dicke {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for all toolkit errors, so callers can catch dicke::error.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A Gaussian exponent with Re(gamma) <= 0: the wavefunction has no finite norm.
struct non_normalizable_error : error {
    using error::error;
};

/// Operation requires a state with nonzero norm (e.g. fidelity of the zero state).
struct degenerate_state_error : error {
    using error::error;
};

}  // namespace dicke
