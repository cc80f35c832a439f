#include "dicke/ops.hpp"

#include <cmath>

namespace dicke::ops {

using cvstate::apply_momentum;
using cvstate::apply_position;
using cvstate::scale;

double ThetaParams::epsilon() const {
    if (epsilon_override) return *epsilon_override;
    return kappa * kappa * std::exp(-2.0 * r);
}

PolyGaussian light_pssv(double r) {
    const double amp = std::pow(2.0 / kPi, 0.25) * std::exp(1.5 * r) * 2.0;
    return PolyGaussian({cplx{0.0}, cplx{amp}}, std::exp(2.0 * r), 0.0);
}

PolyGaussian theta_from_light(const PolyGaussian& light, double kappa, double p_L) {
    if (!(kappa > 0.0)) throw error("theta_from_light: kappa must be positive");
    const cplx g = light.gamma;
    const cplx b = light.beta;

    // Fourier transform of a PolyGaussian is again a PolyGaussian:
    //   Phi(p) = (1/sqrt(pi)) Int x^k e^{-g x^2 + (b - 2ip) x} dx summed over k
    // and each moment M_k(g, b - 2ip) equals Q_k(p) * M_0, with Q_k obeying
    // the same recurrence as the moments but with polynomial coefficients.
    const int deg = light.degree();
    std::vector<std::vector<cplx>> q(static_cast<size_t>(deg) + 1);
    q[0] = {cplx{1.0}};
    if (deg >= 1) q[1] = {b / (2.0 * g), cplx{0.0, -1.0} / g};  // (b - 2ip)/(2g)
    for (int k = 2; k <= deg; ++k) {
        // q_k = [(k-1) q_{k-2} + (b - 2ip) q_{k-1}] / (2g)
        std::vector<cplx> next(q[k - 1].size() + 1, cplx{0.0});
        for (size_t j = 0; j < q[k - 2].size(); ++j) next[j] += (k - 1.0) * q[k - 2][j];
        for (size_t j = 0; j < q[k - 1].size(); ++j) {
            next[j] += b * q[k - 1][j];
            next[j + 1] += cplx{0.0, -2.0} * q[k - 1][j];
        }
        for (cplx& v : next) v /= 2.0 * g;
        q[k] = std::move(next);
    }

    // R(p) = sum_k c_k Q_k(p), times the p-independent part of M_0 / sqrt(pi).
    std::vector<cplx> rp(static_cast<size_t>(deg) + 1, cplx{0.0});
    for (int k = 0; k <= deg; ++k) {
        for (size_t j = 0; j < q[k].size(); ++j) rp[j] += light.coeffs[k] * q[k][j];
    }
    const cplx front = std::sqrt(1.0 / g) * std::exp(b * b / (4.0 * g));
    for (cplx& v : rp) v *= front;
    // The full transform is R(p) exp(-p^2/g - i b p / g).

    // Substitute p = kappa x + p_L. Polynomial part via binomial expansion;
    // the exponent contributes gamma = kappa^2/g, beta = -(2 kappa p_L
    // + i b kappa)/g and a constant factor.
    std::vector<cplx> cx(rp.size(), cplx{0.0});
    for (size_t j = 0; j < rp.size(); ++j) {
        // expand (kappa x + p_L)^j: term C(j,m) kappa^m p_L^{j-m} x^m
        std::vector<double> term(j + 1, 0.0);
        double comb = 1.0;
        double powp = 1.0;
        for (int m = static_cast<int>(j); m >= 0; --m) {
            term[m] = comb * std::pow(kappa, m) * powp;
            comb *= static_cast<double>(m) / (j - m + 1.0);
            powp *= p_L;
        }
        for (size_t m = 0; m < term.size(); ++m) cx[m] += rp[j] * term[m];
    }
    const cplx const_factor = std::exp(-(p_L * p_L + cplx{0.0, 1.0} * b * p_L) / g);
    for (cplx& v : cx) v *= const_factor;

    return PolyGaussian(std::move(cx), kappa * kappa / g,
                        -(2.0 * kappa * p_L + cplx{0.0, 1.0} * b * kappa) / g);
}

PolyGaussian theta_s(const ThetaParams& params, const PolyGaussian& state) {
    if (!(params.kappa > 0.0)) throw error("theta_s: kappa must be positive");
    const double eps = params.epsilon();
    const double norm_const = 2.0 * params.kappa * std::pow(2.0 / kPi, 0.25) *
                              std::exp(-1.5 * params.r);
    const double q = params.p_L / params.kappa;

    // phi = 0 mod pi: the operator is a pure function of x and stays exact at
    // any epsilon; cos(phi) = +/-1 is taken exactly.
    const double turns = params.phi / kPi;
    if (std::abs(turns - std::round(turns)) < 1e-12) {
        const double c = (static_cast<long long>(std::llround(turns)) % 2 == 0) ? 1.0 : -1.0;
        // N (c x + q) exp(-eps (c x + q)^2) * psi(x). With c^2 = 1 the
        // Gaussian factor folds into the exponent of the result, so this
        // branch never materializes a standalone eps = 0 kernel.
        std::vector<cplx> poly(state.coeffs.size() + 1, cplx{0.0});
        for (size_t k = 0; k < state.coeffs.size(); ++k) {
            poly[k] += q * state.coeffs[k];
            poly[k + 1] += c * state.coeffs[k];
        }
        const double amp = norm_const * std::exp(-eps * q * q);
        for (cplx& v : poly) v *= amp;
        return PolyGaussian(std::move(poly), state.gamma + eps,
                            state.beta - 2.0 * eps * c * q);
    }

    if (eps > 1e-12) {
        throw rotated_epsilon_error(
            "theta_s: rotated quadrature (phi != 0 mod pi) is only available in the "
            "epsilon -> 0 limit; epsilon = " + std::to_string(eps));
    }
    // Limit operator N (x cos phi + p sin phi + q).
    const double c = std::cos(params.phi);
    const double s = std::sin(params.phi);
    const PolyGaussian xpart = apply_position(state);
    const PolyGaussian ppart = apply_momentum(state);
    std::vector<cplx> poly(std::max(xpart.coeffs.size(), ppart.coeffs.size()), cplx{0.0});
    poly.resize(std::max(poly.size(), state.coeffs.size()), cplx{0.0});
    for (size_t k = 0; k < xpart.coeffs.size(); ++k) poly[k] += c * xpart.coeffs[k];
    for (size_t k = 0; k < ppart.coeffs.size(); ++k) poly[k] += s * ppart.coeffs[k];
    for (size_t k = 0; k < state.coeffs.size(); ++k) poly[k] += q * state.coeffs[k];
    for (cplx& v : poly) v *= norm_const;
    return PolyGaussian(std::move(poly), state.gamma, state.beta);
}

PolyGaussian displace(const Displacement& d, const PolyGaussian& state) {
    const double a = d.alpha.real();
    const double b = d.alpha.imag();
    if (a == 0.0 && b == 0.0) return state;

    // P(x - a) by a binomial (Taylor) shift.
    const size_t n = state.coeffs.size();
    std::vector<cplx> shifted(n, cplx{0.0});
    for (size_t k = 0; k < n; ++k) {
        // distribute c_k (x - a)^k
        cplx term = state.coeffs[k];
        double comb = 1.0;
        double pow_ma = 1.0;
        for (int j = static_cast<int>(k); j >= 0; --j) {
            shifted[j] += term * comb * pow_ma;
            comb *= static_cast<double>(j) / (k - j + 1.0);
            pow_ma *= -a;
        }
    }
    // exp(-gamma (x-a)^2 + beta (x-a) + 2ibx - iab) regroups into a new
    // linear coefficient and a constant factor.
    const cplx g = state.gamma;
    const cplx new_beta = state.beta + 2.0 * g * a + cplx{0.0, 2.0 * b};
    const cplx factor = std::exp(-g * a * a - state.beta * a - cplx{0.0, 1.0} * a * b);
    for (cplx& v : shifted) v *= factor;
    return PolyGaussian(std::move(shifted), g, new_beta);
}

}  // namespace dicke::ops
