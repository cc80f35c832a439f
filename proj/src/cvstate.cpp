#include "dicke/cvstate.hpp"

#include <algorithm>
#include <cmath>

namespace dicke::cvstate {

namespace {

// Drops trailing near-zero coefficients so the stored degree is canonical.
// Cancellation in polynomial arithmetic would otherwise inflate degrees and
// degrade every downstream moment sum.
void trim(std::vector<cplx>& c) {
    double peak = 0.0;
    for (const cplx& v : c) peak = std::max(peak, std::abs(v));
    const double cut = 1e-14 * peak;
    while (c.size() > 1 && std::abs(c.back()) <= cut) c.pop_back();
    if (c.empty()) c.push_back(cplx{0.0});
}

}  // namespace

PolyGaussian::PolyGaussian(std::vector<cplx> coeffs_, cplx gamma_, cplx beta_)
    : coeffs(std::move(coeffs_)), gamma(gamma_), beta(beta_) {
    if (!(gamma.real() > 0.0)) {
        throw non_normalizable_error("PolyGaussian: Re(gamma) must be positive, got " +
                                     std::to_string(gamma.real()));
    }
    if (coeffs.empty()) coeffs.push_back(cplx{0.0});
    trim(coeffs);
}

double FockVector::norm2() const {
    double s = 0.0;
    for (const cplx& a : amps) s += std::norm(a);
    return s;
}

FockVector FockVector::normalized() const {
    const double n = std::sqrt(norm2());
    if (n == 0.0) throw degenerate_state_error("FockVector::normalized: zero vector");
    FockVector out = *this;
    for (cplx& a : out.amps) a /= n;
    return out;
}

PolyGaussian vacuum() {
    return PolyGaussian({std::pow(2.0 / kPi, 0.25)}, 1.0, 0.0);
}

std::vector<cplx> gaussian_moments(int n, cplx gamma, cplx beta) {
    if (!(gamma.real() > 0.0)) {
        throw non_normalizable_error("gaussian_moment: Re(gamma) must be positive");
    }
    std::vector<cplx> m(static_cast<size_t>(n) + 1);
    m[0] = std::sqrt(kPi / gamma) * std::exp(beta * beta / (4.0 * gamma));
    if (n >= 1) m[1] = beta * m[0] / (2.0 * gamma);
    for (int k = 2; k <= n; ++k) {
        m[k] = (static_cast<double>(k - 1) * m[k - 2] + beta * m[k - 1]) / (2.0 * gamma);
    }
    return m;
}

cplx gaussian_moment(int n, cplx gamma, cplx beta) {
    if (n < 0) throw error("gaussian_moment: negative order");
    return gaussian_moments(n, gamma, beta).back();
}

cplx overlap(const PolyGaussian& bra, const PolyGaussian& ket) {
    const cplx g = std::conj(bra.gamma) + ket.gamma;
    const cplx b = std::conj(bra.beta) + ket.beta;
    if (!(g.real() > 0.0)) {
        throw non_normalizable_error("overlap: combined Re(gamma) must be positive");
    }
    const int deg = bra.degree() + ket.degree();

    // Moments divided by the zeroth one; the recurrence is unchanged.
    std::vector<cplx> mh(static_cast<size_t>(deg) + 1);
    mh[0] = 1.0;
    if (deg >= 1) mh[1] = b / (2.0 * g);
    for (int k = 2; k <= deg; ++k) {
        mh[k] = (static_cast<double>(k - 1) * mh[k - 2] + b * mh[k - 1]) / (2.0 * g);
    }

    double cb = 0.0, ck = 0.0;
    for (const cplx& c : bra.coeffs) cb = std::max(cb, std::abs(c));
    for (const cplx& c : ket.coeffs) ck = std::max(ck, std::abs(c));
    if (cb == 0.0 || ck == 0.0) return 0.0;

    cplx acc = 0.0;
    for (size_t j = 0; j < bra.coeffs.size(); ++j) {
        const cplx cj = std::conj(bra.coeffs[j]) / cb;
        if (cj == cplx{0.0}) continue;
        for (size_t k = 0; k < ket.coeffs.size(); ++k) {
            acc += cj * (ket.coeffs[k] / ck) * mh[j + k];
        }
    }

    // Apply the exponential prefactor once, in log space: far-displaced states
    // pair vanishing coefficients with exp(b^2/4g) factors that individually
    // leave double range even when their product (the overlap) does not.
    const cplx log_m0 = 0.5 * (std::log(kPi) - std::log(g)) + b * b / (4.0 * g);
    const double log_mag = std::log(cb) + std::log(ck) + log_m0.real();
    return std::exp(log_mag) * std::exp(cplx(0.0, log_m0.imag())) * acc;
}

double norm2(const PolyGaussian& s) {
    return overlap(s, s).real();
}

PolyGaussian multiply(const PolyGaussian& a, const PolyGaussian& b) {
    std::vector<cplx> c(a.coeffs.size() + b.coeffs.size() - 1, cplx{0.0});
    for (size_t j = 0; j < a.coeffs.size(); ++j) {
        for (size_t k = 0; k < b.coeffs.size(); ++k) {
            c[j + k] += a.coeffs[j] * b.coeffs[k];
        }
    }
    return PolyGaussian(std::move(c), a.gamma + b.gamma, a.beta + b.beta);
}

PolyGaussian scale(const PolyGaussian& s, cplx factor) {
    std::vector<cplx> c = s.coeffs;
    for (cplx& v : c) v *= factor;
    return PolyGaussian(std::move(c), s.gamma, s.beta);
}

PolyGaussian apply_position(const PolyGaussian& s) {
    std::vector<cplx> c(s.coeffs.size() + 1, cplx{0.0});
    for (size_t k = 0; k < s.coeffs.size(); ++k) c[k + 1] = s.coeffs[k];
    return PolyGaussian(std::move(c), s.gamma, s.beta);
}

PolyGaussian apply_momentum(const PolyGaussian& s) {
    // p psi = -(i/2) [P'(x) + (beta - 2 gamma x) P(x)] exp(-gamma x^2 + beta x)
    const cplx half_i{0.0, -0.5};
    std::vector<cplx> c(s.coeffs.size() + 1, cplx{0.0});
    for (size_t k = 0; k < s.coeffs.size(); ++k) {
        if (k + 1 < s.coeffs.size()) c[k] += static_cast<double>(k + 1) * s.coeffs[k + 1];
        c[k] += s.beta * s.coeffs[k];
        c[k + 1] -= 2.0 * s.gamma * s.coeffs[k];
    }
    for (cplx& v : c) v *= half_i;
    return PolyGaussian(std::move(c), s.gamma, s.beta);
}

PolyGaussian rescale_quadrature(const PolyGaussian& s, double factor) {
    if (!(factor > 0.0)) throw error("rescale_quadrature: factor must be positive");
    std::vector<cplx> c = s.coeffs;
    double scale_k = 1.0 / std::sqrt(factor);  // overall 1/sqrt(factor), then 1/factor^k
    for (cplx& v : c) {
        v *= scale_k;
        scale_k /= factor;
    }
    return PolyGaussian(std::move(c), s.gamma / (factor * factor), s.beta / factor);
}

std::vector<cplx> fock_basis_poly(int n) {
    if (n < 0) throw error("fock_basis_poly: negative index");
    // h_k(x) = H_k(sqrt(2) x) by the recurrence h_{k+1} = 2 sqrt(2) x h_k - 2k h_{k-1}.
    std::vector<cplx> hm1{cplx{1.0}};           // h_0
    std::vector<cplx> h{cplx{0.0}, cplx{2.0 * std::sqrt(2.0)}};  // h_1
    if (n == 0) h = hm1;
    for (int k = 1; k < n; ++k) {
        std::vector<cplx> next(static_cast<size_t>(k) + 2, cplx{0.0});
        for (size_t j = 0; j < h.size(); ++j) next[j + 1] += 2.0 * std::sqrt(2.0) * h[j];
        for (size_t j = 0; j < hm1.size(); ++j) next[j] -= 2.0 * k * hm1[j];
        hm1 = std::move(h);
        h = std::move(next);
    }
    double w = std::pow(2.0 / kPi, 0.25);
    for (int k = 1; k <= n; ++k) w /= std::sqrt(2.0 * k);  // 1/sqrt(2^n n!)
    for (cplx& v : h) v *= w;
    return h;
}

PolyGaussian fock_state(int n) {
    return PolyGaussian(fock_basis_poly(n), 1.0, 0.0);
}

FockVector to_fock(const PolyGaussian& state, int n_max) {
    if (n_max < 0) throw error("to_fock: n_max must be >= 0");
    FockVector out;
    out.amps.reserve(static_cast<size_t>(n_max) + 1);

    // The monomial route (expand psi_n, contract with Gaussian moments) is
    // exact in exact arithmetic but cancels catastrophically once n is large:
    // the summands grow like 2^n while the result shrinks geometrically.
    // Keep it for shallow expansions, where it is both fast and tight.
    if (n_max <= 16) {
        for (int n = 0; n <= n_max; ++n) {
            out.amps.push_back(overlap(fock_state(n), state));
        }
        return out;
    }

    // Deep expansions integrate <psi_n|state> on a uniform grid instead. The
    // normalized Hermite functions stay O(1) under their upward recurrence,
    // so every amplitude comes out with a flat ~1e-14 absolute error rather
    // than an n-dependent blowup. Trapezoid error on these entire integrands
    // decays faster than any power of the spacing.
    const double gr = state.gamma.real();
    const int degree = state.degree();
    const double x0 = state.beta.real() / (2.0 * (1.0 + gr));
    const double reach = std::sqrt(static_cast<double>(n_max + degree) + 0.5);
    const double half_width = std::abs(x0) + reach + 10.0;
    const double freq = std::sqrt(2.0 * (2.0 * (n_max + degree) + 1.0)) +
                        std::abs(state.beta.imag()) +
                        2.0 * std::abs(state.gamma.imag()) * half_width;
    const int points =
        static_cast<int>(std::ceil(2.0 * half_width * 8.0 * (freq + 1.0) / kPi));
    const double h = 2.0 * half_width / points;

    out.amps.assign(static_cast<size_t>(n_max) + 1, cplx{0.0});

    // Far-displaced states pair huge exponentials with vanishing coefficients;
    // folding the coefficient scale into the exponent keeps the integrand near
    // the magnitude of the result instead of overflowing along the way.
    double cmax = 0.0;
    for (const cplx& c : state.coeffs) cmax = std::max(cmax, std::abs(c));
    if (cmax == 0.0) return out;
    std::vector<cplx> scaled(state.coeffs.size());
    for (size_t k = 0; k < scaled.size(); ++k) scaled[k] = state.coeffs[k] / cmax;
    const double log_cmax = std::log(cmax);

    const double psi0_norm = std::pow(2.0 / kPi, 0.25);
    std::vector<double> root(static_cast<size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) root[static_cast<size_t>(n)] = std::sqrt(n);
    for (int i = 0; i <= points; ++i) {
        const double x = -half_width + 2.0 * half_width * i / points;
        cplx value = 0.0;
        for (size_t k = scaled.size(); k-- > 0;) value = value * x + scaled[k];
        value *= std::exp(-state.gamma * x * x + state.beta * x + log_cmax) * h;
        if (i == 0 || i == points) value *= 0.5;

        double psi_prev = 0.0;
        double psi = psi0_norm * std::exp(-x * x);
        for (int n = 0; n <= n_max; ++n) {
            out.amps[static_cast<size_t>(n)] += psi * value;
            const double next =
                (2.0 * x * psi - root[static_cast<size_t>(n)] * psi_prev) /
                std::sqrt(static_cast<double>(n) + 1.0);
            psi_prev = psi;
            psi = next;
        }
    }
    return out;
}

double truncation_tail(const PolyGaussian& state, const FockVector& amps) {
    const double n2 = norm2(state);
    if (n2 <= 0.0) throw degenerate_state_error("truncation_tail: zero-norm state");
    return 1.0 - amps.norm2() / n2;
}

PolyGaussian from_fock(const FockVector& f) {
    if (f.dim() == 0) throw error("from_fock: empty vector");
    std::vector<cplx> c{cplx{0.0}};
    for (int n = 0; n < f.dim(); ++n) {
        if (f.amps[n] == cplx{0.0}) continue;
        const std::vector<cplx> basis = fock_basis_poly(n);
        if (basis.size() > c.size()) c.resize(basis.size(), cplx{0.0});
        for (size_t j = 0; j < basis.size(); ++j) c[j] += f.amps[n] * basis[j];
    }
    return PolyGaussian(std::move(c), 1.0, 0.0);
}

double fidelity_pure(const PolyGaussian& state, const FockVector& target) {
    const double sn = norm2(state);
    if (!(sn > 0.0) || !std::isfinite(sn)) {
        throw degenerate_state_error("fidelity_pure: state has zero or non-finite norm");
    }
    const double tn = target.norm2();
    if (!(tn > 0.0)) throw degenerate_state_error("fidelity_pure: zero target");
    const FockVector a = to_fock(state, target.dim() - 1);
    cplx ip = 0.0;
    for (int n = 0; n < target.dim(); ++n) ip += std::conj(target.amps[n]) * a.amps[n];
    return std::norm(ip) / (sn * tn);
}

}  // namespace dicke::cvstate
