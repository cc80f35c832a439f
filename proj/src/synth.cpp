#include "dicke/synth.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace dicke::synth {

using cvstate::fock_basis_poly;
using cvstate::from_fock;
using cvstate::gaussian_moments;

std::vector<cplx> target_polynomial(const FockVector& coeffs) {
    bool any = false;
    for (const cplx& c : coeffs.amps) any = any || (c != cplx{0.0});
    if (!any) throw error("target_polynomial: all-zero target");
    // from_fock already assembles sum c_n (2/pi)^{1/4} H_n(sqrt(2)x)/sqrt(2^n n!)
    // in monomial form; strip the common vacuum prefactor.
    std::vector<cplx> poly = from_fock(coeffs).coeffs;
    const double w = std::pow(2.0 / kPi, 0.25);
    for (cplx& c : poly) c /= w;
    return poly;
}

namespace {

cplx horner(const std::vector<cplx>& poly, cplx x) {
    cplx v = 0.0;
    for (size_t k = poly.size(); k-- > 0;) v = v * x + poly[k];
    return v;
}

cplx horner_derivative(const std::vector<cplx>& poly, cplx x) {
    cplx v = 0.0;
    for (size_t k = poly.size(); k-- > 1;) v = v * x + static_cast<double>(k) * poly[k];
    return v;
}

// Newton steps accepted only while they reduce |p|; plain Newton can walk
// away from multiple roots where p' ~ 0.
cplx polish_root(const std::vector<cplx>& poly, cplx root) {
    double res = std::abs(horner(poly, root));
    for (int it = 0; it < 12; ++it) {
        const cplx d = horner_derivative(poly, root);
        if (std::abs(d) < 1e-300) break;
        const cplx next = root - horner(poly, root) / d;
        const double next_res = std::abs(horner(poly, next));
        if (next_res >= res) break;
        root = next;
        res = next_res;
    }
    return root;
}

}  // namespace

std::vector<cplx> find_roots(const std::vector<cplx>& poly_in) {
    std::vector<cplx> poly = poly_in;
    double peak = 0.0;
    for (const cplx& c : poly) peak = std::max(peak, std::abs(c));
    while (poly.size() > 1 && std::abs(poly.back()) <= 1e-14 * peak) poly.pop_back();
    const int deg = static_cast<int>(poly.size()) - 1;
    if (deg < 1) throw error("find_roots: polynomial degree must be >= 1");

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int k = 1; k < deg; ++k) companion(k, k - 1) = 1.0;
    for (int k = 0; k < deg; ++k) companion(k, deg - 1) = -poly[k] / poly[deg];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);

    std::vector<cplx> roots(static_cast<size_t>(deg));
    for (int k = 0; k < deg; ++k) roots[k] = polish_root(poly, es.eigenvalues()[k]);
    return roots;
}

bool is_real_root(cplx root) {
    return std::abs(root.imag()) < 1e-9 * (1.0 + std::abs(root));
}

TargetSpec make_target(const FockVector& coeffs) {
    TargetSpec spec{coeffs, {}};
    const std::vector<cplx> poly = target_polynomial(coeffs);
    if (poly.size() > 1) spec.roots = find_roots(poly);
    std::sort(spec.roots.begin(), spec.roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return spec;
}

Schedule schedule_real(const TargetSpec& target, const ThetaParams& base,
                       bool presqueezed) {
    for (cplx root : target.roots) {
        if (!is_real_root(root)) {
            throw complex_roots_error(
                "schedule_real: target polynomial has a complex root; use the "
                "complex-roots solver");
        }
    }
    const int n = static_cast<int>(target.roots.size());
    const double eps = base.epsilon();
    if (presqueezed && !(n * eps < 1.0)) {
        throw presqueeze_infeasible_error(
            "schedule_real: presqueezed variant needs N*epsilon < 1, got " +
            std::to_string(n * eps));
    }

    Schedule plan;
    plan.presqueezed = presqueezed;
    plan.rescale_factor = presqueezed ? 1.0 : std::sqrt(n * eps + 1.0);
    if (n == 0) return plan;  // constant polynomial: the target is the vacuum

    std::vector<double> roots(static_cast<size_t>(n));
    double root_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        roots[j] = target.roots[j].real();
        root_sum += roots[j];
    }

    // displacement chain a_1 .. a_{N+1}
    std::vector<double> a(static_cast<size_t>(n) + 1);
    const double scale = presqueezed ? 1.0 : std::sqrt(n * eps + 1.0);
    const double closure = presqueezed ? eps / (1.0 - n * eps) : eps;
    a[0] = (-roots[0] - closure * root_sum) / scale;
    for (int k = 2; k <= n; ++k) a[k - 1] = (roots[k - 2] - roots[k - 1]) / scale;
    a[n] = roots[n - 1] / scale;

    ThetaParams theta = base;
    theta.phi = 0.0;
    theta.p_L = 0.0;
    for (int j = 0; j < n; ++j) {
        plan.steps.push_back({Displacement{cplx{a[j], 0.0}}, theta, {}});
    }
    plan.final_displacement = Displacement{cplx{a[n], 0.0}};
    return plan;
}

namespace {

// Target reproduced by a given two-angle parameter set, in the convention
// target = c0|0> + c1|1> + |2>. Used to score candidate solutions without
// running the protocol.
std::pair<cplx, cplx> coeffs_from_params(double phi1, double phi2, cplx alpha2,
                                         cplx alpha3) {
    const cplx e1 = std::exp(cplx{0.0, -phi1});
    const cplx e2 = std::exp(cplx{0.0, -phi2});
    const double x1 = ((alpha2 + alpha3) * e1).real();
    const double x2 = (alpha3 * e2).real();
    const cplx c0 = (e2 * e2 + 4.0 * x1 * x2 * e1 * e2) / std::sqrt(2.0);
    const cplx c1 = -std::sqrt(2.0) * (x1 * e1 + x2 * e2);
    return {c0, c1};
}

double planned_fidelity(cplx c0, cplx c1, cplx c0e, cplx c1e) {
    const cplx ip = std::conj(c0) * c0e + std::conj(c1) * c1e + 1.0;
    const double nt = std::norm(c0) + std::norm(c1) + 1.0;
    const double ne = std::norm(c0e) + std::norm(c1e) + 1.0;
    return std::norm(ip) / (nt * ne);
}

}  // namespace

std::vector<ComplexSolution> solve_complex_n2(cplx c0, cplx c1) {
    constexpr double tol = 1e-9;
    const double a0 = std::norm(c0);
    const double a1 = std::norm(c1);
    const double cross =
        2.0 * std::sqrt(2.0) * (c1 * c1 * std::conj(c0) + std::conj(c1) * std::conj(c1) * c0).real();
    // real quartic in y = |z|^2, ascending coefficients
    const std::vector<double> quartic = {
        1.0 + 4.0 * a0 * a0 - 4.0 * a0,                        // y^0
        -4.0 - 2.0 * a1 - 4.0 * a0 * a1 + 8.0 * a0 - cross,    // y^1
        6.0 + 4.0 * a1 - 4.0 * a0 + cross,                     // y^2
        -4.0 - 2.0 * a1,                                       // y^3
        1.0,                                                   // y^4
    };
    const auto eval = [&](double y) {
        double v = 0.0;
        for (size_t k = quartic.size(); k-- > 0;) v = v * y + quartic[k];
        return v;
    };
    const auto eval_d = [&](double y) {
        double v = 0.0;
        for (size_t k = quartic.size(); k-- > 1;) v = v * y + static_cast<double>(k) * quartic[k];
        return v;
    };

    // Candidate z values paired with the y they came from.
    std::vector<std::pair<cplx, double>> candidates;

    // y = 1 sits exactly on the quartic iff 4|c0|^2(|c0|^2 - |c1|^2) = 0; the
    // general branch below divides by w = 1 - 1/y and cannot reach it, and
    // eigenvalue scatter at a multiple root (pure |2>) is far too large for
    // the consistency filters, so it gets a closed form.
    if (std::abs(4.0 * a0 * (a0 - a1)) < 1e-10) {
        if (std::abs(c1) > tol) {
            const cplx z = -c0 / c1;
            if (std::abs(std::abs(z) - 1.0) < 1e-5 && std::abs(z) > 0.0) {
                candidates.emplace_back(z / std::abs(z), 1.0);
            }
        } else if (std::abs(c0) < tol) {
            candidates.emplace_back(cplx{1.0, 0.0}, 1.0);  // pure |2>: any unit z
        }
    }

    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    for (int k = 1; k < 4; ++k) companion(k, k - 1) = 1.0;
    for (int k = 0; k < 4; ++k) companion(k, 3) = -quartic[static_cast<size_t>(k)];
    const Eigen::Vector4cd ys = Eigen::EigenSolver<Eigen::Matrix4d>(companion, false).eigenvalues();

    for (int i = 0; i < 4; ++i) {
        if (std::abs(ys[i].imag()) > 1e-5 * (1.0 + std::abs(ys[i]))) continue;
        double y = ys[i].real();
        for (int it = 0; it < 4; ++it) {  // guarded Newton: only improving steps
            const double d = eval_d(y);
            if (std::abs(d) < 1e-300) break;
            const double next = y - eval(y) / d;
            // At a double root p and p' are both roundoff-sized and the raw
            // step can teleport to a different root entirely; polish only.
            if (std::abs(next - y) > 0.05 * (1.0 + std::abs(y))) break;
            if (std::abs(eval(next)) < std::abs(eval(y))) {
                y = next;
            } else {
                break;
            }
        }
        // Roots with |z|^2 < 1 can still reproduce some targets exactly, but
        // the contract admits only y >= 1; one always exists.
        if (y < 1.0 - tol || std::abs(y - 1.0) < 1e-7) continue;  // y = 1 handled above
        const double w = 1.0 - 1.0 / y;
        const cplx disc = std::sqrt(2.0 * c1 * c1 - 4.0 * std::sqrt(2.0) * w * c0);
        for (int sgn : {+1, -1}) {
            const cplx z = (-std::sqrt(2.0) * c1 + static_cast<double>(sgn) * disc) / (2.0 * w);
            if (std::abs(z) < tol) continue;
            if (std::abs(std::norm(z) - y) > 1e-6 * (1.0 + y)) continue;
            candidates.emplace_back(z, y);
        }
    }

    std::vector<ComplexSolution> solutions;
    for (const auto& [z, y] : candidates) {
        const cplx v = -std::sqrt(2.0) * c1 - z;
        const cplx residual = v * z + z * z / std::norm(z) - std::sqrt(2.0) * c0;
        if (std::abs(residual) > 1e-6) continue;

        double phi1, phi2, x1, x2;
        phi2 = -std::arg(z);
        x2 = std::abs(z) / 2.0;
        if (std::abs(v) < tol) {
            phi1 = phi2 + kPi / 2.0;  // x1 = 0 leaves phi1 free; pick a well-posed lift
            x1 = 0.0;
        } else {
            phi1 = -std::arg(v);
            x1 = std::abs(v) / 2.0;
        }

        // Lift (x1, phi1, x2, phi2) to displacements: the two free imaginary
        // parts t1, t2 are fixed by minimizing |a1|^2 + |a2|^2 + |a3|^2.
        const double c = std::cos(phi1 - phi2);
        const double s = std::sin(phi1 - phi2);
        const double den = 4.0 - c * c;
        const double t1 = s * (2.0 * x2 - c * x1) / den;
        const double t2 = s * (c * x2 - 2.0 * x1) / den;
        const cplx alpha3 = cplx{x2, t2} * std::exp(cplx{0.0, phi2});
        const cplx u = cplx{x1, t1} * std::exp(cplx{0.0, phi1});

        ComplexSolution sol;
        sol.phi1 = phi1;
        sol.phi2 = phi2;
        sol.alpha3 = alpha3;
        sol.alpha2 = u - alpha3;
        sol.alpha1 = -u;
        sol.y = y;
        const auto [c0e, c1e] = coeffs_from_params(phi1, phi2, sol.alpha2, sol.alpha3);
        sol.planned_fidelity = planned_fidelity(c0, c1, c0e, c1e);
        if (sol.planned_fidelity < 1.0 - 1e-9) continue;

        bool duplicate = false;
        for (const ComplexSolution& other : solutions) {
            duplicate = duplicate ||
                        (std::abs(sol.alpha1 - other.alpha1) + std::abs(sol.alpha2 - other.alpha2) +
                         std::abs(sol.alpha3 - other.alpha3)) < 1e-8;
        }
        if (!duplicate) solutions.push_back(sol);
    }

    if (solutions.empty()) {
        throw no_admissible_root_error(
            "solve_complex_n2: no quartic root produced a consistent solution");
    }
    std::sort(solutions.begin(), solutions.end(),
              [](const ComplexSolution& a, const ComplexSolution& b) {
                  return a.total_displacement2() < b.total_displacement2();
              });
    return solutions;
}

Schedule to_schedule(const ComplexSolution& sol, const ThetaParams& base) {
    ThetaParams theta = base;
    theta.epsilon_override = 0.0;  // the rotated scheme lives in the eps -> 0 limit
    theta.p_L = 0.0;

    Schedule plan;
    theta.phi = sol.phi1;
    plan.steps.push_back({Displacement{sol.alpha1}, theta, {}});
    theta.phi = sol.phi2;
    plan.steps.push_back({Displacement{sol.alpha2}, theta, {}});
    plan.final_displacement = Displacement{sol.alpha3};
    plan.rescale_factor = 1.0;
    return plan;
}

FockVector direct_mapping_light(const FockVector& coeffs, double kappa, int n_max) {
    if (!(kappa > 0.0)) throw error("direct_mapping_light: kappa must be positive");
    const std::vector<cplx> target = target_polynomial(coeffs);
    const int deg = static_cast<int>(target.size()) - 1;
    if (n_max < deg) {
        throw error("direct_mapping_light: target degree " + std::to_string(deg) +
                    " exceeds n_max " + std::to_string(n_max));
    }

    // The light's momentum wavefunction must satisfy
    //   sum_m u_m (-i)^m psi_m(p) = C * P_target((s/kappa) p) e^{-p^2},
    // s = sqrt(1 + kappa^2), so each u_m is a Gaussian-weighted projection
    // integral, exact through the moment recurrence.
    const double ratio = std::sqrt(1.0 + kappa * kappa) / kappa;
    std::vector<cplx> stretched(target.size());
    double pw = 1.0;
    for (size_t j = 0; j < target.size(); ++j) {
        stretched[j] = target[j] * pw;
        pw *= ratio;
    }

    const std::vector<cplx> moments = gaussian_moments(deg + n_max, 2.0, 0.0);
    FockVector u;
    u.amps.resize(static_cast<size_t>(n_max) + 1);
    cplx i_pow{1.0, 0.0};
    for (int m = 0; m <= n_max; ++m) {
        const std::vector<cplx> basis = fock_basis_poly(m);
        cplx integral = 0.0;
        for (size_t a = 0; a < basis.size(); ++a) {
            for (size_t b = 0; b < stretched.size(); ++b) {
                integral += basis[a] * stretched[b] * moments[a + b];
            }
        }
        u.amps[static_cast<size_t>(m)] = i_pow * integral;
        i_pow *= cplx{0.0, 1.0};
    }
    return u.normalized();
}

Schedule make_direct_schedule(const FockVector& coeffs, double kappa, int n_max) {
    if (n_max < 0) {
        n_max = static_cast<int>(target_polynomial(coeffs).size()) - 1;
    }
    const FockVector u = direct_mapping_light(coeffs, kappa, n_max);

    Schedule plan;
    ThetaParams theta;
    theta.kappa = kappa;
    theta.r = 0.0;
    plan.steps.push_back({Displacement{}, theta, from_fock(u)});
    plan.rescale_factor = std::sqrt(1.0 + kappa * kappa);
    return plan;
}

}  // namespace dicke::synth
