#include "dicke/oracle.hpp"

#include <cmath>

#include "dicke/ops.hpp"

namespace dicke::oracle {

namespace {

// exp(-iH) for Hermitian H, via eigendecomposition. Exact (up to rounding)
// on the truncated space, unlike scaling-and-squaring, and every generator
// used here is i times a Hermitian matrix.
Eigen::MatrixXcd unitary_from_hermitian(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd phases(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        phases[k] = std::exp(cplx{0.0, -lam[k]});
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TruncatedOperator annihilation(int dim) {
    if (dim < 2) throw error("annihilation: dim must be >= 2");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {dim, std::move(a)};
}

TruncatedOperator position(int dim) {
    TruncatedOperator a = annihilation(dim);
    Eigen::MatrixXcd x = (a.matrix + a.matrix.adjoint()) / 2.0;
    return {dim, std::move(x)};
}

TruncatedOperator momentum(int dim) {
    TruncatedOperator a = annihilation(dim);
    Eigen::MatrixXcd p = (a.matrix - a.matrix.adjoint()) / cplx{0.0, 2.0};
    return {dim, std::move(p)};
}

TruncatedOperator squeeze(int dim, double r) {
    TruncatedOperator a = annihilation(dim);
    const Eigen::MatrixXcd a2 = a.matrix * a.matrix;
    // generator (r/2)(a^2 - a^dag^2) = -iH with H = i(r/2)(a^2 - a^dag^2)
    const Eigen::MatrixXcd h = cplx{0.0, r / 2.0} * (a2 - a2.adjoint());
    return {dim, unitary_from_hermitian(h)};
}

TruncatedOperator displacement(int dim, cplx alpha) {
    TruncatedOperator a = annihilation(dim);
    const Eigen::MatrixXcd g = alpha * a.matrix.adjoint() - std::conj(alpha) * a.matrix;
    const Eigen::MatrixXcd h = cplx{0.0, 1.0} * g;
    return {dim, unitary_from_hermitian(h)};
}

JointState product_state(const FockVector& atoms, const FockVector& light, int dim) {
    if (dim < 2) throw error("product_state: dim must be >= 2");
    Eigen::MatrixXcd amps = Eigen::MatrixXcd::Zero(dim, dim);
    const int na = std::min(dim, atoms.dim());
    const int nl = std::min(dim, light.dim());
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nl; ++j) amps(i, j) = atoms.amps[i] * light.amps[j];
    }
    return {std::move(amps)};
}

FockVector pssv_fock(double r, int dim) {
    const TruncatedOperator s = squeeze(dim, r);
    FockVector out;
    out.amps.resize(static_cast<size_t>(dim));
    for (int n = 0; n < dim; ++n) out.amps[n] = s.matrix(n, 1);
    return out;
}

JointState qnd_evolve(const JointState& state, double kappa) {
    const int da = state.dim_atoms();
    const int dl = state.dim_light();
    if (da < 2 || dl < 2) throw error("qnd_evolve: dims must be >= 2");
    if (kappa == 0.0) return state;

    // x is real symmetric; diagonalize each factor once, phase-multiply in
    // the joint eigenbasis, and transform back.
    const auto eig = [](int dim) {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
        for (int n = 1; n < dim; ++n) {
            x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n)) / 2.0;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
        return std::make_pair(es.eigenvalues(), es.eigenvectors());
    };
    const auto [lam_a, v_a] = eig(da);
    const auto [lam_l, v_l] = eig(dl);

    Eigen::MatrixXcd c = v_a.transpose() * state.amps * v_l;
    for (int i = 0; i < da; ++i) {
        for (int j = 0; j < dl; ++j) {
            c(i, j) *= std::exp(cplx{0.0, -2.0 * kappa * lam_a[i] * lam_l[j]});
        }
    }
    return {v_a * c * v_l.transpose()};
}

HomodyneResult homodyne_project(const JointState& state, double p_L) {
    const int dl = state.dim_light();
    // w_n = <p_L|n> built from the normalized Hermite-function recurrence
    // psi_n = (2 p / sqrt(n)) psi_{n-1} - sqrt((n-1)/n) psi_{n-2}, which is
    // stable where the naive H_n / sqrt(2^n n!) form overflows.
    Eigen::VectorXcd w(dl);
    double prev2 = 0.0;
    double prev = std::pow(2.0 / kPi, 0.25) * std::exp(-p_L * p_L);
    cplx im_pow{1.0, 0.0};  // (-i)^n
    for (int n = 0; n < dl; ++n) {
        if (n >= 1) {
            const double cur = (2.0 * p_L / std::sqrt(static_cast<double>(n))) * prev -
                               std::sqrt((n - 1.0) / n) * prev2;
            prev2 = prev;
            prev = cur;
            im_pow *= cplx{0.0, -1.0};
        }
        w[n] = im_pow * prev;
    }
    const Eigen::VectorXcd atoms = state.amps * w;
    HomodyneResult out;
    out.atoms.amps.assign(atoms.data(), atoms.data() + atoms.size());
    out.density = atoms.squaredNorm();
    return out;
}

bool homodyne_reliable(int light_dim, double p_L) {
    return std::abs(p_L) <= std::sqrt(static_cast<double>(light_dim)) / 2.0;
}

AgreementReport run_agreement_grid(int dim) {
    static const double kappas[] = {0.2, 0.5};
    static const double rs[] = {-1.0, 0.0, 1.0};
    static const double pls[] = {-1.0, 0.0, 0.5};

    AgreementReport report;
    FockVector atom_vac;
    atom_vac.amps = {cplx{1.0}};

    for (double kappa : kappas) {
        for (double r : rs) {
            const FockVector light = pssv_fock(r, dim);
            for (double p_L : pls) {
                const JointState joint =
                    qnd_evolve(product_state(atom_vac, light, dim), kappa);
                const HomodyneResult hom = homodyne_project(joint, p_L);

                const ThetaParams params{kappa, r, 0.0, p_L, {}};
                const PolyGaussian closed = ops::theta_s(params, cvstate::vacuum());
                const double closed_density = cvstate::norm2(closed);

                AgreementCase c;
                c.kappa = kappa;
                c.r = r;
                c.p_L = p_L;
                c.fidelity_deficit = 1.0 - cvstate::fidelity_pure(closed, hom.atoms);
                c.density_rel_error =
                    std::abs(hom.density - closed_density) / hom.density;
                report.max_fidelity_deficit =
                    std::max(report.max_fidelity_deficit, c.fidelity_deficit);
                report.max_density_rel_error =
                    std::max(report.max_density_rel_error, c.density_rel_error);
                report.cases.push_back(c);
            }
        }
    }
    return report;
}

}  // namespace dicke::oracle
